#include "qinv/algebra.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "qinv/random.hpp"

namespace qinv {

namespace {

Matrix stack_vecs(const std::vector<Matrix>& mats, Eigen::Index n) {
  Matrix cols(n * n, static_cast<Eigen::Index>(mats.size()));
  for (std::size_t k = 0; k < mats.size(); ++k) cols.col(static_cast<Eigen::Index>(k)) = vec(mats[k]);
  return cols;
}

std::vector<Matrix> unstack(const Matrix& cols, Eigen::Index n) {
  std::vector<Matrix> out;
  out.reserve(cols.cols());
  for (Eigen::Index k = 0; k < cols.cols(); ++k) out.push_back(unvec(cols.col(k), n, n));
  return out;
}

}  // namespace

StarAlgebra StarAlgebra::from_orthonormal_basis(std::vector<Matrix> basis, Eigen::Index n,
                                                std::vector<Matrix> generators) {
  StarAlgebra s;
  s.n_ = n;
  s.basis_ = std::move(basis);
  s.generators_ = std::move(generators);
  s.basis_cols_ = stack_vecs(s.basis_, n);
  return s;
}

StarAlgebra StarAlgebra::span_closure(const std::vector<Matrix>& generators, Eigen::Index n,
                                      const Tolerance& tol) {
  for (const Matrix& g : generators)
    if (g.rows() != n || g.cols() != n)
      throw PreconditionError("span_closure: generator shape does not match dimension");

  std::vector<Matrix> seed;
  seed.push_back(identity(n));
  for (const Matrix& g : generators) {
    seed.push_back(g);
    seed.push_back(g.adjoint());
  }
  Matrix basis = column_span(stack_vecs(seed, n), tol);

  for (;;) {
    std::vector<Matrix> mats = unstack(basis, n);
    std::vector<Matrix> enlarged = mats;
    for (const Matrix& a : mats) {
      enlarged.push_back(a.adjoint());
      for (const Matrix& b : mats) enlarged.push_back(a * b);
    }
    Matrix next = column_span(stack_vecs(enlarged, n), tol);
    if (next.cols() == basis.cols()) {
      basis = next;
      break;
    }
    basis = next;
  }
  return from_orthonormal_basis(unstack(basis, n), n, generators);
}

StarAlgebra StarAlgebra::full(Eigen::Index n) {
  std::vector<Matrix> units;
  units.reserve(n * n);
  // Matrix units are already HS-orthonormal.
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = 1.0;
      units.push_back(e);
    }
  return from_orthonormal_basis(std::move(units), n);
}

StarAlgebra StarAlgebra::scalars(Eigen::Index n) {
  std::vector<Matrix> basis{identity(n) / std::sqrt(double(n))};
  return from_orthonormal_basis(std::move(basis), n);
}

StarAlgebra StarAlgebra::block_diagonal(const std::vector<Eigen::Index>& blocks,
                                        const Tolerance&) {
  Eigen::Index n = 0;
  for (Eigen::Index b : blocks) n += b;
  std::vector<Matrix> basis;
  Eigen::Index off = 0;
  for (Eigen::Index b : blocks) {
    for (Eigen::Index j = 0; j < b; ++j)
      for (Eigen::Index i = 0; i < b; ++i) {
        Matrix e = Matrix::Zero(n, n);
        e(off + i, off + j) = 1.0;
        basis.push_back(e);
      }
    off += b;
  }
  return from_orthonormal_basis(std::move(basis), n);
}

Matrix StarAlgebra::project(const Matrix& x) const {
  Vector v = vec(x);
  Vector p = basis_cols_ * (basis_cols_.adjoint() * v);
  return unvec(p, n_, n_);
}

double StarAlgebra::span_distance(const Matrix& x) const {
  Vector v = vec(x);
  return (v - basis_cols_ * (basis_cols_.adjoint() * v)).norm();
}

bool StarAlgebra::contains(const Matrix& x, const Tolerance& tol) const {
  return tol.zero(span_distance(x), x.norm());
}

bool StarAlgebra::contains_all(const std::vector<Matrix>& xs, const Tolerance& tol) const {
  return std::all_of(xs.begin(), xs.end(), [&](const Matrix& x) { return contains(x, tol); });
}

bool StarAlgebra::same_span(const StarAlgebra& other, const Tolerance& tol) const {
  if (n_ != other.n_ || dim() != other.dim()) return false;
  return contains_all(other.basis_, tol) && other.contains_all(basis_, tol);
}

bool StarAlgebra::closure_defects_within(const Tolerance& tol) const {
  if (!contains(identity(n_), tol)) return false;
  for (const Matrix& a : basis_) {
    if (!contains(a.adjoint(), tol)) return false;
    for (const Matrix& b : basis_)
      if (!contains(a * b, tol)) return false;
  }
  return true;
}

StarAlgebra commutant(const StarAlgebra& s, const StarAlgebra& ambient, const Tolerance& tol) {
  if (s.ambient_dim() != ambient.ambient_dim())
    throw PreconditionError("commutant: ambient dimension mismatch");
  if (!ambient.contains_all(s.basis(), tol))
    throw PreconditionError("commutant: subalgebra is not contained in the ambient algebra");

  const Eigen::Index n = s.ambient_dim();
  const Eigen::Index a_dim = ambient.dim();
  // Rows: commutators of each ambient basis element with each s basis
  // element; kernel vectors are the coefficient tuples of commuting elements.
  Matrix rows(n * n * s.dim(), a_dim);
  for (Eigen::Index t = 0; t < s.dim(); ++t) {
    const Matrix& g = s.basis()[static_cast<std::size_t>(t)];
    for (Eigen::Index a = 0; a < a_dim; ++a)
      rows.block(t * n * n, a, n * n, 1) = vec(commutator(ambient.basis()[static_cast<std::size_t>(a)], g));
  }
  Matrix kernel = nullspace(rows, tol);
  std::vector<Matrix> basis;
  basis.reserve(kernel.cols());
  for (Eigen::Index k = 0; k < kernel.cols(); ++k) {
    Matrix x = Matrix::Zero(n, n);
    for (Eigen::Index a = 0; a < a_dim; ++a)
      x += kernel(a, k) * ambient.basis()[static_cast<std::size_t>(a)];
    basis.push_back(x);
  }
  // Coefficient tuples are orthonormal and the ambient basis is orthonormal,
  // so the resulting matrices are HS-orthonormal already.
  return StarAlgebra::from_orthonormal_basis(std::move(basis), n);
}

namespace {

struct Clustering {
  std::vector<std::vector<Eigen::Index>> groups;  // indices into ascending eigenvalues
  double min_gap = 0.0;                           // smallest inter-cluster gap
};

Clustering cluster_eigenvalues(const RealVector& values, double within) {
  Clustering c;
  if (values.size() == 0) return c;
  c.groups.push_back({0});
  c.min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    const double gap = values(i) - values(i - 1);
    if (gap <= within) {
      c.groups.back().push_back(i);
    } else {
      c.min_gap = std::min(c.min_gap, gap);
      c.groups.push_back({i});
    }
  }
  return c;
}

}  // namespace

CommutativeSubalgebra CommutativeSubalgebra::from_algebra(const StarAlgebra& s,
                                                          const Tolerance& tol,
                                                          std::uint64_t seed) {
  const Eigen::Index n = s.ambient_dim();
  const Eigen::Index r = s.dim();
  for (std::size_t i = 0; i < s.basis().size(); ++i)
    for (std::size_t j = i + 1; j < s.basis().size(); ++j) {
      const Matrix& a = s.basis()[i];
      const Matrix& b = s.basis()[j];
      if (!tol.zero(commutator(a, b).norm(), a.norm() * b.norm()))
        throw PreconditionError("CommutativeSubalgebra: basis elements do not commute");
    }

  // Hermitian spanning family of the (self-adjoint part of the) algebra.
  std::vector<Matrix> herms;
  for (const Matrix& b : s.basis()) {
    herms.push_back(hermitize(b));
    Matrix im = (b - b.adjoint()) / Complex(0, 2);
    herms.push_back(im);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Matrix h = Matrix::Zero(n, n);
    for (const Matrix& b : herms) h += dist(rng) * b;
    const auto eig = eig_hermitian(h, tol);
    const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    // Eigenvalues of a generic combination split into exactly r clusters;
    // an unlucky draw is detected by a too-small separation and retried.
    Clustering cl = cluster_eigenvalues(eig.values, 1e3 * tol.bound(scale));
    if (static_cast<Eigen::Index>(cl.groups.size()) != r) continue;
    if (cl.groups.size() > 1 && cl.min_gap < 1e-6 * scale) continue;

    std::vector<Matrix> projections;
    projections.reserve(cl.groups.size());
    Matrix u(n, n);
    Eigen::Index col = 0;
    for (const auto& group : cl.groups) {
      Matrix v(n, static_cast<Eigen::Index>(group.size()));
      for (std::size_t k = 0; k < group.size(); ++k) v.col(static_cast<Eigen::Index>(k)) = eig.vectors.col(group[k]);
      projections.push_back(v * v.adjoint());
      u.middleCols(col, v.cols()) = v;
      col += v.cols();
    }

    // The joint eigenprojections must compress every basis element to
    // scalars and reproduce it; otherwise the draw failed to separate.
    bool ok = true;
    for (const Matrix& b : s.basis()) {
      Matrix recon = Matrix::Zero(n, n);
      for (const Matrix& p : projections) {
        Matrix pbp = p * b * p;
        Complex lambda = hs_inner(p, pbp) / hs_inner(p, p);
        if ((pbp - lambda * p).norm() > 1e3 * tol.bound(b.norm())) {
          ok = false;
          break;
        }
        recon += lambda * p;
      }
      if (!ok || (b - recon).norm() > 1e3 * tol.bound(b.norm())) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    CommutativeSubalgebra c;
    c.algebra_ = s;
    c.projections_ = std::move(projections);
    c.diagonalizer_ = u;
    c.non_unique_ = false;
    return c;
  }
  throw NumericalFault("CommutativeSubalgebra: joint diagonalization failed after retries");
}

CommutativeSubalgebra CommutativeSubalgebra::diagonal(Eigen::Index n) {
  std::vector<Matrix> proj;
  for (Eigen::Index k = 0; k < n; ++k) {
    Matrix e = Matrix::Zero(n, n);
    e(k, k) = 1.0;
    proj.push_back(e);
  }
  CommutativeSubalgebra c;
  c.algebra_ = StarAlgebra::from_orthonormal_basis(proj, n);
  c.projections_ = std::move(proj);
  c.diagonalizer_ = identity(n);
  c.non_unique_ = false;
  return c;
}

CommutativeSubalgebra CommutativeSubalgebra::diagonal_in_basis(const Matrix& u,
                                                               const Tolerance& tol) {
  const Eigen::Index n = u.rows();
  if (u.cols() != n) throw PreconditionError("diagonal_in_basis: matrix not square");
  if (!tol.zero((u.adjoint() * u - identity(n)).norm(), 1.0))
    throw PreconditionError("diagonal_in_basis: matrix is not unitary");
  std::vector<Matrix> proj;
  for (Eigen::Index k = 0; k < n; ++k)
    proj.push_back(u.col(k) * u.col(k).adjoint());
  CommutativeSubalgebra c;
  c.algebra_ = StarAlgebra::from_orthonormal_basis(proj, n);
  c.projections_ = std::move(proj);
  c.diagonalizer_ = u;
  c.non_unique_ = false;
  return c;
}

CommutativeSubalgebra CommutativeSubalgebra::masa_from_hermitian(const Matrix& c,
                                                                 const Tolerance& tol) {
  const auto eig = eig_hermitian(c, tol);  // throws on non-Hermitian input
  CommutativeSubalgebra out = diagonal_in_basis(eig.vectors, tol);
  const double scale = std::max(1.0, eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0);
  Clustering cl = cluster_eigenvalues(eig.values, 1e2 * tol.bound(scale));
  out.non_unique_ = static_cast<Eigen::Index>(cl.groups.size()) != c.rows();
  return out;
}

Vector CommutativeSubalgebra::coefficients(const Matrix& x) const {
  Vector out(static_cast<Eigen::Index>(projections_.size()));
  for (std::size_t k = 0; k < projections_.size(); ++k) {
    const Matrix& p = projections_[k];
    out(static_cast<Eigen::Index>(k)) = hs_inner(p, x) / hs_inner(p, p);
  }
  return out;
}

Matrix CommutativeSubalgebra::combine(const Vector& coeffs) const {
  Matrix x = Matrix::Zero(ambient_dim(), ambient_dim());
  for (std::size_t k = 0; k < projections_.size(); ++k)
    x += coeffs(static_cast<Eigen::Index>(k)) * projections_[k];
  return x;
}

std::vector<Matrix> minimal_projections(const CommutativeSubalgebra& c) {
  return c.minimal_projections();
}

bool is_maximal_commutative(const CommutativeSubalgebra& c, const StarAlgebra& ambient,
                            const Tolerance& tol) {
  StarAlgebra rel = commutant(c.algebra(), ambient, tol);
  return rel.same_span(c.algebra(), tol);
}

}  // namespace qinv
