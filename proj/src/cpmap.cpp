#include "qinv/cpmap.hpp"

#include <sstream>

namespace qinv {

Matrix apply_superop(const Matrix& s, const Matrix& b) {
  return unvec(s * vec(b), b.rows(), b.cols());
}

Matrix superop_from_kraus(const std::vector<Matrix>& kraus, Eigen::Index n) {
  Matrix s = Matrix::Zero(n * n, n * n);
  for (const Matrix& l : kraus) {
    if (l.rows() != n || l.cols() != n)
      throw PreconditionError("superop_from_kraus: operator shape mismatch");
    // vec(L* b L) = kron(L^T, L*) vec(b)
    s += kron(l.transpose(), l.adjoint());
  }
  return s;
}

namespace {

// C(i n + k, j n + l) = S(l n + k, j n + i); applying it twice is the
// identity, so the same reshuffle converts in both directions.
Matrix reshuffle(const Matrix& m, Eigen::Index n) {
  Matrix out(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l)
          out(i * n + k, j * n + l) = m(l * n + k, j * n + i);
  return out;
}

void fix_phase(Matrix& l) {
  Eigen::Index bi = 0, bj = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    for (Eigen::Index j = 0; j < l.cols(); ++j)
      if (std::abs(l(i, j)) > best + 1e-14) {
        best = std::abs(l(i, j));
        bi = i;
        bj = j;
      }
  if (best <= 0.0) return;
  Complex z = l(bi, bj);
  l *= std::conj(z) / std::abs(z);
}

}  // namespace

Matrix choi_from_superop(const Matrix& s, Eigen::Index n) {
  if (s.rows() != n * n || s.cols() != n * n)
    throw PreconditionError("choi_from_superop: superoperator shape mismatch");
  return reshuffle(s, n);
}

Matrix superop_from_choi(const Matrix& choi, Eigen::Index n) {
  if (choi.rows() != n * n || choi.cols() != n * n)
    throw PreconditionError("superop_from_choi: Choi shape mismatch");
  return reshuffle(choi, n);
}

Matrix choi_from_kraus(const std::vector<Matrix>& kraus, Eigen::Index n) {
  // Choi of b -> L* b L is the rank-one matrix vec(L*) vec(L*)^*.
  Matrix c = Matrix::Zero(n * n, n * n);
  for (const Matrix& l : kraus) {
    Vector v = vec(Matrix(l.adjoint()));
    c += v * v.adjoint();
  }
  return c;
}

bool is_hermiticity_preserving(const Matrix& s, Eigen::Index n, const Tolerance& tol) {
  Matrix c = choi_from_superop(s, n);
  return tol.zero(hermitian_defect(c), c.norm());
}

bool is_cp_superop(const Matrix& s, Eigen::Index n, const Tolerance& tol) {
  Matrix c = choi_from_superop(s, n);
  if (!is_hermitian(c, tol)) return false;
  return is_psd(hermitize(c), tol);
}

bool is_unital_superop(const Matrix& s, Eigen::Index n, const Tolerance& tol) {
  Matrix img = apply_superop(s, identity(n));
  return tol.zero((img - identity(n)).norm(), 1.0 + s.norm());
}

std::vector<Matrix> kraus_from_choi(const Matrix& choi, Eigen::Index n, const Tolerance& tol) {
  if (choi.rows() != n * n || choi.cols() != n * n)
    throw PreconditionError("kraus_from_choi: Choi shape mismatch");
  const auto eig = eig_hermitian(choi, tol);  // throws on non-Hermitian input
  const double max_eig = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0;
  const double min_eig = eig.values.size() ? eig.values.minCoeff() : 0.0;
  if (min_eig < -tol.bound(max_eig)) {
    std::ostringstream msg;
    msg << "kraus_from_choi: Choi matrix is not PSD, min eigenvalue " << min_eig;
    throw NotCompletelyPositive(msg.str(), min_eig);
  }
  const double rank_thr = tol.bound(max_eig);
  std::vector<Matrix> kraus;
  // Largest eigenvalue first for a stable, deterministic ordering.
  for (Eigen::Index k = eig.values.size() - 1; k >= 0; --k) {
    if (eig.values(k) <= rank_thr) break;
    Matrix a = unvec(std::sqrt(eig.values(k)) * eig.vectors.col(k), n, n);
    Matrix l = a.adjoint();
    fix_phase(l);
    kraus.push_back(std::move(l));
  }
  return kraus;
}

CpMap::CpMap(std::vector<Matrix> kraus, Eigen::Index n)
    : n_(n),
      kraus_(std::move(kraus)),
      superop_(superop_from_kraus(kraus_, n)),
      choi_(choi_from_kraus(kraus_, n)) {}

CpMap CpMap::identity_map(Eigen::Index n) {
  return CpMap({identity(n)}, n);
}

CpMap CpMap::from_kraus(std::vector<Matrix> kraus, Eigen::Index n) {
  for (const Matrix& l : kraus)
    if (l.rows() != n || l.cols() != n)
      throw PreconditionError("CpMap::from_kraus: operator shape mismatch");
  return CpMap(std::move(kraus), n);
}

CpMap CpMap::from_superop(const Matrix& s, Eigen::Index n, const Tolerance& tol) {
  return CpMap(kraus_from_choi(choi_from_superop(s, n), n, tol), n);
}

Matrix CpMap::apply(const Matrix& b) const {
  if (b.rows() != n_ || b.cols() != n_) throw PreconditionError("CpMap::apply: shape mismatch");
  Matrix out = Matrix::Zero(n_, n_);
  for (const Matrix& l : kraus_) out += l.adjoint() * b * l;
  return out;
}

bool CpMap::is_unital(const Tolerance& tol) const {
  return tol.zero((apply(identity(n_)) - identity(n_)).norm(), 1.0);
}

bool is_cp(const CpMap& t, const Tolerance& tol) { return is_psd(hermitize(t.choi()), tol); }

bool is_unital(const CpMap& t, const Tolerance& tol) { return t.is_unital(tol); }

CpMap compose(const CpMap& s, const CpMap& t, const Tolerance& tol) {
  if (s.dim() != t.dim()) throw PreconditionError("compose: dimension mismatch");
  return CpMap::from_superop(s.superop() * t.superop(), s.dim(), tol);
}

CpMap dual(const CpMap& t, const Tolerance&) {
  std::vector<Matrix> kraus;
  kraus.reserve(t.kraus().size());
  for (const Matrix& l : t.kraus()) kraus.push_back(l.adjoint());
  return CpMap::from_kraus(std::move(kraus), t.dim());
}

GnsData gns_of(const CpMap& t, const Tolerance& tol) {
  GnsData g;
  g.xi_blocks = kraus_from_choi(t.choi(), t.dim(), tol);
  g.multiplicity = static_cast<Eigen::Index>(g.xi_blocks.size());
  g.minimal = true;
  return g;
}

}  // namespace qinv
