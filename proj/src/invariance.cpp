#include "qinv/invariance.hpp"

#include <algorithm>
#include <sstream>

#include "qinv/fixtures.hpp"
#include "qinv/random.hpp"

namespace qinv {

// ---------------------------------------------------------------------------
// Direct tests
// ---------------------------------------------------------------------------

double invariance_defect_cp(const CpMap& t, const CommutativeSubalgebra& c) {
  double worst = 0.0;
  for (const Matrix& p : c.minimal_projections())
    worst = std::max(worst, c.algebra().span_distance(t.apply(p)));
  return worst;
}

double invariance_defect_gen(const CcpGenerator& g, const CommutativeSubalgebra& c) {
  double worst = 0.0;
  for (const Matrix& p : c.minimal_projections())
    worst = std::max(worst, c.algebra().span_distance(g.apply(p)));
  return worst;
}

bool direct_invariant_cp(const CpMap& t, const CommutativeSubalgebra& c, const Tolerance& tol) {
  if (t.dim() != c.ambient_dim()) throw PreconditionError("direct_invariant_cp: dimension mismatch");
  return invariance_defect_cp(t, c) <= tol.bound(1.0 + t.superop().norm());
}

bool direct_invariant_gen(const CcpGenerator& g, const CommutativeSubalgebra& c,
                          const Tolerance& tol) {
  if (g.dim() != c.ambient_dim()) throw PreconditionError("direct_invariant_gen: dimension mismatch");
  return invariance_defect_gen(g, c) <= tol.bound(1.0 + g.superop().norm());
}

// ---------------------------------------------------------------------------
// Alpha certificate
// ---------------------------------------------------------------------------

Matrix AlphaCertificate::block(const CommutativeSubalgebra& c, std::size_t gen, Eigen::Index i,
                               Eigen::Index j) const {
  const Matrix& co = coeffs.at(gen);
  return c.combine(co.row(i * multiplicity + j).transpose());
}

namespace {

// Stacks Re and Im of vec(m) into a real vector segment.
void put_real_stacked(RealMatrix& a, Eigen::Index row0, Eigen::Index col, const Matrix& m) {
  Vector v = vec(m);
  a.block(row0, col, v.size(), 1) = v.real();
  a.block(row0 + v.size(), col, v.size(), 1) = v.imag();
}

struct AlphaSolve {
  Matrix coeffs;  // (m*m) x r
  double residual = 0.0;
};

// Per-generator least-squares solve of p L_i - L_i p = sum_j c_ij L_j with
// the blockwise-Hermitian star-condition imposed inside the real
// parametrization (diagonal blocks real over the projections, off-diagonal
// pairs conjugate).
AlphaSolve solve_alpha_for_generator(const Matrix& p, const std::vector<Matrix>& kraus,
                                     const CommutativeSubalgebra& c) {
  const Eigen::Index m = static_cast<Eigen::Index>(kraus.size());
  const Eigen::Index r = c.dim();
  const Eigen::Index n = c.ambient_dim();
  const Eigen::Index block = 2 * n * n;  // real rows per equation block
  const auto& proj = c.minimal_projections();

  const Eigen::Index n_params = r * m * m;
  RealMatrix a = RealMatrix::Zero(block * m, n_params);
  RealVector rhs(block * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Vector v = vec(Matrix(p * kraus[i] - kraus[i] * p));
    rhs.segment(block * i, n * n) = v.real();
    rhs.segment(block * i + n * n, n * n) = v.imag();
  }

  Eigen::Index col = 0;
  // parameter layout bookkeeping for extraction
  struct Param {
    Eigen::Index i, j, s;
    int kind;  // 0 diag, 1 re, 2 im
  };
  std::vector<Param> params;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index s = 0; s < r; ++s) {
      put_real_stacked(a, block * i, col, proj[s] * kraus[i]);
      params.push_back({i, i, s, 0});
      ++col;
    }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j)
      for (Eigen::Index s = 0; s < r; ++s) {
        // real part: c_ij += p_s, c_ji += p_s
        put_real_stacked(a, block * i, col, proj[s] * kraus[j]);
        put_real_stacked(a, block * j, col, proj[s] * kraus[i]);
        params.push_back({i, j, s, 1});
        ++col;
        // imaginary part: c_ij += i p_s, c_ji -= i p_s
        put_real_stacked(a, block * i, col, Complex(0, 1) * proj[s] * kraus[j]);
        put_real_stacked(a, block * j, col, Complex(0, -1) * proj[s] * kraus[i]);
        params.push_back({i, j, s, 2});
        ++col;
      }

  AlphaSolve out;
  out.coeffs = Matrix::Zero(m * m, r);
  if (n_params > 0) {
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
    RealVector theta = cod.solve(rhs);
    for (std::size_t t = 0; t < params.size(); ++t) {
      const Param& pa = params[t];
      const double value = theta(static_cast<Eigen::Index>(t));
      if (pa.kind == 0) {
        out.coeffs(pa.i * m + pa.i, pa.s) += value;
      } else if (pa.kind == 1) {
        out.coeffs(pa.i * m + pa.j, pa.s) += value;
        out.coeffs(pa.j * m + pa.i, pa.s) += value;
      } else {
        out.coeffs(pa.i * m + pa.j, pa.s) += Complex(0, value);
        out.coeffs(pa.j * m + pa.i, pa.s) += Complex(0, -value);
      }
    }
  } else {
    out.residual = rhs.norm();
    return out;
  }

  // Residual by re-evaluation.
  for (Eigen::Index i = 0; i < m; ++i) {
    Matrix lhs = p * kraus[i] - kraus[i] * p;
    for (Eigen::Index j = 0; j < m; ++j)
      lhs -= c.combine(out.coeffs.row(i * m + j).transpose()) * kraus[j];
    out.residual = std::max(out.residual, lhs.norm());
  }
  return out;
}

double max_kraus_norm(const std::vector<Matrix>& kraus) {
  double worst = 0.0;
  for (const Matrix& l : kraus) worst = std::max(worst, l.norm());
  return worst;
}

}  // namespace

AlphaSearch alpha_certificate(const std::vector<Matrix>& kraus, const CommutativeSubalgebra& c,
                              const Tolerance& tol) {
  const Eigen::Index n = c.ambient_dim();
  for (const Matrix& l : kraus)
    if (l.rows() != n || l.cols() != n)
      throw PreconditionError("alpha_certificate: Kraus shape mismatch");

  AlphaCertificate cert;
  cert.generators = c.minimal_projections();
  cert.multiplicity = static_cast<Eigen::Index>(kraus.size());
  double residual = 0.0;
  for (const Matrix& p : cert.generators) {
    AlphaSolve solved = solve_alpha_for_generator(p, kraus, c);
    residual = std::max(residual, solved.residual);
    cert.coeffs.push_back(std::move(solved.coeffs));
  }
  cert.residual = residual;

  AlphaSearch out;
  out.best_residual = residual;
  if (residual <= tol.bound(1.0 + max_kraus_norm(kraus))) out.certificate = std::move(cert);
  return out;
}

double alpha_certificate_residual(const AlphaCertificate& cert, const std::vector<Matrix>& kraus,
                                  const CommutativeSubalgebra& c) {
  const Eigen::Index m = cert.multiplicity;
  double worst = 0.0;
  for (std::size_t g = 0; g < cert.generators.size(); ++g) {
    const Matrix& p = cert.generators[g];
    for (Eigen::Index i = 0; i < m; ++i) {
      Matrix lhs = p * kraus[i] - kraus[i] * p;
      for (Eigen::Index j = 0; j < m; ++j) lhs -= cert.block(c, g, i, j) * kraus[j];
      worst = std::max(worst, lhs.norm());
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Diagonal (Rebolledo-style) condition
// ---------------------------------------------------------------------------

RebolledoResult rebolledo_check(const std::vector<Matrix>& kraus, const CommutativeSubalgebra& c,
                                const Tolerance& tol) {
  const Eigen::Index m = static_cast<Eigen::Index>(kraus.size());
  const Eigen::Index r = c.dim();
  const Eigen::Index n = c.ambient_dim();
  const auto& proj = c.minimal_projections();

  RebolledoResult out;
  out.found = true;
  for (const Matrix& p : proj) {
    RealMatrix coeff = RealMatrix::Zero(m, r);
    for (Eigen::Index i = 0; i < m; ++i) {
      RealMatrix a(2 * n * n, r);
      for (Eigen::Index s = 0; s < r; ++s) {
        Vector v = vec(Matrix(proj[s] * kraus[i]));
        a.block(0, s, n * n, 1) = v.real();
        a.block(n * n, s, n * n, 1) = v.imag();
      }
      Vector target = vec(Matrix(p * kraus[i] - kraus[i] * p));
      RealVector rhs(2 * n * n);
      rhs.head(n * n) = target.real();
      rhs.tail(n * n) = target.imag();
      Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
      RealVector theta = cod.solve(rhs);
      coeff.row(i) = theta.transpose();
      Matrix check = p * kraus[i] - kraus[i] * p;
      for (Eigen::Index s = 0; s < r; ++s) check -= theta(s) * proj[s] * kraus[i];
      out.max_residual = std::max(out.max_residual, check.norm());
    }
    out.coefficients.push_back(std::move(coeff));
  }
  out.found = out.max_residual <= tol.bound(1.0 + max_kraus_norm(kraus));
  return out;
}

RemixExperiment rebolledo_remix_experiment(const std::vector<Matrix>& kraus,
                                           const CommutativeSubalgebra& c, int trials,
                                           std::uint64_t seed, const Tolerance& tol) {
  RemixExperiment out;
  out.trials = trials;
  const Eigen::Index m = static_cast<Eigen::Index>(kraus.size());
  if (m == 0) return out;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    Matrix u = random_unitary(m, rng);
    std::vector<Matrix> remixed(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      remixed[i] = Matrix::Zero(c.ambient_dim(), c.ambient_dim());
      for (Eigen::Index j = 0; j < m; ++j) remixed[i] += u(i, j) * kraus[j];
    }
    if (rebolledo_check(remixed, c, tol).found) ++out.successes;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Zeta certificate
// ---------------------------------------------------------------------------

namespace {

using Blocks = std::vector<Matrix>;

Vector stack_blocks(const Blocks& z, Eigen::Index n) {
  Vector out(static_cast<Eigen::Index>(z.size()) * n * n);
  for (std::size_t i = 0; i < z.size(); ++i) out.segment(static_cast<Eigen::Index>(i) * n * n, n * n) = vec(z[i]);
  return out;
}

Blocks unstack_blocks(const Vector& v, Eigen::Index m, Eigen::Index n) {
  Blocks out;
  out.reserve(m);
  for (Eigen::Index i = 0; i < m; ++i) out.push_back(unvec(v.segment(i * n * n, n * n), n, n));
  return out;
}

Blocks left_commutator(const Matrix& p, const Blocks& z) {
  Blocks out;
  out.reserve(z.size());
  for (const Matrix& zi : z) out.push_back(p * zi - zi * p);
  return out;
}

double blocks_norm(const Blocks& z) {
  double acc = 0.0;
  for (const Matrix& zi : z) acc += zi.squaredNorm();
  return std::sqrt(acc);
}

struct GammaFit {
  Matrix gamma;
  double residual = 0.0;
};

// Least-squares fit of the compression condition; the minimal projections are
// orthogonal, so gamma p_k = gamma_k p_k and the fit is per-projection.
GammaFit fit_gamma(const CcpGenerator& g, const CommutativeSubalgebra& c, const Blocks& z) {
  const auto& proj = c.minimal_projections();
  GammaFit out;
  Vector coeff(static_cast<Eigen::Index>(proj.size()));
  for (std::size_t k = 0; k < proj.size(); ++k) {
    const Matrix& p = proj[k];
    Matrix lhs = g.apply(p);
    for (const Matrix& zi : z) lhs -= zi.adjoint() * p * zi;
    const double gk = (hs_inner(p, lhs) / hs_inner(p, p)).real();
    coeff(static_cast<Eigen::Index>(k)) = gk;
    out.residual = std::max(out.residual, (lhs - gk * p).norm());
  }
  out.gamma = c.combine(coeff);
  return out;
}

}  // namespace

ZetaSearch zeta_certificate(const CcpGenerator& g, const CommutativeSubalgebra& c,
                            const Tolerance& tol, std::uint64_t seed, int restarts) {
  const Eigen::Index n = g.dim();
  if (n != c.ambient_dim()) throw PreconditionError("zeta_certificate: dimension mismatch");

  ZetaSearch search;
  LindbladDecomposition ld = lindblad_decompose(g, tol);  // throws if not CCP
  const Blocks& zeta0 = ld.form.kraus;
  const Eigen::Index m = static_cast<Eigen::Index>(zeta0.size());
  const auto& proj = c.minimal_projections();
  const Eigen::Index r = c.dim();

  const double scale3 = 1.0 + g.superop().norm();
  if (m == 0) {
    // No dissipative content: zeta = 0, gamma from the least-squares fit.
    GammaFit fit = fit_gamma(g, c, {});
    ZetaCertificate cert;
    cert.gamma = fit.gamma;
    cert.residual_gamma = fit.residual;
    cert.alpha.generators = proj;
    cert.alpha.multiplicity = 0;
    cert.alpha.coeffs.assign(proj.size(), Matrix::Zero(0, r));
    cert.zeta_global = true;
    if (fit.residual <= tol.bound(scale3)) {
      search.certificate = std::move(cert);
    } else {
      search.best_residual = fit.residual;
      search.note = "gamma fit residual above tolerance";
      search.search_completeness_failure = direct_invariant_gen(g, c, tol);
    }
    return search;
  }

  // Derivation of the generator on the projections, d(p) = p zeta0 - zeta0 p.
  std::vector<Blocks> d(proj.size());
  for (std::size_t k = 0; k < proj.size(); ++k) d[k] = left_commutator(proj[k], zeta0);

  // Spanning family of span{ d(p) x : p minimal projection, x in C }.
  Matrix raw(m * n * n, r * r);
  for (Eigen::Index k = 0; k < r; ++k)
    for (Eigen::Index s = 0; s < r; ++s) {
      Blocks v;
      v.reserve(m);
      for (const Matrix& di : d[static_cast<std::size_t>(k)]) v.push_back(di * proj[s]);
      raw.col(k * r + s) = stack_blocks(v, n);
    }
  Matrix w = column_span(raw, tol);
  const Eigen::Index dim_w = w.cols();
  std::vector<Blocks> w_blocks;
  w_blocks.reserve(dim_w);
  for (Eigen::Index t = 0; t < dim_w; ++t) w_blocks.push_back(unstack_blocks(w.col(t), m, n));

  // Stage A: linear constraints p_k zeta - zeta p_k = d(p_k).
  Matrix a(static_cast<Eigen::Index>(proj.size()) * m * n * n, dim_w);
  Vector rhs(a.rows());
  for (std::size_t k = 0; k < proj.size(); ++k) {
    rhs.segment(static_cast<Eigen::Index>(k) * m * n * n, m * n * n) = stack_blocks(d[k], n);
    for (Eigen::Index t = 0; t < dim_w; ++t)
      a.block(static_cast<Eigen::Index>(k) * m * n * n, t, m * n * n, 1) =
          stack_blocks(left_commutator(proj[k], w_blocks[static_cast<std::size_t>(t)]), n);
  }
  LstsqResult base = lstsq_min_norm(a, rhs);
  Matrix kernel = nullspace(a, tol);

  const double thr_a = tol.bound(1.0 + blocks_norm(zeta0));

  auto realize = [&](const Vector& tau) {
    Blocks z(m, Matrix::Zero(n, n));
    for (Eigen::Index t = 0; t < dim_w; ++t)
      for (Eigen::Index i = 0; i < m; ++i) z[static_cast<std::size_t>(i)] += tau(t) * w_blocks[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
    return z;
  };
  auto derivation_residual = [&](const Blocks& z) {
    double worst = 0.0;
    for (std::size_t k = 0; k < proj.size(); ++k) {
      Blocks lhs = left_commutator(proj[k], z);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < m; ++i)
        acc += (lhs[static_cast<std::size_t>(i)] - d[k][static_cast<std::size_t>(i)]).squaredNorm();
      worst = std::max(worst, std::sqrt(acc));
    }
    return worst;
  };

  // Candidate tau vectors: the base least-squares point first, then random
  // restarts over the affine family (if any freedom is left), each refined
  // by coordinate descent on the compression residual.
  std::mt19937_64 rng(seed);
  std::vector<Vector> candidates;
  candidates.push_back(base.x.col(0));
  if (kernel.cols() > 0) {
    for (int rstart = 0; rstart < restarts; ++rstart) {
      Vector mu = vec(randn_complex(kernel.cols(), 1, rng));
      candidates.push_back(base.x.col(0) + kernel * (mu * std::max(1.0, base.x.norm())));
    }
  }

  double best_obj = std::numeric_limits<double>::infinity();
  Vector best_tau;
  for (Vector& tau : candidates) {
    if (kernel.cols() > 0) {
      // Cheap local refinement over the affine freedom.
      const double h_step = 1e-4;
      Vector mu = Vector::Zero(kernel.cols());
      auto obj = [&](const Vector& m_) {
        return fit_gamma(g, c, realize(tau + kernel * m_)).residual;
      };
      double current = obj(mu);
      for (int iter = 0; iter < 60; ++iter) {
        bool improved = false;
        for (Eigen::Index t = 0; t < mu.size(); ++t)
          for (Complex dir : {Complex(h_step, 0), Complex(-h_step, 0), Complex(0, h_step),
                              Complex(0, -h_step)}) {
            Vector trial = mu;
            trial(t) += dir * std::max(1.0, mu.norm());
            const double val = obj(trial);
            if (val < current) {
              current = val;
              mu = trial;
              improved = true;
            }
          }
        if (!improved) break;
      }
      tau += kernel * mu;
    }
    const double obj = fit_gamma(g, c, realize(tau)).residual;
    if (obj < best_obj) {
      best_obj = obj;
      best_tau = tau;
    }
  }

  Blocks z = realize(best_tau);
  GammaFit fit = fit_gamma(g, c, z);
  const double res_a = derivation_residual(z);
  AlphaSearch alpha = alpha_certificate(z, c, tol);

  search.best_residual = std::max(res_a, fit.residual);
  if (res_a <= thr_a && fit.residual <= tol.bound(scale3) && alpha.found()) {
    ZetaCertificate cert;
    cert.zeta_blocks = z;
    cert.gamma = fit.gamma;
    cert.alpha = *alpha.certificate;
    cert.residual_derivation = res_a;
    cert.residual_alpha = alpha.certificate->residual;
    cert.residual_gamma = fit.residual;
    // Does zeta implement the derivation on the whole matrix algebra?
    double global_defect = 0.0;
    for (Eigen::Index pp = 0; pp < n; ++pp)
      for (Eigen::Index q = 0; q < n; ++q) {
        Matrix e = Matrix::Zero(n, n);
        e(pp, q) = 1.0;
        Blocks lhs = left_commutator(e, z);
        Blocks ref = left_commutator(e, zeta0);
        for (Eigen::Index i = 0; i < m; ++i)
          global_defect = std::max(global_defect, (lhs[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(i)]).norm());
      }
    cert.zeta_global = global_defect <= tol.bound(1.0 + blocks_norm(zeta0) + blocks_norm(z));
    search.certificate = std::move(cert);
  } else {
    std::ostringstream note;
    note << "search failed: derivation residual " << res_a << ", gamma residual " << fit.residual;
    if (!alpha.found()) note << ", no alpha certificate for the zeta blocks";
    search.note = note.str();
    search.search_completeness_failure = direct_invariant_gen(g, c, tol);
  }
  return search;
}

// ---------------------------------------------------------------------------
// Classical restriction
// ---------------------------------------------------------------------------

ClassicalGenerator restrict_classical(const CcpGenerator& g, const CommutativeSubalgebra& c,
                                      const Tolerance& tol) {
  if (!direct_invariant_gen(g, c, tol))
    throw PreconditionError("restrict_classical: generator does not leave the subalgebra invariant");
  const auto& proj = c.minimal_projections();
  const Eigen::Index r = c.dim();
  const double scale = 1.0 + g.superop().norm();
  ClassicalGenerator out;
  out.q = RealMatrix::Zero(r, r);
  for (Eigen::Index l = 0; l < r; ++l) {
    Matrix img = g.apply(proj[static_cast<std::size_t>(l)]);
    Vector coeff = c.coefficients(img);
    for (Eigen::Index k = 0; k < r; ++k) {
      if (std::abs(coeff(k).imag()) > tol.bound(scale))
        throw NumericalFault("restrict_classical: restriction coefficients are not real");
      out.q(k, l) = coeff(k).real();
    }
  }
  out.is_markov = is_markov_generator(g, tol);
  if (out.is_markov) {
    const double thr = tol.bound(scale);
    for (Eigen::Index k = 0; k < r; ++k) {
      if (out.q.row(k).sum() > thr || out.q.row(k).sum() < -thr)
        throw NumericalFault("restrict_classical: Markov restriction has nonzero row sum");
      for (Eigen::Index l = 0; l < r; ++l)
        if (k != l && out.q(k, l) < -thr)
          throw NumericalFault("restrict_classical: Markov restriction has negative rate");
    }
  }
  return out;
}

RealMatrix restrict_stochastic(const CpMap& t, const CommutativeSubalgebra& c,
                               const Tolerance& tol) {
  if (!direct_invariant_cp(t, c, tol))
    throw PreconditionError("restrict_stochastic: map does not leave the subalgebra invariant");
  const auto& proj = c.minimal_projections();
  const Eigen::Index r = c.dim();
  const double scale = 1.0 + t.superop().norm();
  RealMatrix p = RealMatrix::Zero(r, r);
  for (Eigen::Index l = 0; l < r; ++l) {
    Vector coeff = c.coefficients(t.apply(proj[static_cast<std::size_t>(l)]));
    for (Eigen::Index k = 0; k < r; ++k) {
      if (std::abs(coeff(k).imag()) > tol.bound(scale))
        throw NumericalFault("restrict_stochastic: restriction coefficients are not real");
      if (coeff(k).real() < -tol.bound(scale))
        throw NumericalFault("restrict_stochastic: negative transition weight");
      p(k, l) = coeff(k).real();
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Commutator-membership check
// ---------------------------------------------------------------------------

CommutatorMembershipCheck hamiltonian_membership_check(const Matrix& h,
                                                       const CommutativeSubalgebra& c,
                                                       const StarAlgebra& ambient,
                                                       const Tolerance& tol) {
  if (!ambient.contains(h, tol))
    throw PreconditionError("hamiltonian_membership_check: h is not in the ambient algebra");
  const Eigen::Index n = c.ambient_dim();
  StarAlgebra cprime = commutant(c.algebra(), StarAlgebra::full(n), tol);

  CommutatorMembershipCheck out;
  out.hypotheses_hold = true;
  for (const Matrix& p : c.minimal_projections()) {
    Matrix comm = commutator(p, h);
    if (!tol.zero(cprime.span_distance(comm), 1.0 + h.norm())) {
      out.hypotheses_hold = false;
      break;
    }
  }
  out.member = c.algebra().contains(h, tol);
  if (out.hypotheses_hold && !out.member) {
    out.tolerance_fault = true;
    out.reason = "numerical-tolerance fault: commutator hypotheses hold but h is not in the span";
  } else if (!out.hypotheses_hold) {
    out.reason = "hypothesis violated: [p, h] leaves the commutant for some minimal projection";
  }
  out.passed = out.hypotheses_hold && out.member;
  return out;
}

// ---------------------------------------------------------------------------
// Randomized suites and fixtures
// ---------------------------------------------------------------------------

std::vector<Matrix> random_invariant_kraus(Eigen::Index n, int m, std::mt19937_64& rng) {
  std::vector<Matrix> kraus;
  kraus.reserve(m);
  for (int i = 0; i < m; ++i) kraus.push_back(random_diagonal(n, rng) * random_permutation(n, rng));
  return kraus;
}

std::vector<Matrix> random_generic_kraus(Eigen::Index n, int m, std::mt19937_64& rng) {
  std::vector<Matrix> kraus;
  kraus.reserve(m);
  for (int i = 0; i < m; ++i) kraus.push_back(randn_complex(n, n, rng) / std::sqrt(double(n * m)));
  return kraus;
}

CcpGenerator random_invariant_markov_generator(Eigen::Index n, std::mt19937_64& rng,
                                               const Tolerance& tol) {
  std::uniform_int_distribution<int> pick_m(1, 2);
  std::vector<Matrix> kraus = random_invariant_kraus(n, pick_m(rng), rng);
  Matrix k = Matrix::Zero(n, n);
  for (const Matrix& l : kraus) k += l.adjoint() * l;
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix h0 = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) h0(i, i) = dist(rng);
  Matrix beta = -0.5 * k + Complex(0, 1) * h0;
  return assemble_ce(CeForm{CpMap::from_kraus(kraus, n), beta}, tol);
}

namespace {

std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
  return std::mt19937_64(seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(trial + 1)));
}

bool death_fixtures_pass(const Tolerance& tol, std::vector<std::string>& notes) {
  using namespace fixtures;
  bool ok = true;
  const CommutativeSubalgebra diag = CommutativeSubalgebra::diagonal(2);
  CcpGenerator gen = death_generator(tol);
  if (!direct_invariant_gen(gen, diag, tol)) {
    notes.push_back("death fixture: generator not invariant");
    ok = false;
  }
  ClassicalGenerator q = restrict_classical(gen, diag, tol);
  if ((q.q - death_q_matrix()).norm() > 1e-10) {
    notes.push_back("death fixture: wrong Q-matrix");
    ok = false;
  }
  CpMap cp = death_cp_part();
  if (direct_invariant_cp(cp, diag, tol)) {
    notes.push_back("death fixture: CP part unexpectedly invariant");
    ok = false;
  }
  if (alpha_certificate(cp.kraus(), diag, tol).found()) {
    notes.push_back("death fixture: unexpected alpha certificate for the CP part");
    ok = false;
  }
  ZetaSearch zeta = zeta_certificate(gen, diag, tol);
  if (!zeta.found()) {
    notes.push_back("death fixture: zeta search failed");
    ok = false;
  }
  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  StarAlgebra full = StarAlgebra::full(2);
  if (hamiltonian_membership_check(flip, diag, full, tol).hypotheses_hold) {
    notes.push_back("membership fixture: off-diagonal h passed the hypothesis stage");
    ok = false;
  }
  Matrix hd = Matrix::Zero(2, 2);
  hd(0, 0) = 0.3;
  hd(1, 1) = -1.7;
  if (!hamiltonian_membership_check(hd, diag, full, tol).passed) {
    notes.push_back("membership fixture: diagonal h rejected");
    ok = false;
  }
  return ok;
}

}  // namespace

CrosscheckReport crosscheck_certificates(std::uint64_t seed, int trials, Eigen::Index n,
                                         const Tolerance& tol) {
  CrosscheckReport report;
  const CommutativeSubalgebra diag = CommutativeSubalgebra::diagonal(n);

  report.cp_trials = trials;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng = trial_rng(seed, t);
    std::uniform_int_distribution<int> pick_m(1, int(n));
    std::vector<Matrix> kraus = (t % 2 == 0) ? random_invariant_kraus(n, pick_m(rng), rng)
                                             : random_generic_kraus(n, pick_m(rng), rng);
    CpMap map = CpMap::from_kraus(kraus, n);
    const bool direct = direct_invariant_cp(map, diag, tol);
    AlphaSearch cert = alpha_certificate(kraus, diag, tol);
    if (direct == cert.found()) {
      ++report.cp_agreements;
      if (direct)
        report.max_invariant_alpha_residual =
            std::max(report.max_invariant_alpha_residual, cert.best_residual);
    } else {
      report.cp_disagreements.push_back(t);
    }
  }

  report.gen_trials = trials / 2;
  for (int t = 0; t < report.gen_trials; ++t) {
    std::mt19937_64 rng = trial_rng(seed + 0x5bf0a8b1, t);
    CcpGenerator g = random_invariant_markov_generator(n, rng, tol);
    if (direct_invariant_gen(g, diag, tol)) ++report.gen_invariant;
    ZetaSearch zeta = zeta_certificate(g, diag, tol, seed + t);
    if (zeta.found()) {
      ++report.zeta_found;
      const ZetaCertificate& cert = *zeta.certificate;
      report.max_zeta_residual =
          std::max({report.max_zeta_residual, cert.residual_derivation, cert.residual_alpha,
                    cert.residual_gamma});
    } else if (zeta.search_completeness_failure) {
      report.zeta_failures.push_back(t);
    }
  }

  if (n == 2) report.fixtures_ok = death_fixtures_pass(tol, report.notes);
  return report;
}

std::vector<GeneratorSuiteCase> invariant_generator_suite(std::uint64_t seed, int count,
                                                          Eigen::Index n, const Tolerance& tol) {
  const CommutativeSubalgebra diag = CommutativeSubalgebra::diagonal(n);
  std::vector<GeneratorSuiteCase> out;
  out.reserve(count);
  for (int t = 0; t < count; ++t) {
    std::mt19937_64 rng = trial_rng(seed, t);
    CcpGenerator g = random_invariant_markov_generator(n, rng, tol);
    GeneratorSuiteCase cs;
    cs.invariant = direct_invariant_gen(g, diag, tol);
    ZetaSearch zeta = zeta_certificate(g, diag, tol, seed + t);
    cs.zeta_found = zeta.found();
    if (zeta.found()) {
      cs.residual_derivation = zeta.certificate->residual_derivation;
      cs.residual_alpha = zeta.certificate->residual_alpha;
      cs.residual_gamma = zeta.certificate->residual_gamma;
    }
    out.push_back(cs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Worked-example fixtures
// ---------------------------------------------------------------------------

namespace fixtures {

Matrix death_ce_kraus() {
  Matrix l(2, 2);
  l << 1, 1, 0, 1;
  return l;
}

Matrix death_ce_beta() {
  Matrix b = Matrix::Zero(2, 2);
  b(0, 1) = -1.0;
  return b;
}

Matrix death_hamiltonian() {
  Matrix h(2, 2);
  h << 0, -1, 1, 0;
  return h / Complex(0, 2);
}

Matrix death_canonical_kraus() {
  Matrix l = Matrix::Zero(2, 2);
  l(0, 1) = 1.0;
  return l;
}

CcpGenerator death_generator(const Tolerance& tol) {
  return assemble_lindblad(LindbladForm{death_hamiltonian(), {death_ce_kraus()}}, tol);
}

CpMap death_cp_part() { return CpMap::from_kraus({death_ce_kraus()}, 2); }

RealMatrix death_q_matrix() {
  RealMatrix q(2, 2);
  q << 0, 0, 1, -1;
  return q;
}

}  // namespace fixtures

}  // namespace qinv
