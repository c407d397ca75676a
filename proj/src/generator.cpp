#include "qinv/generator.hpp"

#include <random>
#include <sstream>

#include "qinv/random.hpp"

namespace qinv {

namespace {

Matrix entangled_projector_complement(Eigen::Index n) {
  Vector omega = vec(identity(n));
  return Matrix::Identity(n * n, n * n) - (omega * omega.adjoint()) / double(n);
}

/// Superoperator of b -> (b k + k b)/2.
Matrix half_anticommutator_superop(const Matrix& k, Eigen::Index n) {
  return 0.5 * (kron(k.transpose(), identity(n)) + kron(identity(n), k));
}

/// Least-squares beta with r_superop = kron(beta^T, I) + kron(I, beta*).
/// The minimum-norm solution lands in the gauge with purely real trace.
Matrix beta_from_residual(const Matrix& r_superop, Eigen::Index n) {
  const Eigen::Index nn = n * n;
  RealMatrix a(2 * nn * nn, 2 * nn);
  RealVector rhs(2 * nn * nn);
  Vector target = vec(r_superop);
  rhs.head(nn * nn) = target.real();
  rhs.tail(nn * nn) = target.imag();
  Matrix id = identity(n);
  Eigen::Index col = 0;
  for (Eigen::Index q = 0; q < n; ++q)
    for (Eigen::Index p = 0; p < n; ++p) {
      Matrix e = Matrix::Zero(n, n);
      e(p, q) = 1.0;
      Matrix right = kron(e.transpose(), id);   // b e_pq
      Matrix left = kron(id, Matrix(e.adjoint()));  // e_pq* b
      Vector re_col = vec(Matrix(right + left));
      Vector im_col = vec(Matrix(Complex(0, 1) * (right - left)));
      a.block(0, col, nn * nn, 1) = re_col.real();
      a.block(nn * nn, col, nn * nn, 1) = re_col.imag();
      a.block(0, col + 1, nn * nn, 1) = im_col.real();
      a.block(nn * nn, col + 1, nn * nn, 1) = im_col.imag();
      col += 2;
    }
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
  RealVector theta = cod.solve(rhs);
  Matrix beta = Matrix::Zero(n, n);
  col = 0;
  for (Eigen::Index q = 0; q < n; ++q)
    for (Eigen::Index p = 0; p < n; ++p) {
      beta(p, q) = Complex(theta(col), theta(col + 1));
      col += 2;
    }
  return beta;
}

}  // namespace

CcpGenerator::CcpGenerator(Matrix superop, Eigen::Index n, const Tolerance& tol)
    : n_(n), superop_(std::move(superop)), choi_(choi_from_superop(superop_, n)) {
  if (!tol.zero(hermitian_defect(choi_), choi_.norm()))
    throw PreconditionError("CcpGenerator: superoperator is not Hermiticity-preserving");
}

CcpGenerator CcpGenerator::zero(Eigen::Index n, const Tolerance& tol) {
  return CcpGenerator(Matrix::Zero(n * n, n * n), n, tol);
}

CcpGenerator CcpGenerator::from_cp_map(const CpMap& t, const Tolerance& tol) {
  return CcpGenerator(t.superop(), t.dim(), tol);
}

bool is_ccp(const CcpGenerator& g, const Tolerance& tol) {
  const Eigen::Index n = g.dim();
  Matrix p = entangled_projector_complement(n);
  Matrix d = hermitize(p * g.choi() * p);
  return is_psd(d, tol);
}

bool ccp_bruteforce_oracle(const CcpGenerator& g, int trials, std::uint64_t seed,
                           const Tolerance& tol) {
  const Eigen::Index n = g.dim();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick_k(1, n * n);
  for (int trial = 0; trial < trials; ++trial) {
    const Eigen::Index k = pick_k(rng);
    std::vector<Matrix> a(k), b(k);
    for (Eigen::Index i = 0; i < k; ++i) a[i] = randn_complex(n, n, rng);
    for (Eigen::Index i = 0; i < k; ++i) b[i] = randn_complex(n, n, rng);

    // Orthogonal projection of (b_i) onto the affine constraint
    // sum_i a_i b_i = 0: with M = sum a_i a_i* and R = sum a_i b_i, subtract
    // a_i* M^+ R from each b_i.
    Matrix m = Matrix::Zero(n, n);
    Matrix r = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < k; ++i) {
      m += a[i] * a[i].adjoint();
      r += a[i] * b[i];
    }
    Matrix y = lstsq_min_norm(m, r).x;
    for (Eigen::Index i = 0; i < k; ++i) b[i] -= a[i].adjoint() * y;

    Matrix form = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < k; ++i) {
      form += b[i].adjoint() * g.apply(a[i].adjoint() * a[i]) * b[i];
      for (Eigen::Index j = i + 1; j < k; ++j) {
        Matrix term = b[i].adjoint() * g.apply(a[i].adjoint() * a[j]) * b[j];
        form += term + term.adjoint();
      }
    }
    Vector state = randn_complex(n, 1, rng);
    state.normalize();
    const double value = (state.adjoint() * form * state)(0, 0).real();
    if (value < -tol.bound(form.norm())) return false;
  }
  return true;
}

bool is_markov_generator(const CcpGenerator& g, const Tolerance& tol) {
  if (!is_ccp(g, tol)) return false;
  return tol.zero(g.apply(identity(g.dim())).norm(), g.superop().norm());
}

LindbladDecomposition lindblad_decompose(const CcpGenerator& g, const Tolerance& tol) {
  const Eigen::Index n = g.dim();
  Matrix k_one = hermitize(g.apply(identity(n)));
  Matrix s = g.superop();
  Matrix beta_shift = Matrix::Zero(n, n);
  if (!tol.zero(k_one.norm(), s.norm())) {
    beta_shift = 0.5 * k_one;
    s -= 2.0 * half_anticommutator_superop(beta_shift, n);
  }

  Matrix choi = choi_from_superop(s, n);
  Matrix p = entangled_projector_complement(n);
  Matrix d = hermitize(p * choi * p);
  const auto eig = eig_hermitian(d, tol);
  const double max_eig = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0;
  const double min_eig = eig.values.size() ? eig.values.minCoeff() : 0.0;
  if (min_eig < -tol.bound(std::max(max_eig, choi.norm()))) {
    std::ostringstream msg;
    msg << "lindblad_decompose: projected Choi matrix is not PSD, min eigenvalue " << min_eig;
    throw NotConditionallyCompletelyPositive(msg.str(), min_eig);
  }

  std::vector<Matrix> kraus;
  const double rank_thr = tol.bound(max_eig);
  for (Eigen::Index i = eig.values.size() - 1; i >= 0; --i) {
    if (eig.values(i) <= rank_thr) break;
    Matrix l = unvec(std::sqrt(eig.values(i)) * eig.vectors.col(i), n, n).adjoint();
    // Eigenvectors of the projected Choi are orthogonal to vec(identity),
    // so these operators are traceless.
    Eigen::Index bi = 0, bj = 0;
    l.cwiseAbs().maxCoeff(&bi, &bj);
    Complex z = l(bi, bj);
    if (std::abs(z) > 0) l *= std::conj(z) / std::abs(z);
    kraus.push_back(std::move(l));
  }

  // What is left over the CP part is b beta + beta* b with
  // beta = -1/2 sum L*L + i h; only its imaginary part is new information.
  Matrix residual = s - superop_from_kraus(kraus, n);
  Matrix beta = beta_from_residual(residual, n);
  Matrix h = hermitize((beta - beta.adjoint()) / Complex(0, 2));
  h -= (h.trace() / double(n)) * identity(n);

  LindbladForm form{h, kraus};
  Matrix check = assemble_lindblad(form, tol).superop();
  if ((check - s).norm() > 1e3 * tol.bound(std::max(1.0, s.norm())))
    throw NumericalFault("lindblad_decompose: reassembly defect beyond tolerance");
  return {std::move(form), beta_shift};
}

CcpGenerator assemble_lindblad(const LindbladForm& f, const Tolerance& tol) {
  const Eigen::Index n = f.h.rows();
  if (f.h.cols() != n) throw PreconditionError("assemble_lindblad: h not square");
  for (const Matrix& l : f.kraus)
    if (l.rows() != n || l.cols() != n)
      throw PreconditionError("assemble_lindblad: operator shape mismatch");
  Matrix s = superop_from_kraus(f.kraus, n);
  Matrix k = Matrix::Zero(n, n);
  for (const Matrix& l : f.kraus) k += l.adjoint() * l;
  s -= half_anticommutator_superop(k, n);
  // i[b, h] = i(b h - h b)
  s += Complex(0, 1) * (kron(f.h.transpose(), identity(n)) - kron(identity(n), f.h));
  return CcpGenerator(std::move(s), n, tol);
}

CcpGenerator assemble_ce(const CeForm& ce, const Tolerance& tol) {
  const Eigen::Index n = ce.cp_part.dim();
  if (ce.beta.rows() != n || ce.beta.cols() != n)
    throw PreconditionError("assemble_ce: beta shape mismatch");
  Matrix s = ce.cp_part.superop();
  s += kron(ce.beta.transpose(), identity(n));
  s += kron(identity(n), Matrix(ce.beta.adjoint()));
  return CcpGenerator(std::move(s), n, tol);
}

CeForm ce_from_lindblad(const LindbladForm& f, const Tolerance&) {
  const Eigen::Index n = f.h.rows();
  Matrix k = Matrix::Zero(n, n);
  for (const Matrix& l : f.kraus) k += l.adjoint() * l;
  Matrix beta = -0.5 * k + Complex(0, 1) * f.h;
  return CeForm{CpMap::from_kraus(f.kraus, n), std::move(beta)};
}

CcpGnsGram gns_gram(const CcpGenerator& g, const Tolerance& tol) {
  const Eigen::Index n = g.dim();
  const Eigen::Index nn = n * n;

  // Kernel of the multiplication map E_pq (x) E_rs -> delta_qr E_ps on
  // B (x) B; tensor index t = (p n + q) n^2 + (r n + s).
  Matrix mul = Matrix::Zero(nn, nn * nn);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q)
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index s_ = 0; s_ < n; ++s_)
          if (q == r) mul(p * n + s_, (p * n + q) * nn + (r * n + s_)) = 1.0;
  Matrix kernel = nullspace(mul, tol);

  // <E_pq (x) E_rs, E_p'q' (x) E_r's'> = delta_pp' delta_ss' L(E_qq')(r, r')/n.
  std::vector<std::vector<Matrix>> lhat(n, std::vector<Matrix>(n));
  for (Eigen::Index q = 0; q < n; ++q)
    for (Eigen::Index qp = 0; qp < n; ++qp) {
      Matrix e = Matrix::Zero(n, n);
      e(q, qp) = 1.0;
      lhat[q][qp] = g.apply(e);
    }
  Matrix full = Matrix::Zero(nn * nn, nn * nn);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index s_ = 0; s_ < n; ++s_)
      for (Eigen::Index q = 0; q < n; ++q)
        for (Eigen::Index r = 0; r < n; ++r)
          for (Eigen::Index qp = 0; qp < n; ++qp)
            for (Eigen::Index rp = 0; rp < n; ++rp)
              full((p * n + q) * nn + (r * n + s_), (p * n + qp) * nn + (rp * n + s_)) =
                  lhat[q][qp](r, rp) / double(n);

  CcpGnsGram out;
  out.space_dim = kernel.cols();
  out.gram = hermitize(kernel.adjoint() * full * kernel);
  const auto eig = eig_hermitian(out.gram, tol);
  const double max_eig = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0;
  const double min_eig = eig.values.size() ? eig.values.minCoeff() : 0.0;
  if (min_eig < -tol.bound(max_eig)) {
    std::ostringstream msg;
    msg << "gns_gram: Gram matrix is not PSD, min eigenvalue " << min_eig;
    throw NotConditionallyCompletelyPositive(msg.str(), min_eig);
  }
  out.rank = 0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > tol.bound(max_eig)) ++out.rank;
  return out;
}

CcpAgreementReport ccp_agreement_suite(std::uint64_t seed, int cases, int oracle_trials,
                                       Eigen::Index n, const Tolerance& tol) {
  CcpAgreementReport report;
  report.cases = cases;
  for (int t = 0; t < cases; ++t) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(t + 1)));
    std::uniform_int_distribution<int> pick_m(1, 2);
    LindbladForm form;
    form.h = random_hermitian(n, rng);
    const int m = pick_m(rng);
    for (int i = 0; i < m; ++i) form.kraus.push_back(randn_complex(n, n, rng) / std::sqrt(double(n)));
    Matrix s = assemble_lindblad(form, tol).superop();
    if (t % 2 == 1) {
      // Strong negative dent along a traceless direction: guarantees the
      // projected Choi matrix picks up an eigenvalue well below zero.
      Matrix k = randn_complex(n, n, rng);
      k -= (k.trace() / double(n)) * identity(n);
      const double eta = 2.0 * (1.0 + s.norm()) / k.squaredNorm();
      s -= eta * superop_from_kraus({k}, n);
    }
    CcpGenerator g(s, n, tol);
    const bool fast = is_ccp(g, tol);
    const bool sampled = ccp_bruteforce_oracle(g, oracle_trials, seed + std::uint64_t(t), tol);
    if (fast != sampled) {
      ++report.disagreements;
      report.disagreement_indices.push_back(t);
    }
  }
  return report;
}

double derivation_identity_check(const CcpGenerator& g, const LindbladForm& f) {
  const Eigen::Index n = g.dim();
  Matrix l_one = g.apply(identity(n));
  double worst = 0.0;
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) {
      Matrix b = Matrix::Zero(n, n);
      b(p, q) = 1.0;
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index s_ = 0; s_ < n; ++s_) {
          Matrix bp = Matrix::Zero(n, n);
          bp(r, s_) = 1.0;
          Matrix lhs = Matrix::Zero(n, n);
          for (const Matrix& l : f.kraus)
            lhs += Matrix(commutator(b, l)).adjoint() * commutator(bp, l);
          Matrix bstar = b.adjoint();
          Matrix rhs = g.apply(bstar * bp) - g.apply(bstar) * bp - bstar * g.apply(bp) +
                       bstar * l_one * bp;
          worst = std::max(worst, (lhs - rhs).norm());
        }
    }
  return worst;
}

}  // namespace qinv
