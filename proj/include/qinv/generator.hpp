#pragma once

#include <cstdint>
#include <vector>

#include "qinv/cpmap.hpp"

namespace qinv {

/// A candidate semigroup generator: a Hermiticity-preserving superoperator.
/// Whether it actually generates a CP semigroup is decided by is_ccp.
class CcpGenerator {
 public:
  CcpGenerator(Matrix superop, Eigen::Index n, const Tolerance& tol);

  static CcpGenerator zero(Eigen::Index n, const Tolerance& tol);
  /// A CP map read as a (non-Markov) generator.
  static CcpGenerator from_cp_map(const CpMap& t, const Tolerance& tol);

  Eigen::Index dim() const { return n_; }
  const Matrix& superop() const { return superop_; }
  const Matrix& choi() const { return choi_; }
  Matrix apply(const Matrix& b) const { return apply_superop(superop_, b); }

 private:
  Eigen::Index n_;
  Matrix superop_;
  Matrix choi_;
};

inline Matrix choi_of(const CcpGenerator& g) { return g.choi(); }

/// Lindblad data (h, {L_i}) assembling to
///   L(b) = i[b, h] + sum_i (L_i* b L_i - (b L_i*L_i + L_i*L_i b)/2).
/// Canonical (decomposition) outputs use the trace-zero gauge: tr h = 0 and
/// tr L_i = 0; assembly accepts any data of consistent shape.
struct LindbladForm {
  Matrix h;
  std::vector<Matrix> kraus;
};

/// Christensen-Evans data: L(b) = cp_part(b) + b beta + beta* b.
struct CeForm {
  CpMap cp_part;
  Matrix beta;
};

/// Gram matrix of the GNS semi-inner product <a (x) b, a' (x) b'> =
/// tau(b* L(a* a') b') on the kernel (B (x) B)_0 of the multiplication map,
/// with tau the normalized trace. PSD exactly when the generator is CCP;
/// its rank is the dimension of the quotient module.
struct CcpGnsGram {
  Eigen::Index space_dim = 0;  // dim (B (x) B)_0 = n^4 - n^2
  Matrix gram;
  Eigen::Index rank = 0;
};

/// Projected-Choi CCP test: with omega = vec(identity) and
/// P = I - |omega><omega|/n, the generator is CCP iff P Choi(L) P is PSD.
/// Validated in-repo against ccp_bruteforce_oracle.
bool is_ccp(const CcpGenerator& g, const Tolerance& tol);

/// Samples random tuples (a_1..a_k, b_1..b_k), projects the b_i onto the
/// constraint sum_i a_i b_i = 0, and evaluates the defining quadratic form
/// sum_ij b_i* L(a_i* a_j) b_j against a random state; returns false on any
/// value below -tolerance.
bool ccp_bruteforce_oracle(const CcpGenerator& g, int trials, std::uint64_t seed,
                           const Tolerance& tol);

/// is_ccp and L(1) = 0.
bool is_markov_generator(const CcpGenerator& g, const Tolerance& tol);

struct LindbladDecomposition {
  LindbladForm form;
  /// Zero for Markov input. A non-Markov CCP generator is first shifted by
  /// L'(b) = L(b) - (b K + K b)/2 with K = L(1); the reported shift K/2
  /// restores the original:  L(b) = assemble(form)(b) + b shift + shift* b.
  Matrix beta_shift;
};

/// Canonical Lindblad form of a CCP generator: Kraus operators from the
/// eigendecomposition of the projected Choi matrix (automatically traceless),
/// h in the trace-zero gauge. Throws NotConditionallyCompletelyPositive.
LindbladDecomposition lindblad_decompose(const CcpGenerator& g, const Tolerance& tol);

CcpGenerator assemble_lindblad(const LindbladForm& f, const Tolerance& tol);
CcpGenerator assemble_ce(const CeForm& ce, const Tolerance& tol);

/// beta = -1/2 sum_i L_i* L_i + i h, so that assemble_ce round-trips
/// assemble_lindblad.
CeForm ce_from_lindblad(const LindbladForm& f, const Tolerance& tol);

CcpGnsGram gns_gram(const CcpGenerator& g, const Tolerance& tol);

/// Max over basis pairs (b, b') of the defect of
///   (b z - z b)*(b' z - z b') = L(b*b') - L(b*)b' - b*L(b') + b*L(1)b'
/// where z is the block column of f.kraus. A valid Lindblad form of g gives
/// a residual at tolerance level.
double derivation_identity_check(const CcpGenerator& g, const LindbladForm& f);

/// Agreement suite between the projected-Choi test and the sampling oracle:
/// half the generators are CCP by construction (assembled Lindblad data),
/// half carry a strong negative perturbation that breaks CCP.
struct CcpAgreementReport {
  int cases = 0;
  int disagreements = 0;
  std::vector<int> disagreement_indices;
};

CcpAgreementReport ccp_agreement_suite(std::uint64_t seed, int cases, int oracle_trials,
                                       Eigen::Index n, const Tolerance& tol);

}  // namespace qinv
