#pragma once

#include <vector>

#include "qinv/dense.hpp"

namespace qinv {

// ---------------------------------------------------------------------------
// Superoperator encodings. A linear map Phi on the n x n matrices is stored
// as the n^2 x n^2 matrix S with S vec(b) = vec(Phi(b)); the Choi matrix is
// sum_ij E_ij (x) Phi(E_ij). Both directions of the Choi/superoperator
// correspondence are one index reshuffle, which is an involution.
// ---------------------------------------------------------------------------

Matrix apply_superop(const Matrix& s, const Matrix& b);

/// Superoperator of the Heisenberg-form map b -> sum_i L_i* b L_i.
Matrix superop_from_kraus(const std::vector<Matrix>& kraus, Eigen::Index n);

Matrix choi_from_superop(const Matrix& s, Eigen::Index n);
Matrix superop_from_choi(const Matrix& choi, Eigen::Index n);

Matrix choi_from_kraus(const std::vector<Matrix>& kraus, Eigen::Index n);

/// Phi(b*) = Phi(b)* on a basis; equivalent to the Choi matrix being
/// Hermitian.
bool is_hermiticity_preserving(const Matrix& s, Eigen::Index n, const Tolerance& tol);

bool is_cp_superop(const Matrix& s, Eigen::Index n, const Tolerance& tol);
bool is_unital_superop(const Matrix& s, Eigen::Index n, const Tolerance& tol);

/// Minimal Heisenberg-form Kraus family from a PSD Choi matrix: eigenpairs
/// above the rank threshold rel_eps * (largest eigenvalue) are kept, each
/// eigenvector is unvec'd into A_i and the returned operators are L_i = A_i*
/// so that Phi(b) = sum_i L_i* b L_i. Phases are fixed by making the
/// largest-modulus entry of each L_i real positive. Throws
/// NotCompletelyPositive (carrying the most negative eigenvalue) otherwise.
std::vector<Matrix> kraus_from_choi(const Matrix& choi, Eigen::Index n, const Tolerance& tol);

/// A completely positive map in Heisenberg form T(b) = sum_i L_i* b L_i,
/// with the Choi matrix and superoperator cached at construction. Immutable.
class CpMap {
 public:
  static CpMap identity_map(Eigen::Index n);
  static CpMap from_kraus(std::vector<Matrix> kraus, Eigen::Index n);
  /// Extracts a minimal Kraus family; throws NotCompletelyPositive if the
  /// Choi matrix is not PSD.
  static CpMap from_superop(const Matrix& s, Eigen::Index n, const Tolerance& tol);

  Eigen::Index dim() const { return n_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }
  const Matrix& superop() const { return superop_; }
  const Matrix& choi() const { return choi_; }

  Matrix apply(const Matrix& b) const;
  bool is_unital(const Tolerance& tol) const;

 private:
  CpMap(std::vector<Matrix> kraus, Eigen::Index n);
  Eigen::Index n_ = 0;
  std::vector<Matrix> kraus_;
  Matrix superop_;
  Matrix choi_;
};

inline Matrix choi_of(const CpMap& t) { return t.choi(); }
inline Matrix choi_of(const Matrix& superop, Eigen::Index n) {
  return choi_from_superop(superop, n);
}

bool is_cp(const CpMap& t, const Tolerance& tol);
bool is_unital(const CpMap& t, const Tolerance& tol);

/// compose(s, t).apply(b) = s.apply(t.apply(b)).
CpMap compose(const CpMap& s, const CpMap& t, const Tolerance& tol);

/// Schroedinger-picture dual: tr(dual(t)(rho) b) = tr(rho t(b)).
CpMap dual(const CpMap& t, const Tolerance& tol);

/// Finite-dimensional GNS data of a CP map: the minimal multiplicity space
/// dimension m = rank(Choi) and the block column xi = sum_i L_i (x) e_i that
/// reproduces the map as T(b) = <xi, b xi> = sum_i L_i* b L_i.
struct GnsData {
  Eigen::Index multiplicity = 0;
  std::vector<Matrix> xi_blocks;
  bool minimal = true;
};

GnsData gns_of(const CpMap& t, const Tolerance& tol);

}  // namespace qinv
