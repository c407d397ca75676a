#pragma once

#include <vector>

#include "qinv/invariance.hpp"

namespace qinv {

/// Semigroup snapshots T_t = e^{t L} on an ascending time grid.
struct SemigroupTrajectory {
  std::vector<double> times;
  std::vector<CpMap> maps;
};

/// e^{t L} as a CpMap; the CP property of the result is asserted (a CCP
/// generator must exponentiate to a CP map, anything else is a numerical
/// fault). t must be nonnegative.
CpMap semigroup_at(const CcpGenerator& g, double t, const Tolerance& tol);

SemigroupTrajectory trajectory(const CcpGenerator& g, const std::vector<double>& grid,
                               const Tolerance& tol);

/// Per-time maximal distance of T_t(p) from the span of C over the minimal
/// projections p.
std::vector<double> invariance_over_time(const CcpGenerator& g, const CommutativeSubalgebra& c,
                                         const std::vector<double>& grid, const Tolerance& tol);

/// Frobenius norm of the off-diagonal part of the evolved state in the
/// eigenbasis of C, along the dual (Schroedinger) flow. Diagnostic only.
std::vector<double> offdiag_decay(const CcpGenerator& g, const CommutativeSubalgebra& c,
                                  const Matrix& rho0, const std::vector<double>& grid,
                                  const Tolerance& tol);

}  // namespace qinv
