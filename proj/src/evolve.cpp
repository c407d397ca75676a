#include "qinv/evolve.hpp"

#include <sstream>

namespace qinv {

CpMap semigroup_at(const CcpGenerator& g, double t, const Tolerance& tol) {
  if (t < 0.0) throw PreconditionError("semigroup_at: negative time");
  Matrix s = expm(t * g.superop());
  try {
    return CpMap::from_superop(s, g.dim(), tol);
  } catch (const NotCompletelyPositive& e) {
    std::ostringstream msg;
    msg << "semigroup_at: e^{tL} failed the CP assertion at t = " << t << " (" << e.what() << ")";
    throw NumericalFault(msg.str());
  }
}

SemigroupTrajectory trajectory(const CcpGenerator& g, const std::vector<double>& grid,
                               const Tolerance& tol) {
  SemigroupTrajectory out;
  out.times = grid;
  out.maps.reserve(grid.size());
  for (double t : grid) out.maps.push_back(semigroup_at(g, t, tol));
  return out;
}

std::vector<double> invariance_over_time(const CcpGenerator& g, const CommutativeSubalgebra& c,
                                         const std::vector<double>& grid, const Tolerance& tol) {
  std::vector<double> leakage;
  leakage.reserve(grid.size());
  for (double t : grid) leakage.push_back(invariance_defect_cp(semigroup_at(g, t, tol), c));
  return leakage;
}

std::vector<double> offdiag_decay(const CcpGenerator& g, const CommutativeSubalgebra& c,
                                  const Matrix& rho0, const std::vector<double>& grid,
                                  const Tolerance& tol) {
  const Eigen::Index n = g.dim();
  if (rho0.rows() != n || rho0.cols() != n) throw PreconditionError("offdiag_decay: state shape mismatch");
  if (!is_hermitian(rho0, tol) || !is_psd(hermitize(rho0), tol) ||
      !tol.zero(rho0.trace().real() - 1.0, 1.0) || !tol.zero(rho0.trace().imag(), 1.0))
    throw PreconditionError("offdiag_decay: rho0 is not a density matrix");

  // Dual (Schroedinger) generator: the HS adjoint of the superoperator.
  Matrix dual_superop = g.superop().adjoint();
  const Matrix& u = c.diagonalizer();
  std::vector<double> curve;
  curve.reserve(grid.size());
  for (double t : grid) {
    if (t < 0.0) throw PreconditionError("offdiag_decay: negative time");
    Matrix rho_t = unvec(expm(t * dual_superop) * vec(rho0), n, n);
    Matrix in_basis = u.adjoint() * rho_t * u;
    in_basis.diagonal().setZero();
    curve.push_back(in_basis.norm());
  }
  return curve;
}

}  // namespace qinv
