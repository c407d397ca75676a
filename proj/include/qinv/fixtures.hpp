#pragma once

#include "qinv/generator.hpp"
#include "qinv/invariance.hpp"

namespace qinv::fixtures {

/// Worked example on M2 with the diagonal subalgebra: a Markov generator
/// whose Christensen-Evans CP part does not leave the diagonal algebra
/// invariant while the full generator restricts to the classical two-state
/// death process.

/// Kraus operator of the Christensen-Evans presentation, [[1,1],[0,1]].
Matrix death_ce_kraus();

/// beta of that presentation, -[[0,1],[0,0]].
Matrix death_ce_beta();

/// Hamiltonian of the Markov normalization, (1/2i) [[0,-1],[1,0]].
Matrix death_hamiltonian();

/// Canonical (trace-zero gauge) Kraus operator, [[0,1],[0,0]].
Matrix death_canonical_kraus();

/// The full Markov generator.
CcpGenerator death_generator(const Tolerance& tol);

/// The CP part alone (not invariant on the diagonal algebra).
CpMap death_cp_part();

/// Q-matrix of the restricted classical dynamics, [[0,0],[1,-1]].
RealMatrix death_q_matrix();

}  // namespace qinv::fixtures
