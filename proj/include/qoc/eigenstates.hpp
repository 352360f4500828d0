#pragma once

#include "qoc/gpe.hpp"

namespace qoc {

struct EigenstateResult {
  Wavefunction state;
  double mu = 0.0;        // chemical potential <psi|H + beta|psi|^2|psi>
  double residual = 0.0;  // ||(H + beta|psi|^2)psi - mu psi||
  long iterations = 0;
};

struct ItpOptions {
  double tol = 1e-9;
  long max_iterations = 100000;
  int check_every = 25;
};

// Imaginary-time propagation with renormalization each step and a shrinking
// step-size schedule (the fixed point of a fixed imaginary step carries an
// O(dtau^2) residual floor, so dtau is reduced whenever the residual stalls).
EigenstateResult ground_state(const GridPtr& grid, const TrapPotential& pot, double beta,
                              double mass, const ItpOptions& opts = {});

// Lowest odd-parity state: same iteration restricted to the odd subspace,
// valid because V(x, u=0) is symmetric.
EigenstateResult first_excited_state(const GridPtr& grid, const TrapPotential& pot,
                                     double beta, double mass, const ItpOptions& opts = {});

}  // namespace qoc
