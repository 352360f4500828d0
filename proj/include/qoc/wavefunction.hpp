#pragma once

#include <complex>
#include <vector>

#include "qoc/grid.hpp"

namespace qoc {

using cplx = std::complex<double>;

// Complex amplitudes on a SpatialGrid. Propagation-facing states carry unit
// L2 norm (sum |a_j|^2 dx = 1); adjoint states reuse the type without that
// invariant.
struct Wavefunction {
  std::vector<cplx> amp;
  GridPtr grid;

  int n() const { return static_cast<int>(amp.size()); }
};

double norm(const Wavefunction& psi);
void normalize(Wavefunction& psi);

// <a|b> = dx * sum conj(a_j) b_j. Throws std::invalid_argument on grid mismatch.
cplx overlap(const Wavefunction& a, const Wavefunction& b);

// F = |<a|b>|^2.
double fidelity(const Wavefunction& a, const Wavefunction& b);

// <x> = dx * sum x_j |a_j|^2 (for unit-norm states).
double centroid(const Wavefunction& psi);

// Projection onto the odd-parity subspace under the periodic mirror
// j -> (n - j) mod n (x = 0 sits at j = n/2 for a symmetric grid).
void project_odd(Wavefunction& psi);

// Largest |amp| over the outermost `margin` points on each side.
double edge_density(const Wavefunction& psi, int margin = 3);

}  // namespace qoc
