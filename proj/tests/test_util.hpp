#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qoc/bench.hpp"
#include "qoc/objective.hpp"

namespace qoc::test {

// Paper trap and nonlinearity on a coarse grid (128 points, N = 200): fast
// enough for gradient oracles while keeping the real physics.
inline ProblemConfig reduced_problem_config() {
  ProblemConfig pc;
  pc.n_points = 128;
  pc.n_time_slices = 199;  // N = 200
  return pc;
}

inline const TransferProblem& reduced_problem() {
  static const TransferProblem prob = build_problem(reduced_problem_config(), FilterConfig{});
  return prob;
}

inline const TransferProblem& full_problem() {
  static const TransferProblem prob = build_problem(ProblemConfig{}, FilterConfig{});
  return prob;
}

// Harmonic p2-only trap with beta = 0 (all analytic oracles live here).
inline TrapPotential harmonic_pot() {
  TrapPotential pot = TrapPotential::atom_chip_default();
  pot.p4 = 0.0;
  pot.p6 = 0.0;
  return pot;
}

inline double harmonic_omega(const TrapPotential& pot, double mass) {
  return std::sqrt(2.0 * pot.p2 / mass);  // p2 x^2 = m w^2 x^2 / 2
}

// Analytic oscillator ground state exp(-m w (x-d)^2 / 2), normalized on the grid.
inline Wavefunction gaussian_ground(const GridPtr& grid, double mass, double omega,
                                    double displacement = 0.0) {
  Wavefunction psi;
  psi.grid = grid;
  psi.amp.resize(grid->n());
  for (int j = 0; j < grid->n(); ++j) {
    const double w = grid->x()[j] - displacement;
    psi.amp[j] = std::exp(-0.5 * mass * omega * w * w);
  }
  normalize(psi);
  return psi;
}

inline Wavefunction hermite_first(const GridPtr& grid, double mass, double omega) {
  Wavefunction psi;
  psi.grid = grid;
  psi.amp.resize(grid->n());
  for (int j = 0; j < grid->n(); ++j) {
    const double x = grid->x()[j];
    psi.amp[j] = x * std::exp(-0.5 * mass * omega * x * x);
  }
  normalize(psi);
  return psi;
}

inline Wavefunction random_state(const GridPtr& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Wavefunction psi;
  psi.grid = grid;
  psi.amp.resize(grid->n());
  for (int j = 0; j < grid->n(); ++j) {
    const double x = grid->x()[j];
    const double env = std::exp(-x * x);
    psi.amp[j] = cplx(env * (uniform01(rng()) - 0.5), env * (uniform01(rng()) - 0.5));
  }
  normalize(psi);
  return psi;
}

// Smooth random control with pinned endpoints, synthesized from a seeded
// CRAB draw (the shape every driver starts from).
inline ControlVector random_control(int n_samples, double dt, std::uint64_t seed,
                                    double amplitude = 0.05, int m = 6) {
  const BasisSpec basis = make_basis(BasisKind::CRAB, m, seed);
  return random_initial_control(basis, seed, amplitude, n_samples, dt).second;
}

// Central finite difference of the cost along a direction.
inline double fd_directional(const TransferProblem& prob, const ControlVector& u,
                             const std::vector<double>& du, double eps) {
  EvalCounter evals;
  ControlVector up = u, dn = u;
  for (int k = 0; k < u.n(); ++k) {
    up.samples[k] += eps * du[k];
    dn.samples[k] -= eps * du[k];
  }
  const double jp = cost(prob, up, evals).total;
  const double jm = cost(prob, dn, evals).total;
  return (jp - jm) / (2.0 * eps);
}

inline double h1_inner(const std::vector<double>& a, const std::vector<double>& b, double dt) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) s += (a[i + 1] - a[i]) * (b[i + 1] - b[i]);
  return s / dt;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace qoc::test
