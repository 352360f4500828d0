#include <doctest.h>

#include "test_util.hpp"

using namespace qoc;

namespace {

// Ehrenfest oracle for the piecewise-constant driven harmonic trap:
// m zdd = -2 p2 (z - u_k) on each slice, integrated with fine RK4 substeps.
double classical_centroid(const ControlVector& u, double p2, double mass, double z0) {
  double z = z0, v = 0.0;
  const int sub = 64;
  const double h = u.dt / sub;
  auto acc = [&](double zz, double uk) { return -2.0 * p2 * (zz - uk) / mass; };
  for (int k = 0; k + 1 < u.n(); ++k) {
    const double uk = u.samples[k];
    for (int s = 0; s < sub; ++s) {
      const double k1z = v, k1v = acc(z, uk);
      const double k2z = v + 0.5 * h * k1v, k2v = acc(z + 0.5 * h * k1z, uk);
      const double k3z = v + 0.5 * h * k2v, k3v = acc(z + 0.5 * h * k2z, uk);
      const double k4z = v + h * k3v, k4v = acc(z + h * k3z, uk);
      z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
  }
  return z;
}

}  // namespace

TEST_CASE("free-particle plane wave is spectrally exact") {
  auto grid = SpatialGrid::make(-3.0, 3.0, 64);
  TrapPotential none{0.0, 0.0, 0.0, 0.172};
  const GpeParams params = GpeParams::from_steps(0.0, 0.01, 10);
  SplitStepPropagator prop(grid, none, params, rb87_mass());

  const double k = grid->k()[5];
  Wavefunction psi;
  psi.grid = grid;
  psi.amp.resize(grid->n());
  for (int j = 0; j < grid->n(); ++j) psi.amp[j] = std::polar(1.0, k * grid->x()[j]);
  normalize(psi);

  Wavefunction expected = psi;
  const cplx phase = std::polar(1.0, -k * k / (2.0 * rb87_mass()) * params.dt);
  for (auto& a : expected.amp) a *= phase;

  prop.step_forward(psi.amp, 0.0);
  for (int j = 0; j < grid->n(); ++j) CHECK(std::abs(psi.amp[j] - expected.amp[j]) < 1e-13);
}

TEST_CASE("split step is unitary") {
  auto grid = SpatialGrid::make(-3.0, 3.0, 128);
  const GpeParams params = GpeParams::from_steps(1.83, 1.09, 300);
  SplitStepPropagator prop(grid, TrapPotential::atom_chip_default(), params, rb87_mass());

  Wavefunction psi = test::random_state(grid, 11);
  for (int k = 0; k < 50; ++k) {
    const double before = norm(psi);
    prop.step_forward(psi.amp, 0.05 * std::sin(0.1 * k));
    CHECK(std::abs(norm(psi) - before) < 1e-12);
  }
}

TEST_CASE("N=1 control leaves the state untouched") {
  auto grid = SpatialGrid::make(-3.0, 3.0, 64);
  const GpeParams params{1.83, 0.01, 1, 0.0};
  SplitStepPropagator prop(grid, TrapPotential::atom_chip_default(), params, rb87_mass());
  Wavefunction psi = test::random_state(grid, 3);
  const Wavefunction out = prop.propagate(psi, ControlVector::zeros(1, 0.01));
  for (int j = 0; j < psi.n(); ++j) CHECK(psi.amp[j] == out.amp[j]);
}

TEST_CASE("displaced harmonic ground state follows d*cos(wt)") {
  auto grid = SpatialGrid::make(-3.0, 3.0, 256);
  const TrapPotential pot = test::harmonic_pot();
  const double mass = rb87_mass();
  const double omega = test::harmonic_omega(pot, mass);
  const double d = 0.1;

  const double quarter = 0.25 * 2.0 * kPi / omega;
  const GpeParams params = GpeParams::from_dt(0.0, quarter, 1e-4);
  SplitStepPropagator prop(grid, pot, params, mass);

  Wavefunction psi = test::gaussian_ground(grid, mass, omega, d);
  const Wavefunction out =
      prop.propagate(psi, ControlVector::zeros(params.n_samples, params.dt));
  const double t_final = (params.n_samples - 1) * params.dt;
  CHECK(std::abs(centroid(out) - d * std::cos(omega * t_final)) < 1e-6 * d);
}

TEST_CASE("driven harmonic centroid matches the classical oracle") {
  auto grid = SpatialGrid::make(-3.0, 3.0, 256);
  const TrapPotential pot = test::harmonic_pot();
  const double mass = rb87_mass();
  const double omega = test::harmonic_omega(pot, mass);

  const GpeParams params = GpeParams::from_steps(0.0, 1.0, 5000);
  SplitStepPropagator prop(grid, pot, params, mass);

  ControlVector u = ControlVector::zeros(params.n_samples, params.dt);
  for (int k = 0; k < u.n(); ++k)
    u.samples[k] = 0.08 * std::sin(kPi * k / (u.n() - 1.0));

  Wavefunction psi = test::gaussian_ground(grid, mass, omega);
  const Wavefunction out = prop.propagate(psi, u);
  const double oracle = classical_centroid(u, pot.p2, mass, 0.0);
  CHECK(std::abs(centroid(out) - oracle) < 1e-5);
}

TEST_CASE("norm is conserved over a full paper-length propagation") {
  const TransferProblem& prob = test::reduced_problem();
  const GpeParams params = GpeParams::from_steps(prob.params.beta, 1.09, 3500);
  SplitStepPropagator prop(prob.grid, prob.pot, params, prob.mass);
  const ControlVector u = test::random_control(params.n_samples, params.dt, 21);
  Trajectory traj;
  const Wavefunction out = prop.propagate(prob.initial, u, &traj);
  CHECK(std::abs(norm(out) - 1.0) < 1e-10);
  for (int k = 0; k < traj.n_samples(); k += 500) {
    Wavefunction snap{traj.psi[k], prob.grid};
    CHECK(std::abs(norm(snap) - 1.0) < 1e-10);
  }
}

TEST_CASE("eigenstate is stationary under zero control") {
  const TransferProblem& prob = test::reduced_problem();
  SplitStepPropagator prop(prob.grid, prob.pot, prob.params, prob.mass);
  const Wavefunction out = prop.propagate(
      prob.initial, ControlVector::zeros(prob.params.n_samples, prob.params.dt));
  CHECK(fidelity(prob.initial, out) >= 1.0 - 1e-6);
}

TEST_CASE("halving dt barely moves the final fidelity") {
  const TransferProblem& prob = test::reduced_problem();
  const ControlVector u1 = test::random_control(3501, 1.09 / 3500, 5);

  ControlVector u2;  // same control, each slice split in two
  u2.dt = u1.dt / 2.0;
  u2.samples.resize(2 * 3500 + 1);
  for (int k = 0; k < 3500; ++k) {
    u2.samples[2 * k] = u1.samples[k];
    u2.samples[2 * k + 1] = u1.samples[k];
  }
  u2.samples.back() = u1.samples.back();

  const GpeParams p1 = GpeParams::from_steps(prob.params.beta, 1.09, 3500);
  const GpeParams p2 = GpeParams::from_steps(prob.params.beta, 1.09, 7000);
  SplitStepPropagator prop1(prob.grid, prob.pot, p1, prob.mass);
  SplitStepPropagator prop2(prob.grid, prob.pot, p2, prob.mass);
  const double f1 = fidelity(prob.target, prop1.propagate(prob.initial, u1));
  const double f2 = fidelity(prob.target, prop2.propagate(prob.initial, u2));
  CHECK(std::abs(f1 - f2) < 1e-7);
}

TEST_CASE("non-finite control fails with the step index") {
  auto grid = SpatialGrid::make(-3.0, 3.0, 64);
  const GpeParams params = GpeParams::from_steps(0.0, 0.1, 10);
  SplitStepPropagator prop(grid, TrapPotential::atom_chip_default(), params, rb87_mass());
  ControlVector u = ControlVector::zeros(params.n_samples, params.dt);
  u.samples[3] = std::numeric_limits<double>::quiet_NaN();
  Wavefunction psi = test::random_state(grid, 1);
  try {
    (void)prop.propagate(psi, u);
    FAIL("expected PropagationError");
  } catch (const PropagationError& e) {
    CHECK(e.step == 3);
  }
}
