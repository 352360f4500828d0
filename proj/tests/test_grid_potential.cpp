#include <doctest.h>

#include "test_util.hpp"

using namespace qoc;

TEST_CASE("grid construction and invariants") {
  auto grid = SpatialGrid::make(-3.0, 3.0, 256);
  CHECK(grid->dx() == doctest::Approx(6.0 / 256).epsilon(1e-15));
  CHECK(grid->x().front() == -3.0);
  CHECK(grid->x()[128] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(grid->k()[0] == 0.0);
  CHECK(grid->k()[1] == doctest::Approx(2.0 * kPi / 6.0));
  CHECK(grid->k()[255] == doctest::Approx(-2.0 * kPi / 6.0));

  CHECK_THROWS(SpatialGrid::make(-3.0, 3.0, 100));  // not a power of two
  CHECK_THROWS(SpatialGrid::make(-3.0, 3.0, 4));    // too small
  CHECK_THROWS(SpatialGrid::make(3.0, -3.0, 64));
}

TEST_CASE("trap potential values") {
  const TrapPotential pot = TrapPotential::atom_chip_default();

  CHECK(pot.value(0.0, 0.0) == 0.0);

  // Even in (x - u): V(x, u) = V(2u - x, u).
  for (double u : {0.0, 0.1, -0.3}) {
    for (double x : {0.05, 0.4, -1.2, 2.0}) {
      CHECK(pot.value(x, u) == doctest::Approx(pot.value(2.0 * u - x, u)).epsilon(1e-12));
    }
  }

  // Hand evaluation at x = r0: 2*pi*(310 + 13.6 - 0.0634) hbar Hz.
  const double expected = two_pi_hz_to_rad_per_ms(310.0 + 13.6 - 0.0634);
  CHECK(pot.value(pot.r0, 0.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dV/du matches finite differences") {
  const TrapPotential pot = TrapPotential::atom_chip_default();
  const double eps = 1e-7;
  for (double x : {-1.0, -0.2, 0.0, 0.3, 1.7}) {
    for (double u : {-0.2, 0.0, 0.15}) {
      const double fd = (pot.value(x, u + eps) - pot.value(x, u - eps)) / (2.0 * eps);
      CHECK(pot.du(x, u) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("potential scaling applies to all coefficients") {
  const TrapPotential pot = TrapPotential::atom_chip_default();
  const TrapPotential s = pot.scaled(1.07);
  CHECK(s.p2 == doctest::Approx(1.07 * pot.p2));
  CHECK(s.p4 == doctest::Approx(1.07 * pot.p4));
  CHECK(s.p6 == doctest::Approx(1.07 * pot.p6));
  CHECK(s.r0 == pot.r0);
  CHECK(s.value(0.5, 0.1) == doctest::Approx(1.07 * pot.value(0.5, 0.1)).epsilon(1e-14));
}

TEST_CASE("unit conversions") {
  // 87Rb: 1.4432e-25 kg in hbar*ms/um^2.
  CHECK(rb87_mass() == doctest::Approx(1.3685).epsilon(1e-3));
  // beta = 1830 hbar Hz um -> 1.83 rad/ms um (no 2pi in the quoted value).
  CHECK(hbar_hz_to_rad_per_ms(1830.0) == doctest::Approx(1.83).epsilon(1e-15));
  CHECK(two_pi_hz_to_rad_per_ms(310.0) == doctest::Approx(2.0 * kPi * 0.310).epsilon(1e-15));
}

TEST_CASE("wavefunction basics") {
  auto grid = SpatialGrid::make(-3.0, 3.0, 64);
  Wavefunction psi = test::random_state(grid, 7);
  CHECK(norm(psi) == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("fidelity properties") {
    CHECK(fidelity(psi, psi) == doctest::Approx(1.0).epsilon(1e-12));

    Wavefunction phased = psi;
    for (auto& a : phased.amp) a *= std::polar(1.0, 0.8372);
    CHECK(fidelity(psi, phased) == doctest::Approx(1.0).epsilon(1e-12));

    const double omega = test::harmonic_omega(test::harmonic_pot(), rb87_mass());
    Wavefunction even = test::gaussian_ground(grid, rb87_mass(), omega);
    Wavefunction odd = test::hermite_first(grid, rb87_mass(), omega);
    CHECK(fidelity(even, odd) < 1e-12);
  }

  SUBCASE("grid mismatch throws") {
    auto other = SpatialGrid::make(-3.0, 3.0, 32);
    Wavefunction small = test::random_state(other, 3);
    CHECK_THROWS_AS((void)overlap(psi, small), std::invalid_argument);
  }

  SUBCASE("odd projection") {
    project_odd(psi);
    const int n = psi.n();
    for (int j = 1; j < n; ++j) {
      CHECK(std::abs(psi.amp[j] + psi.amp[(n - j) % n]) < 1e-14);
    }
  }
}
