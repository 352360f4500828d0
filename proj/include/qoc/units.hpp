#pragma once

#include <numbers>

namespace qoc {

// Working unit system: hbar = 1, time in ms, length in um.
// Energies are therefore angular frequencies in rad/ms; masses carry
// units of hbar*ms/um^2.
inline constexpr double kPi = std::numbers::pi;

inline constexpr double kHbarSI = 1.054571817e-34;  // J s
inline constexpr double kRb87MassKg = 1.4432e-25;   // kg

// kg -> hbar*ms/um^2:  (m/hbar) [s/m^2] * 1e-9
inline constexpr double mass_from_kg(double kg) { return kg / kHbarSI * 1e-9; }

inline constexpr double rb87_mass() { return mass_from_kg(kRb87MassKg); }

// Energy quoted as "2pi hbar f Hz" (f a plain cycle frequency) -> rad/ms.
inline constexpr double two_pi_hz_to_rad_per_ms(double f_hz) {
  return 2.0 * kPi * f_hz * 1e-3;
}

// Energy quoted as "hbar w Hz" (w already angular, no 2pi) -> rad/ms.
inline constexpr double hbar_hz_to_rad_per_ms(double w_hz) { return w_hz * 1e-3; }

struct UnitSystem {
  double mass = rb87_mass();  // hbar*ms/um^2
};

}  // namespace qoc
