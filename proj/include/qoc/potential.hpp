#pragma once

#include "qoc/units.hpp"

namespace qoc {

// Polynomial trap V(x,u) = p2 (x-u)^2 + p4 (x-u)^4 + p6 (x-u)^6, displaced
// along x by the control u. Coefficients in rad/ms per um^{2,4,6}.
struct TrapPotential {
  double p2 = 0.0;
  double p4 = 0.0;
  double p6 = 0.0;
  double r0 = 0.0;  // reference length, um

  double value(double x, double u) const {
    const double w2 = (x - u) * (x - u);
    return w2 * (p2 + w2 * (p4 + w2 * p6));
  }

  // dV/du = -(2 p2 w + 4 p4 w^3 + 6 p6 w^5), w = x - u.
  double du(double x, double u) const {
    const double w = x - u;
    const double w2 = w * w;
    return -w * (2.0 * p2 + w2 * (4.0 * p4 + 6.0 * p6 * w2));
  }

  TrapPotential scaled(double alpha_p) const {
    return TrapPotential{alpha_p * p2, alpha_p * p4, alpha_p * p6, r0};
  }

  // Atom-chip trap of the condensate driving problem: coefficients quoted as
  // 2pi*hbar*{310, 13.6, -0.0634} Hz / r0^{2,4,6} with r0 = 172 nm.
  static TrapPotential atom_chip_default() {
    const double r0 = 0.172;  // um
    const double r2 = r0 * r0;
    const double r4 = r2 * r2;
    const double r6 = r4 * r2;
    return TrapPotential{two_pi_hz_to_rad_per_ms(310.0) / r2,
                         two_pi_hz_to_rad_per_ms(13.6) / r4,
                         two_pi_hz_to_rad_per_ms(-0.0634) / r6, r0};
  }
};

}  // namespace qoc
