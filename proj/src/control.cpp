#include "qoc/control.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "qoc/units.hpp"

namespace qoc {

double uniform01(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

ShapeFunction ShapeFunction::sine_squared(int n) {
  if (n < 2) throw std::invalid_argument("ShapeFunction: need at least 2 samples");
  ShapeFunction s;
  s.s.resize(n);
  for (int k = 0; k < n; ++k) {
    const double v = std::sin(kPi * k / (n - 1));
    s.s[k] = v * v;
  }
  s.s.front() = 0.0;
  s.s.back() = 0.0;
  return s;
}

BasisSpec make_basis(BasisKind kind, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("make_basis: M must be >= 1");
  BasisSpec b;
  b.kind = kind;
  b.size = m;
  b.seed = seed;
  b.omega.resize(m);
  b.shifts.assign(m, 0.0);
  if (kind == BasisKind::CRAB) {
    std::mt19937_64 rng(seed);
    for (int n = 0; n < m; ++n) b.shifts[n] = uniform01(rng()) - 0.5;
  }
  for (int n = 0; n < m; ++n) b.omega[n] = (n + 1 + b.shifts[n]) * kPi;
  return b;
}

SampledBasis SampledBasis::sample(const BasisSpec& basis, int n_time) {
  SampledBasis sb;
  sb.n_time = n_time;
  sb.m = basis.size;
  sb.f.resize(static_cast<std::size_t>(basis.size) * n_time);
  for (int n = 0; n < basis.size; ++n) {
    double* row = sb.f.data() + static_cast<std::size_t>(n) * n_time;
    const double w = basis.omega[n] / (n_time - 1);
    for (int k = 0; k < n_time; ++k) row[k] = std::sin(w * k);
  }
  return sb;
}

ControlVector synthesize(const ControlVector& u0, const ShapeFunction& s,
                         const BasisSpec& basis, const Coefficients& c) {
  const int n = u0.n();
  if (s.n() != n) throw std::invalid_argument("synthesize: shape length mismatch");
  if (c.size() != basis.size) throw std::invalid_argument("synthesize: coefficient count mismatch");
  ControlVector out = u0;
  const SampledBasis sb = SampledBasis::sample(basis, n);
  for (int m = 0; m < basis.size; ++m) {
    const double* row = sb.row(m);
    const double cm = c.c[m];
    if (cm == 0.0) continue;
    for (int k = 1; k + 1 < n; ++k) out.samples[k] += s.s[k] * cm * row[k];
  }
  out.samples.front() = u0.bc_start;
  out.samples.back() = u0.bc_end;
  return out;
}

std::pair<Coefficients, ControlVector> random_initial_control(const BasisSpec& basis,
                                                              std::uint64_t seed,
                                                              double amplitude_scale,
                                                              int n_time, double dt) {
  Coefficients c;
  c.c.resize(basis.size);
  // Separate stream from the basis shifts so CB and CRAB starts share
  // coefficients for the same seed.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int n = 0; n < basis.size; ++n) {
    const double a = amplitude_scale / (n + 1);
    c.c[n] = a * (2.0 * uniform01(rng()) - 1.0);
  }
  const ControlVector u0 = ControlVector::zeros(n_time, dt);
  ControlVector u = synthesize(u0, ShapeFunction::sine_squared(n_time), basis, c);
  return {std::move(c), std::move(u)};
}

DressedControl dress(const ControlVector& previous, int m, std::uint64_t seed) {
  DressedControl d;
  d.base = previous;
  d.basis = make_basis(BasisKind::CRAB, m, seed);
  d.c.c.assign(m, 0.0);
  return d;
}

std::string to_string(BasisKind kind) { return kind == BasisKind::CB ? "cb" : "crab"; }

}  // namespace qoc
