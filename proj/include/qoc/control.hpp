#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qoc {

// Time-discretized trap displacement, N samples on the dt grid with pinned
// endpoint values (both 0 for the condensate driving problem).
struct ControlVector {
  std::vector<double> samples;  // um
  double dt = 0.0;              // ms
  double bc_start = 0.0;
  double bc_end = 0.0;

  int n() const { return static_cast<int>(samples.size()); }
  double total_time() const { return dt * (n() - 1); }

  static ControlVector zeros(int n, double dt) {
    return ControlVector{std::vector<double>(n, 0.0), dt, 0.0, 0.0};
  }
};

// Sampled envelope S_k in [0,1] with S_0 = S_{N-1} = 0.
struct ShapeFunction {
  std::vector<double> s;

  int n() const { return static_cast<int>(s.size()); }

  // S(t) = sin^2(pi t / T).
  static ShapeFunction sine_squared(int n);
};

enum class BasisKind { CB, CRAB };

// Shaped-sine expansion u = u0 + S * sum_n c_n sin(omega_n t / T).
// CB: omega_n = n*pi exactly. CRAB: omega_n = (n + r_n)*pi with seeded
// r_n uniform in [-0.5, 0.5], drawn sequentially so a larger basis with the
// same seed extends a smaller one.
struct BasisSpec {
  BasisKind kind = BasisKind::CB;
  int size = 0;                 // M
  std::vector<double> omega;    // dimensionless (multiplies t/T)
  std::vector<double> shifts;   // r_n, zero for CB
  std::uint64_t seed = 0;
};

struct Coefficients {
  std::vector<double> c;  // um

  int size() const { return static_cast<int>(c.size()); }
};

BasisSpec make_basis(BasisKind kind, int m, std::uint64_t seed);

// Basis functions sampled on the N-point time grid: f_n(t_k) = sin(omega_n k/(N-1)).
// Row n is contiguous.
struct SampledBasis {
  int n_time = 0;
  int m = 0;
  std::vector<double> f;  // m x n_time

  const double* row(int n) const { return f.data() + static_cast<std::size_t>(n) * n_time; }

  static SampledBasis sample(const BasisSpec& basis, int n_time);
};

ControlVector synthesize(const ControlVector& u0, const ShapeFunction& s,
                         const BasisSpec& basis, const Coefficients& c);

// Seeded random start: c_n uniform in [-A/n, A/n] with A = amplitude_scale,
// synthesized over u0 = 0 with the sine-squared shape.
std::pair<Coefficients, ControlVector> random_initial_control(const BasisSpec& basis,
                                                              std::uint64_t seed,
                                                              double amplitude_scale,
                                                              int n_time, double dt);

// One superiteration restart: fresh CRAB basis from `seed`, coefficients
// zeroed, base set to `previous` so the synthesized control is unchanged.
struct DressedControl {
  ControlVector base;
  BasisSpec basis;
  Coefficients c;
  int superiteration = 0;
};

DressedControl dress(const ControlVector& previous, int m, std::uint64_t seed);

// Deterministic uniform double in [0,1) from a 64-bit generator draw,
// independent of the standard library's distribution implementation.
double uniform01(std::uint64_t raw);

std::string to_string(BasisKind kind);

}  // namespace qoc
