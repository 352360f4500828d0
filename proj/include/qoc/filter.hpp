#pragma once

#include <string>
#include <vector>

#include "qoc/control.hpp"

namespace qoc {

// Causal response kernel h(tau) sampled on the dt grid. The atoms see the
// distorted control v = h*u with the left-endpoint Riemann convention
// v_k = sum_{j<=k} h_j u_{k-j} dt; gradients use the exact transpose of the
// same discrete operator.
struct FilterKernel {
  enum class Kind { Identity, Exponential, FromFile };

  Kind kind = Kind::Identity;
  std::vector<double> h;  // 1/ms
  double dt = 0.0;
  double tau_c = 0.0;     // ms, exponential kernels only

  static FilterKernel identity(double dt);
  // h(tau) = (1/tau_c) exp(-tau/tau_c), truncated once negligible.
  static FilterKernel exponential(double tau_c, double dt, int n_time);
  // Two-column text (tau_ms, h_per_ms), resampled by linear interpolation.
  static FilterKernel from_file(const std::string& path, double dt, int n_time);
};

ControlVector apply_filter(const ControlVector& u, const FilterKernel& kernel);

// Transpose of apply_filter acting on per-sample sensitivities:
// (H^T w)_m = dt * sum_{k>=m} h_{k-m} w_k.
std::vector<double> adjoint_filter(const std::vector<double>& w, const FilterKernel& kernel);

}  // namespace qoc
