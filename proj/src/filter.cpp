#include "qoc/filter.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qoc {

FilterKernel FilterKernel::identity(double dt) {
  FilterKernel k;
  k.kind = Kind::Identity;
  k.dt = dt;
  k.h = {1.0 / dt};
  return k;
}

FilterKernel FilterKernel::exponential(double tau_c, double dt, int n_time) {
  if (!(tau_c > 0.0)) throw std::invalid_argument("FilterKernel: tau_c must be positive");
  FilterKernel k;
  k.kind = Kind::Exponential;
  k.dt = dt;
  k.tau_c = tau_c;
  const int len = std::min<long>(n_time, static_cast<long>(std::ceil(16.0 * tau_c / dt)) + 1);
  k.h.resize(len);
  for (int j = 0; j < len; ++j) k.h[j] = std::exp(-j * dt / tau_c) / tau_c;
  return k;
}

FilterKernel FilterKernel::from_file(const std::string& path, double dt, int n_time) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("FilterKernel: cannot open " + path);
  std::vector<double> tau, val;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double t, v;
    if (!(ss >> t)) continue;  // blank/comment line
    if (!(ss >> v))
      throw std::runtime_error("FilterKernel: " + path + ":" + std::to_string(lineno) +
                               ": expected two columns");
    if (!std::isfinite(t) || !std::isfinite(v))
      throw std::runtime_error("FilterKernel: " + path + ":" + std::to_string(lineno) +
                               ": non-finite value");
    if (!tau.empty() && t <= tau.back())
      throw std::runtime_error("FilterKernel: " + path + ":" + std::to_string(lineno) +
                               ": tau must be strictly increasing");
    tau.push_back(t);
    val.push_back(v);
  }
  if (tau.size() < 2) throw std::runtime_error("FilterKernel: " + path + ": need >= 2 samples");
  if (tau.front() > 0.0) {
    tau.insert(tau.begin(), 0.0);
    val.insert(val.begin(), val.front());
  }

  FilterKernel k;
  k.kind = Kind::FromFile;
  k.dt = dt;
  const int len = std::min<long>(n_time, static_cast<long>(std::floor(tau.back() / dt)) + 1);
  k.h.resize(len);
  std::size_t seg = 0;
  for (int j = 0; j < len; ++j) {
    const double t = j * dt;
    while (seg + 2 < tau.size() && tau[seg + 1] < t) ++seg;
    const double w = (t - tau[seg]) / (tau[seg + 1] - tau[seg]);
    k.h[j] = (1.0 - w) * val[seg] + w * val[seg + 1];
  }
  return k;
}

ControlVector apply_filter(const ControlVector& u, const FilterKernel& kernel) {
  if (kernel.dt != u.dt) throw std::invalid_argument("apply_filter: dt mismatch");
  const int n = u.n();
  const int klen = static_cast<int>(kernel.h.size());
  ControlVector v = u;
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    const int jmax = std::min(k, klen - 1);
    for (int j = 0; j <= jmax; ++j) acc += kernel.h[j] * u.samples[k - j];
    v.samples[k] = acc * u.dt;
  }
  v.bc_start = v.samples.front();
  v.bc_end = v.samples.back();
  return v;
}

std::vector<double> adjoint_filter(const std::vector<double>& w, const FilterKernel& kernel) {
  const int n = static_cast<int>(w.size());
  const int klen = static_cast<int>(kernel.h.size());
  std::vector<double> out(n, 0.0);
  for (int m = 0; m < n; ++m) {
    double acc = 0.0;
    const int jmax = std::min(n - 1 - m, klen - 1);
    for (int j = 0; j <= jmax; ++j) acc += kernel.h[j] * w[m + j];
    out[m] = acc * kernel.dt;
  }
  return out;
}

}  // namespace qoc
