#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

namespace qoc {

// Uniform periodic spatial grid for spectral derivatives.
// x_j = x_min + j*dx, j = 0..n-1; the point x_max itself is not stored
// (it is identified with x_min under periodicity).
class SpatialGrid {
 public:
  static std::shared_ptr<const SpatialGrid> make(double x_min, double x_max, int n_points);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  int n() const { return n_; }
  double dx() const { return dx_; }
  double length() const { return x_max_ - x_min_; }

  const std::vector<double>& x() const { return x_; }
  // FFT-ordered angular wavenumbers: k_j = 2*pi*j/L for j < n/2, negative branch after.
  const std::vector<double>& k() const { return k_; }

  bool same_as(const SpatialGrid& other) const {
    return n_ == other.n_ && x_min_ == other.x_min_ && x_max_ == other.x_max_;
  }

 private:
  SpatialGrid(double x_min, double x_max, int n_points);

  double x_min_, x_max_, dx_;
  int n_;
  std::vector<double> x_, k_;
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

}  // namespace qoc
