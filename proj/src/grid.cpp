#include "qoc/grid.hpp"

#include <cmath>

#include "qoc/units.hpp"

namespace qoc {

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

SpatialGrid::SpatialGrid(double x_min, double x_max, int n_points)
    : x_min_(x_min), x_max_(x_max), n_(n_points) {
  if (!(x_max > x_min)) throw std::invalid_argument("SpatialGrid: x_max must exceed x_min");
  if (n_points < 8 || !is_power_of_two(n_points))
    throw std::invalid_argument("SpatialGrid: n_points must be a power of two >= 8");
  dx_ = (x_max_ - x_min_) / n_;
  x_.resize(n_);
  k_.resize(n_);
  const double dk = 2.0 * kPi / (x_max_ - x_min_);
  for (int j = 0; j < n_; ++j) {
    x_[j] = x_min_ + j * dx_;
    const int m = (j < n_ / 2) ? j : j - n_;
    k_[j] = dk * m;
  }
}

std::shared_ptr<const SpatialGrid> SpatialGrid::make(double x_min, double x_max, int n_points) {
  return std::shared_ptr<const SpatialGrid>(new SpatialGrid(x_min, x_max, n_points));
}

}  // namespace qoc
