#include "critmass/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "critmass/error.hpp"

namespace critmass {

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid::Grid(int dim, int points_per_axis, double half_width)
    : dim_(dim), n_(points_per_axis), half_width_(half_width) {
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorKind::InvalidGrid, "dim must be 1, 2 or 3, got " + std::to_string(dim));
  }
  if (points_per_axis < 8 || !is_power_of_two(points_per_axis)) {
    throw Error(ErrorKind::InvalidGrid,
                "points_per_axis must be a power of two >= 8, got " +
                    std::to_string(points_per_axis));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error(ErrorKind::InvalidGrid, "half_width must be positive and finite");
  }
  spacing_ = 2.0 * half_width_ / n_;
  size_ = 1;
  for (int d = 0; d < dim_; ++d) size_ *= static_cast<std::size_t>(n_);
  cell_volume_ = std::pow(spacing_, dim_);
}

double Grid::wavenumber(int m) const noexcept {
  const int signed_m = (m < n_ / 2) ? m : m - n_;
  return std::numbers::pi / half_width_ * signed_m;
}

double Grid::max_wavenumber() const noexcept { return std::numbers::pi / spacing_; }

std::array<int, Grid::kMaxDim> Grid::unflatten(std::size_t flat) const noexcept {
  std::array<int, kMaxDim> idx{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::array<double, Grid::kMaxDim> Grid::position(std::size_t flat) const noexcept {
  const auto idx = unflatten(flat);
  std::array<double, kMaxDim> x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) x[d] = coordinate(idx[d]);
  return x;
}

std::vector<double> Grid::wavenumber_squared() const {
  std::vector<double> k1(n_);
  for (int m = 0; m < n_; ++m) k1[m] = wavenumber(m) * wavenumber(m);
  std::vector<double> k2(size_, 0.0);
  for (std::size_t i = 0; i < size_; ++i) {
    const auto idx = unflatten(i);
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) s += k1[idx[d]];
    k2[i] = s;
  }
  return k2;
}

}  // namespace critmass
