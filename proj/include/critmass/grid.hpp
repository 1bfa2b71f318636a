#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace critmass {

/// Uniform periodic box [-L, L)^N sampled with `points_per_axis` nodes per axis.
class Grid {
 public:
  static constexpr int kMaxDim = 3;

  Grid(int dim, int points_per_axis, double half_width);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  double half_width() const noexcept { return half_width_; }
  double spacing() const noexcept { return spacing_; }
  /// Total number of nodes, n^N.
  std::size_t size() const noexcept { return size_; }
  /// Quadrature weight h^N of a single node.
  double cell_volume() const noexcept { return cell_volume_; }

  /// Node coordinate along one axis: -L + j h.
  double coordinate(int j) const noexcept { return -half_width_ + j * spacing_; }
  /// Angular wavenumber of FFT bin m (standard ordering, Nyquist bin negative).
  double wavenumber(int m) const noexcept;
  /// Largest resolved wavenumber pi / h.
  double max_wavenumber() const noexcept;

  /// Multi-index of a flat row-major index (unused axes are zero).
  std::array<int, kMaxDim> unflatten(std::size_t flat) const noexcept;
  /// Coordinates of a flat node index.
  std::array<double, kMaxDim> position(std::size_t flat) const noexcept;
  /// |k|^2 for every flat spectral index.
  std::vector<double> wavenumber_squared() const;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_width_ == b.half_width_;
  }

 private:
  int dim_;
  int n_;
  double half_width_;
  double spacing_;
  std::size_t size_;
  double cell_volume_;
};

}  // namespace critmass
