#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "critmass/grid.hpp"
#include "critmass/spectral.hpp"

namespace critmass {

using Shift = std::array<double, Grid::kMaxDim>;

/// Complex samples of a function on a periodic box, row-major over axes.
class Field {
 public:
  explicit Field(const Grid& grid);
  Field(const Grid& grid, std::vector<cplx> values);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  cplx operator[](std::size_t i) const noexcept { return values_[i]; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx factor);

  bool all_finite() const noexcept;

 private:
  Grid grid_;
  std::vector<cplx> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx factor, Field f);

/// Two components sharing one grid.
struct FieldPair {
  FieldPair(Field first_component, Field second_component);

  const Grid& grid() const noexcept { return first.grid(); }
  Field& operator[](int i) noexcept { return i == 0 ? first : second; }
  const Field& operator[](int i) const noexcept { return i == 0 ? first : second; }

  Field first;
  Field second;
};

/// Samples fn(x) at every node; x has dim() meaningful entries.
template <typename Fn>
Field sample(const Grid& grid, Fn&& fn) {
  Field f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = fn(grid.position(i));
  return f;
}

/// Discrete integral of |f|^2.
double mass(const Field& f);
/// Discrete integral of |grad f|^2 via the spectral multiplier |k|^2.
double kinetic(const Field& f);
/// Discrete integral of |f|^p.
double lp_integral(const Field& f, double p);
double max_abs(const Field& f);
/// Re of the discrete L2 inner product, sum h^N f conj(g).
double real_inner(const Field& f, const Field& g);
/// Complex L2 inner product, sum h^N f conj(g).
cplx inner(const Field& f, const Field& g);
/// Complex H1 inner product, int f conj(g) + grad f . conj(grad g).
cplx h1_inner(const Field& f, const Field& g);
double h1_norm(const Field& f);

/// Spectral Laplacian of f.
Field laplacian(const Field& f);
/// Solves (shift - Laplacian) u = f in Fourier space; shift must be positive.
Field apply_shifted_inverse_laplacian(const Field& f, double shift);

/// Largest |f| on the outermost layer of nodes relative to max |f|.
double boundary_amplitude(const Field& f);
/// Fraction of spectral power with some |k_d| above `fraction` * k_max.
double spectral_tail_fraction(const Field& f, double fraction = 2.0 / 3.0);
/// Center of |f|^2 via circular means per axis (periodic-safe).
Shift periodic_center(const Field& f);
/// Minimal-image displacement between two points of the box.
Shift periodic_difference(const Grid& grid, const Shift& a, const Shift& b);

struct RescaleTolerance {
  /// Relative amplitude allowed where the rescaled profile leaves the box.
  double amplitude = 1e-6;
  /// Fraction of spectral power allowed beyond the resolvable band.
  double spectral = 1e-12;
};

/// t^{N/2} f(t x) on the same grid by band-limited interpolation.
Field rescale_conformal(const Field& f, double t, const RescaleTolerance& tol = {});
/// t^{N/2} f(t x) sampled on `target`; points outside f's box read as zero.
Field resample(const Field& f, const Grid& target, double t = 1.0,
               const RescaleTolerance& tol = {});

/// Nonnegative rearrangement of |f| whose superlevel sets are centered balls.
Field symmetric_decreasing_rearrangement(const Field& f);

/// f(x - shift) via Fourier phase multipliers.
Field translate(const Field& f, const Shift& shift);
/// Returns y maximizing |<f, g(. - y)>|, so f ~ g(. - y) when f is a shifted g.
Shift best_translation_alignment(const Field& f, const Field& g);

/// Random complex field with Fourier support in |k_d| <= band * k_max, times a
/// Gaussian window of width `window` * half_width so it decays inside the box.
Field random_band_limited(const Grid& grid, std::uint64_t seed, double band = 0.125,
                          double window = 0.2);

}  // namespace critmass
