#include "critmass/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "critmass/error.hpp"

namespace critmass {

namespace {

void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) {
    throw Error(ErrorKind::InvalidGrid, "fields live on different grids");
  }
}

// Applies a per-axis linear map (rows: target nodes, cols: source nodes) to
// every axis in turn. Source shape n_s^N, result shape n_t^N.
std::vector<cplx> apply_separable(std::span<const cplx> src, int dim, int n_src, int n_tgt,
                                  const std::vector<double>& weights) {
  std::vector<cplx> cur(src.begin(), src.end());
  // Shape before processing axis d: [n_t]*d + [n_s]*(dim - d).
  for (int d = 0; d < dim; ++d) {
    std::size_t outer = 1;
    for (int e = 0; e < d; ++e) outer *= static_cast<std::size_t>(n_tgt);
    std::size_t inner = 1;
    for (int e = d + 1; e < dim; ++e) inner *= static_cast<std::size_t>(n_src);
    std::vector<cplx> next(outer * static_cast<std::size_t>(n_tgt) * inner, cplx{});
    for (std::size_t o = 0; o < outer; ++o) {
      for (int row = 0; row < n_tgt; ++row) {
        const double* w = &weights[static_cast<std::size_t>(row) * n_src];
        cplx* out = &next[(o * n_tgt + row) * inner];
        for (int col = 0; col < n_src; ++col) {
          const double wc = w[col];
          if (wc == 0.0) continue;
          const cplx* in = &cur[(o * n_src + col) * inner];
          for (std::size_t k = 0; k < inner; ++k) out[k] += wc * in[k];
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

// Band-limited (periodic sinc, symmetric Nyquist) interpolation weights from
// the nodes of `source` to the points scale * x_j of `target`, per axis.
std::vector<double> interpolation_weights(const Grid& source, const Grid& target, double scale) {
  const int ns = source.points_per_axis();
  const int nt = target.points_per_axis();
  const double L = source.half_width();
  const double h = source.spacing();
  std::vector<double> w(static_cast<std::size_t>(nt) * ns, 0.0);
  for (int j = 0; j < nt; ++j) {
    const double y = scale * target.coordinate(j);
    double* row = &w[static_cast<std::size_t>(j) * ns];
    if (y < -L - 1e-12 * L || y >= L) continue;  // outside the source box: reads as zero
    const double pos = (y + L) / h;
    const double nearest = std::round(pos);
    const double frac = pos - nearest;
    const int base = static_cast<int>(nearest);
    if (frac == 0.0) {
      row[base % ns] = 1.0;
      continue;
    }
    // Periodic sinc sin(n b) / (n tan b) with b = pi (pos - m) / n. Writing
    // pos - m = k + frac keeps both factors accurate when frac is tiny.
    const double numer = std::sin(std::numbers::pi * frac);
    for (int m = 0; m < ns; ++m) {
      int k = base - m;
      if (k > ns / 2) k -= ns;
      if (k <= -ns / 2) k += ns;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      row[m] = sign * numer / (ns * std::tan(std::numbers::pi * (k + frac) / ns));
    }
  }
  return w;
}

double max_abs_where(const Field& f, double threshold) {
  const Grid& g = f.grid();
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = g.position(i);
    bool outside = false;
    for (int d = 0; d < g.dim(); ++d) outside |= std::abs(x[d]) >= threshold;
    if (outside) m = std::max(m, std::abs(f[i]));
  }
  return m;
}

}  // namespace

Field::Field(const Grid& grid) : grid_(grid), values_(grid.size(), cplx{}) {}

Field::Field(const Grid& grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::InvalidGrid, "field has " + std::to_string(values_.size()) +
                                            " values, grid expects " +
                                            std::to_string(grid_.size()));
  }
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(cplx factor) {
  for (auto& v : values_) v *= factor;
  return *this;
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx factor, Field f) { return f *= factor; }

FieldPair::FieldPair(Field first_component, Field second_component)
    : first(std::move(first_component)), second(std::move(second_component)) {
  require_same_grid(first, second);
}

double mass(const Field& f) {
  double s = 0.0;
  for (cplx v : f.values()) s += std::norm(v);
  return s * f.grid().cell_volume();
}

double kinetic(const Field& f) {
  const Grid& g = f.grid();
  const auto spec = forward_transform(g, f.values());
  const auto k2 = g.wavenumber_squared();
  double s = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) s += k2[i] * std::norm(spec[i]);
  return s * g.cell_volume() / static_cast<double>(g.size());
}

double lp_integral(const Field& f, double p) {
  double s = 0.0;
  for (cplx v : f.values()) s += std::pow(std::abs(v), p);
  return s * f.grid().cell_volume();
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (cplx v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

cplx inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  cplx s{};
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * std::conj(g[i]);
  return s * f.grid().cell_volume();
}

double real_inner(const Field& f, const Field& g) { return inner(f, g).real(); }

cplx h1_inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  const Grid& grid = f.grid();
  const auto fs = forward_transform(grid, f.values());
  const auto gs = forward_transform(grid, g.values());
  const auto k2 = grid.wavenumber_squared();
  cplx s{};
  for (std::size_t i = 0; i < fs.size(); ++i) s += (1.0 + k2[i]) * fs[i] * std::conj(gs[i]);
  return s * grid.cell_volume() / static_cast<double>(grid.size());
}

double h1_norm(const Field& f) { return std::sqrt(std::max(0.0, h1_inner(f, f).real())); }

Field laplacian(const Field& f) {
  const Grid& g = f.grid();
  auto spec = forward_transform(g, f.values());
  const auto k2 = g.wavenumber_squared();
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= -k2[i];
  inverse_transform_inplace(g, spec);
  return Field(g, std::move(spec));
}

Field apply_shifted_inverse_laplacian(const Field& f, double shift) {
  if (!(shift > 0.0)) throw Error(ErrorKind::InvalidParams, "preconditioner shift must be > 0");
  const Grid& g = f.grid();
  auto spec = forward_transform(g, f.values());
  const auto k2 = g.wavenumber_squared();
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] /= (shift + k2[i]);
  inverse_transform_inplace(g, spec);
  return Field(g, std::move(spec));
}

double boundary_amplitude(const Field& f) {
  const Grid& g = f.grid();
  const double peak = max_abs(f);
  if (peak == 0.0) return 0.0;
  const int last = g.points_per_axis() - 1;
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto idx = g.unflatten(i);
    bool edge = false;
    for (int d = 0; d < g.dim(); ++d) edge |= (idx[d] == 0 || idx[d] == last);
    if (edge) m = std::max(m, std::abs(f[i]));
  }
  return m / peak;
}

double spectral_tail_fraction(const Field& f, double fraction) {
  const Grid& g = f.grid();
  const auto spec = forward_transform(g, f.values());
  const double cutoff = fraction * g.max_wavenumber();
  double total = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double p = std::norm(spec[i]);
    total += p;
    const auto idx = g.unflatten(i);
    bool high = false;
    for (int d = 0; d < g.dim(); ++d) high |= std::abs(g.wavenumber(idx[d])) > cutoff;
    if (high) tail += p;
  }
  return total > 0.0 ? tail / total : 0.0;
}

Shift periodic_center(const Field& f) {
  const Grid& g = f.grid();
  const double L = g.half_width();
  std::array<cplx, Grid::kMaxDim> z{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = std::norm(f[i]);
    if (w == 0.0) continue;
    const auto x = g.position(i);
    for (int d = 0; d < g.dim(); ++d) z[d] += w * std::polar(1.0, std::numbers::pi * x[d] / L);
  }
  Shift c{0.0, 0.0, 0.0};
  for (int d = 0; d < g.dim(); ++d) c[d] = std::arg(z[d]) * L / std::numbers::pi;
  return c;
}

Shift periodic_difference(const Grid& grid, const Shift& a, const Shift& b) {
  const double period = 2.0 * grid.half_width();
  Shift d{0.0, 0.0, 0.0};
  for (int k = 0; k < grid.dim(); ++k) {
    double v = a[k] - b[k];
    v -= period * std::round(v / period);
    d[k] = v;
  }
  return d;
}

Field resample(const Field& f, const Grid& target, double t, const RescaleTolerance& tol) {
  const Grid& src = f.grid();
  if (target.dim() != src.dim()) throw Error(ErrorKind::InvalidGrid, "dimension mismatch");
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::InvalidParams, "rescale factor must be positive");
  }
  const double peak = max_abs(f);
  const double reach = t * target.half_width();  // extent of requested source points
  if (peak > 0.0) {
    if (reach > src.half_width() * (1.0 + 1e-12) &&
        boundary_amplitude(f) > tol.amplitude) {
      throw Error(ErrorKind::DomainEscape,
                  "requested points leave the box while the field is not negligible there");
    }
    if (reach < src.half_width() * (1.0 - 1e-12) &&
        max_abs_where(f, reach) / peak > tol.amplitude) {
      throw Error(ErrorKind::DomainEscape,
                  "rescaled profile no longer fits the target box");
    }
    // Source mode k lands on t k in the target.
    const double band = target.max_wavenumber() / (t * src.max_wavenumber());
    if (band < 1.0 - 1e-12 && spectral_tail_fraction(f, band) > tol.spectral) {
      throw Error(ErrorKind::DomainEscape, "rescaled profile is under-resolved on the target grid");
    }
  }
  const auto weights = interpolation_weights(src, target, t);
  auto out = apply_separable(f.values(), src.dim(), src.points_per_axis(),
                             target.points_per_axis(), weights);
  const double amp = std::pow(t, 0.5 * src.dim());
  for (auto& v : out) v *= amp;
  return Field(target, std::move(out));
}

Field rescale_conformal(const Field& f, double t, const RescaleTolerance& tol) {
  return resample(f, f.grid(), t, tol);
}

Field symmetric_decreasing_rearrangement(const Field& f) {
  const Grid& g = f.grid();
  const int half = g.points_per_axis() / 2;
  std::vector<long long> dist2(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto idx = g.unflatten(i);
    long long s = 0;
    for (int d = 0; d < g.dim(); ++d) {
      const long long off = idx[d] - half;
      s += off * off;
    }
    dist2[i] = s;
  }
  std::vector<std::size_t> order(f.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist2[a] != dist2[b] ? dist2[a] < dist2[b] : a < b;
  });
  std::vector<double> moduli(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) moduli[i] = std::abs(f[i]);
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  Field out(g);
  for (std::size_t r = 0; r < order.size(); ++r) out[order[r]] = moduli[r];
  return out;
}

Field translate(const Field& f, const Shift& shift) {
  const Grid& g = f.grid();
  auto spec = forward_transform(g, f.values());
  const int n = g.points_per_axis();
  std::array<std::vector<cplx>, Grid::kMaxDim> phase;
  for (int d = 0; d < g.dim(); ++d) {
    phase[d].resize(n);
    for (int m = 0; m < n; ++m) phase[d][m] = std::polar(1.0, -g.wavenumber(m) * shift[d]);
  }
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto idx = g.unflatten(i);
    cplx p{1.0, 0.0};
    for (int d = 0; d < g.dim(); ++d) p *= phase[d][idx[d]];
    spec[i] *= p;
  }
  inverse_transform_inplace(g, spec);
  return Field(g, std::move(spec));
}

Shift best_translation_alignment(const Field& f, const Field& g) {
  require_same_grid(f, g);
  const Grid& grid = f.grid();
  const int n = grid.points_per_axis();
  auto fs = forward_transform(grid, f.values());
  const auto gs = forward_transform(grid, g.values());
  for (std::size_t i = 0; i < fs.size(); ++i) fs[i] *= std::conj(gs[i]);
  inverse_transform_inplace(grid, fs);  // fs[s] = sum_x f(x) conj(g(x - s h)) / ...
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double v = std::abs(fs[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const auto idx = grid.unflatten(best);
  std::size_t stride[Grid::kMaxDim] = {1, 1, 1};
  for (int d = grid.dim() - 2; d >= 0; --d) stride[d] = stride[d + 1] * n;
  Shift y{0.0, 0.0, 0.0};
  for (int d = 0; d < grid.dim(); ++d) {
    const int up = (idx[d] + 1) % n;
    const int down = (idx[d] + n - 1) % n;
    const std::size_t base = best - static_cast<std::size_t>(idx[d]) * stride[d];
    const double cm = std::abs(fs[base + static_cast<std::size_t>(down) * stride[d]]);
    const double c0 = best_val;
    const double cp = std::abs(fs[base + static_cast<std::size_t>(up) * stride[d]]);
    const double curvature = cm - 2.0 * c0 + cp;
    double delta = 0.0;
    if (curvature < 0.0) delta = std::clamp(0.5 * (cm - cp) / curvature, -0.5, 0.5);
    const int signed_idx = idx[d] < n / 2 ? idx[d] : idx[d] - n;
    y[d] = (signed_idx + delta) * grid.spacing();
  }
  return y;
}

Field random_band_limited(const Grid& grid, std::uint64_t seed, double band, double window) {
  if (!(band > 0.0 && band <= 1.0) || !(window > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "band must lie in (0, 1] and window must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double kcut = band * grid.max_wavenumber();
  std::vector<cplx> spec(grid.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto idx = grid.unflatten(i);
    bool inside = true;
    for (int d = 0; d < grid.dim(); ++d) inside = inside && std::abs(grid.wavenumber(idx[d])) <= kcut;
    const double re = normal(rng);
    const double im = normal(rng);
    if (inside) spec[i] = {re, im};
  }
  inverse_transform_inplace(grid, spec);
  const double w = window * grid.half_width();
  Field f(grid, std::move(spec));
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = grid.position(i);
    double r2 = 0.0;
    for (int d = 0; d < grid.dim(); ++d) r2 += x[d] * x[d];
    f[i] *= std::exp(-0.5 * r2 / (w * w));
  }
  return f;
}

}  // namespace critmass
