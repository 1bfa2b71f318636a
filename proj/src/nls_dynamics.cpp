#include "critmass/nls_dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "critmass/energy_model.hpp"
#include "critmass/error.hpp"

namespace critmass {

SplitStepIntegrator::SplitStepIntegrator(const Grid& grid, const SystemParams& params, double dt)
    : grid_(grid), params_(params), dt_(dt) {
  if (!std::isfinite(dt) || dt == 0.0) throw Error(ErrorKind::InvalidParams, "dt must be finite and nonzero");
  const auto k2 = grid.wavenumber_squared();
  half_propagator_.resize(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) half_propagator_[i] = std::polar(1.0, -0.5 * dt * k2[i]);
}

void SplitStepIntegrator::half_kinetic(Field& f) const {
  auto v = f.values();
  forward_transform_inplace(grid_, v);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= half_propagator_[i];
  inverse_transform_inplace(grid_, v);
}

void SplitStepIntegrator::nonlinear(FieldPair& pair) const {
  // The phase flow leaves |phi_i| unchanged, so the rotation angle computed from
  // the incoming moduli is exact over the whole substep.
  const double power = 4.0 / params_.dim;
  const std::size_t n = pair.first.size();
  const double floor1 = 1e-12 * max_abs(pair.first);
  const double floor2 = 1e-12 * max_abs(pair.second);
  for (std::size_t k = 0; k < n; ++k) {
    const double m1 = std::abs(pair.first[k]);
    const double m2 = std::abs(pair.second[k]);
    double v1 = params_.mu1 * std::pow(m1, power);
    double v2 = params_.mu2 * std::pow(m2, power);
    if (params_.beta != 0.0) {
      v1 += params_.beta * params_.r1 * detail::singular_power_factor(m1, params_.r1, floor1) *
            std::pow(m2, params_.r2);
      v2 += params_.beta * params_.r2 * detail::singular_power_factor(m2, params_.r2, floor2) *
            std::pow(m1, params_.r1);
    }
    pair.first[k] *= std::polar(1.0, dt_ * v1);
    pair.second[k] *= std::polar(1.0, dt_ * v2);
  }
}

void SplitStepIntegrator::advance(FieldPair& pair) const {
  half_kinetic(pair.first);
  half_kinetic(pair.second);
  nonlinear(pair);
  half_kinetic(pair.first);
  half_kinetic(pair.second);
  if (!pair.first.all_finite() || !pair.second.all_finite()) {
    throw Error(ErrorKind::NumericalBlowup, "non-finite values in split-step evolution");
  }
}

EvolutionState step(const EvolutionState& state, double dt, const SystemParams& params) {
  SplitStepIntegrator integrator(state.pair.grid(), params, dt);
  EvolutionState next = state;
  integrator.advance(next.pair);
  next.step_count = state.step_count + 1;
  next.time = static_cast<double>(next.step_count) * dt;
  return next;
}

namespace {

Field modulus_sum(const FieldPair& pair) {
  Field s(pair.grid());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::abs(pair.first[k]) + std::abs(pair.second[k]);
  return s;
}

// Weighted H1 cross-spectrum (1 + |k|^2) p^ conj(r^) per component; the
// translated overlap is C(y) = sum_k S_k e^{i k.y} (times the quadrature weight).
struct CrossSpectrum {
  std::vector<cplx> s[2];
  std::vector<std::array<double, 3>> k;
};

CrossSpectrum cross_spectrum(const FieldPair& pair, const FieldPair& ref) {
  const Grid& g = pair.grid();
  CrossSpectrum cs;
  const auto k2 = g.wavenumber_squared();
  const double w = g.cell_volume() / static_cast<double>(g.size());
  for (int i = 0; i < 2; ++i) {
    auto ps = forward_transform(g, pair[i].values());
    const auto rs = forward_transform(g, ref[i].values());
    for (std::size_t m = 0; m < ps.size(); ++m) ps[m] = w * (1.0 + k2[m]) * ps[m] * std::conj(rs[m]);
    cs.s[i] = std::move(ps);
  }
  cs.k.resize(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) {
    const auto idx = g.unflatten(m);
    std::array<double, 3> kv{0.0, 0.0, 0.0};
    for (int d = 0; d < g.dim(); ++d) kv[d] = g.wavenumber(idx[d]);
    cs.k[m] = kv;
  }
  return cs;
}

// Objective sum_i |C_i(y)| with gradient and Hessian.
struct Overlap {
  double value = 0.0;
  std::array<double, 3> grad{};
  std::array<std::array<double, 3>, 3> hess{};
};

Overlap overlap(const CrossSpectrum& cs, const Shift& y, int dim) {
  Overlap o;
  for (int i = 0; i < 2; ++i) {
    cplx c{};
    std::array<cplx, 3> dc{};
    std::array<std::array<cplx, 3>, 3> ddc{};
    for (std::size_t m = 0; m < cs.k.size(); ++m) {
      const auto& kv = cs.k[m];
      double phase = 0.0;
      for (int d = 0; d < dim; ++d) phase += kv[d] * y[d];
      const cplx term = cs.s[i][m] * std::polar(1.0, phase);
      c += term;
      for (int a = 0; a < dim; ++a) {
        dc[a] += cplx(0.0, kv[a]) * term;
        for (int b = 0; b < dim; ++b) ddc[a][b] -= kv[a] * kv[b] * term;
      }
    }
    const double mod = std::abs(c);
    if (mod == 0.0) continue;
    o.value += mod;
    for (int a = 0; a < dim; ++a) {
      const double ga = (std::conj(c) * dc[a]).real() / mod;
      o.grad[a] += ga;
      for (int b = 0; b < dim; ++b) {
        const double gb = (std::conj(c) * dc[b]).real() / mod;
        o.hess[a][b] += ((std::conj(c) * ddc[a][b]).real() + (std::conj(dc[a]) * dc[b]).real()) / mod -
                        ga * gb / mod;
      }
    }
  }
  return o;
}

// Solves the small symmetric system H x = g by Gaussian elimination.
bool solve_small(std::array<std::array<double, 3>, 3> h, std::array<double, 3> g, int n,
                 std::array<double, 3>& x) {
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) if (std::abs(h[r][c]) > std::abs(h[piv][c])) piv = r;
    if (std::abs(h[piv][c]) < 1e-300) return false;
    std::swap(h[c], h[piv]);
    std::swap(g[c], g[piv]);
    for (int r = c + 1; r < n; ++r) {
      const double f = h[r][c] / h[c][c];
      for (int k = c; k < n; ++k) h[r][k] -= f * h[c][k];
      g[r] -= f * g[c];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = g[r];
    for (int k = r + 1; k < n; ++k) s -= h[r][k] * x[k];
    x[r] = s / h[r][r];
  }
  return true;
}

}  // namespace

FieldPair align_to_orbit(const FieldPair& pair, const FieldPair& reference) {
  const Grid& g = pair.grid();
  if (!(g == reference.grid())) throw Error(ErrorKind::InvalidGrid, "orbit alignment needs a shared grid");
  const int dim = g.dim();

  // Coarse shift: pair ~ reference(. - y). Then polish y with Newton steps on
  // the smooth objective sum_i |<pair_i(. + y), ref_i>_{H1}|.
  Shift y = best_translation_alignment(modulus_sum(pair), modulus_sum(reference));
  const CrossSpectrum cs = cross_spectrum(pair, reference);
  Overlap cur = overlap(cs, y, dim);
  for (int it = 0; it < 20; ++it) {
    std::array<double, 3> delta{0.0, 0.0, 0.0};
    if (!solve_small(cur.hess, cur.grad, dim, delta)) break;
    double step_len = 0.0;
    for (int d = 0; d < dim; ++d) step_len = std::max(step_len, std::abs(delta[d]));
    if (step_len > g.spacing()) break;  // not in the concave basin
    Shift trial = y;
    for (int d = 0; d < dim; ++d) trial[d] -= delta[d];
    const Overlap next = overlap(cs, trial, dim);
    if (!(next.value >= cur.value)) break;
    y = trial;
    cur = next;
    if (step_len < 1e-14 * g.half_width()) break;
  }

  Shift back{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) back[d] = -y[d];
  FieldPair out(translate(pair.first, back), translate(pair.second, back));
  for (int i = 0; i < 2; ++i) {
    const cplx c = h1_inner(out[i], reference[i]);
    if (std::abs(c) > 0.0) out[i] *= std::polar(1.0, -std::arg(c));
  }
  return out;
}

double orbit_distance(const FieldPair& pair, const FieldPair& reference) {
  FieldPair diff = align_to_orbit(pair, reference);
  double dist2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    diff[i] -= reference[i];
    dist2 += h1_inner(diff[i], diff[i]).real();
  }
  return std::sqrt(std::max(0.0, dist2));
}

TrajectorySummary evolve(const FieldPair& initial, const SystemParams& params,
                         const EvolveOptions& opts, const FieldPair* reference,
                         FieldPair* final_state) {
  if (!(opts.dt > 0.0) || !(opts.horizon >= 0.0) || opts.sample_every <= 0) {
    throw Error(ErrorKind::InvalidParams, "evolve needs dt > 0, horizon >= 0, sample_every > 0");
  }
  const FieldPair& ref = reference ? *reference : initial;
  SplitStepIntegrator integrator(initial.grid(), params, opts.dt);
  TrajectorySummary summary;
  summary.dt = opts.dt;
  const long long total = std::llround(opts.horizon / opts.dt);
  FieldPair state = initial;
  auto record = [&](long long n) {
    summary.samples.push_back({static_cast<double>(n) * opts.dt, mass(state.first), mass(state.second),
                               energy(state, params), orbit_distance(state, ref)});
  };
  record(0);
  for (long long n = 1; n <= total; ++n) {
    integrator.advance(state);
    if (n % opts.sample_every == 0 || n == total) record(n);
  }
  if (final_state) *final_state = state;
  return summary;
}

FieldPair random_perturbation(const FieldPair& pair, double size, std::uint64_t seed) {
  const Grid& g = pair.grid();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> width_dist(0.5, 2.0);
  auto bumps = [&](int i) {
    const Shift center = periodic_center(pair[i]);
    const double scale = std::sqrt(mass(pair[i]) / std::max(kinetic(pair[i]), 1e-300));
    Field w(g);
    for (int b = 0; b < 4; ++b) {
      Shift c{};
      for (int d = 0; d < g.dim(); ++d) c[d] = center[d] + scale * unit(rng);
      const double width = scale * width_dist(rng);
      const cplx amp(unit(rng), unit(rng));
      w += sample(g, [&](const std::array<double, 3>& x) {
        const Shift diff = periodic_difference(g, x, c);
        double r2 = 0.0;
        for (int d = 0; d < g.dim(); ++d) r2 += diff[d] * diff[d];
        return amp * std::exp(-0.5 * r2 / (width * width));
      });
    }
    return w;
  };
  FieldPair w(bumps(0), bumps(1));
  const double wn = std::sqrt(h1_inner(w.first, w.first).real() + h1_inner(w.second, w.second).real());
  const double un = std::sqrt(h1_inner(pair.first, pair.first).real() +
                              h1_inner(pair.second, pair.second).real());
  const cplx factor = wn > 0.0 ? size * un / wn : 0.0;
  w.first *= factor;
  w.second *= factor;
  return w;
}

TrajectorySummary stability_probe(const MinimizeResult& minimizer, const SystemParams& params,
                                  const ProbeOptions& opts) {
  if (minimizer.status != MinimizeStatus::Converged) {
    throw Error(ErrorKind::NotConverged, "stability probe needs a converged minimizer");
  }
  if (!(opts.perturbation_size >= 0.0) || opts.perturbation_size > 0.1) {
    throw Error(ErrorKind::InvalidParams, "perturbation size must lie in [0, 0.1]");
  }
  FieldPair start = minimizer.pair;
  if (opts.perturbation_size > 0.0) {
    const FieldPair w = random_perturbation(minimizer.pair, opts.perturbation_size, opts.seed);
    start.first += w.first;
    start.second += w.second;
    if (opts.restore_masses) {
      start = project_masses(start, {mass(minimizer.pair.first), mass(minimizer.pair.second)});
    }
  }
  return evolve(start, params, {opts.dt, opts.horizon, opts.sample_every}, &minimizer.pair);
}

}  // namespace critmass
