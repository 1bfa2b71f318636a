#include "critmass/mass_minimizer.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "critmass/energy_model.hpp"
#include "critmass/error.hpp"

namespace critmass {

std::string_view to_string(MinimizeStatus status) {
  switch (status) {
    case MinimizeStatus::Converged: return "Converged";
    case MinimizeStatus::SpreadDetected: return "SpreadDetected";
    case MinimizeStatus::DivergenceDetected: return "DivergenceDetected";
    case MinimizeStatus::IterLimit: return "IterLimit";
  }
  return "Unknown";
}

void MinimizeOptions::validate() const {
  if (!(step > 0.0) || !(max_step >= step) || max_iters <= 0 || !(grad_tol > 0.0) || !(grad_tol < 1.0) || restarts <= 0 ||
      !(spread_threshold > 0.0) || !(spread_energy > 0.0) || !(divergence_kinetic > 0.0) ||
      !(divergence_energy > 0.0) || !(collapse_tail > 0.0) || stall_window <= 0) {
    throw Error(ErrorKind::InvalidParams, "minimize options must be positive with grad_tol < 1");
  }
}

FieldPair project_masses(const FieldPair& pair, const MassConstraint& target) {
  FieldPair out = pair;
  for (int i = 0; i < 2; ++i) {
    const double m = mass(pair[i]);
    if (m == 0.0) throw Error(ErrorKind::ZeroMass, "cannot project a zero component");
    out[i] *= cplx(std::sqrt(target[i] / m));
  }
  return out;
}

double boundary_mass_fraction(const FieldPair& pair) {
  const Grid& g = pair.grid();
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Field& u = pair[i];
    const Shift c = periodic_center(u);
    double total = 0.0, outer = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double w = std::norm(u[k]);
      total += w;
      const Shift d = periodic_difference(g, g.position(k), c);
      double reach = 0.0;
      for (int a = 0; a < g.dim(); ++a) reach = std::max(reach, std::abs(d[a]));
      if (reach > 0.5 * g.half_width()) outer += w;
    }
    if (total > 0.0) worst = std::max(worst, outer / total);
  }
  return worst;
}

namespace {

// Preconditioned descent direction tangent to the mass sphere of each component:
// d = P^{-1} g - (<P^{-1} g, u> / <P^{-1} u, u>) P^{-1} u with P = c - Laplacian,
// so that Re<d, u> = 0 and the step is resolution independent.
FieldPair descent_direction(const FieldPair& u, const FieldPair& g, const Multipliers& lambda) {
  auto make = [&](int i) {
    const double m = mass(u[i]);
    const double shift = std::max({lambda[i], 0.1 * kinetic(u[i]) / m, 1e-8});
    Field pg = apply_shifted_inverse_laplacian(g[i], shift);
    Field pu = apply_shifted_inverse_laplacian(u[i], shift);
    const double coef = real_inner(pg, u[i]) / real_inner(pu, u[i]);
    pg -= cplx(coef) * pu;
    return pg;
  };
  return FieldPair(make(0), make(1));
}

double roundoff_floor(const EnergyParts& e) {
  return 64.0 * DBL_EPSILON * (std::abs(e.kinetic) + std::abs(e.potential) + std::abs(e.coupling));
}

MinimizeResult finish(const SystemParams& params, FieldPair pair, MinimizeStatus status, int iters) {
  const Multipliers lambda = extract_multipliers(pair, params);
  MinimizeResult r{std::move(pair), 0.0, lambda};
  r.value = energy(r.pair, params);
  r.multipliers = lambda;
  r.grad_residual = stationarity_residual(r.pair, params, lambda);
  r.pohozaev = pohozaev_relative(r.pair, params);
  r.status = status;
  r.iterations = iters;
  return r;
}

std::vector<FieldPair> initial_guesses(const SystemParams& params, const MassConstraint& target,
                                       const Grid& grid, const MinimizeOptions& opts) {
  std::vector<FieldPair> guesses;
  const GroundStateQ& q = mass_critical_q(params.dim);
  const auto [a1s, a2s] = critical_masses(params, q);
  try {
    Field q1 = rescaled_ground_state(q, params.mu1, grid);
    Field q2 = rescaled_ground_state(q, params.mu2, grid);
    q1 *= cplx(std::sqrt(target.a1 / a1s));
    q2 *= cplx(std::sqrt(target.a2 / a2s));
    guesses.emplace_back(std::move(q1), std::move(q2));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DomainEscape) throw;
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> width_dist(0.5, 2.0);
  std::uniform_real_distribution<double> center_dist(-0.1, 0.1);
  while (static_cast<int>(guesses.size()) < opts.restarts) {
    Shift center{};
    for (int d = 0; d < grid.dim(); ++d) center[d] = center_dist(rng) * grid.half_width();
    const double w1 = width_dist(rng);
    const double w2 = width_dist(rng);
    auto gaussian = [&](double w) {
      return sample(grid, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int d = 0; d < grid.dim(); ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
        return cplx(std::exp(-0.5 * r2 / (w * w)), 0.0);
      });
    };
    guesses.emplace_back(gaussian(w1), gaussian(w2));
  }
  return guesses;
}

bool better(const MinimizeResult& a, const MinimizeResult& b) {
  auto rank = [](MinimizeStatus s) {
    switch (s) {
      case MinimizeStatus::Converged: return 0;
      case MinimizeStatus::DivergenceDetected: return 1;
      case MinimizeStatus::SpreadDetected: return 2;
      case MinimizeStatus::IterLimit: return 3;
    }
    return 4;
  };
  if (rank(a.status) != rank(b.status)) return rank(a.status) < rank(b.status);
  return a.value < b.value;
}

}  // namespace

MinimizeResult minimize_from(const SystemParams& params, const MassConstraint& target,
                             const FieldPair& initial, const MinimizeOptions& opts) {
  params.validate();
  target.validate();
  opts.validate();

  FieldPair u = project_masses(initial, target);
  EnergyParts parts = energy_parts(u, params);
  double value = parts.total();
  const double initial_kinetic = 2.0 * parts.kinetic;
  const double initial_value = value;
  double tau = opts.step;
  double best_residual = INFINITY;
  int best_at = 0;

  for (int it = 0; it < opts.max_iters; ++it) {
    const FieldPair g = gradient(u, params);
    Multipliers lambda;
    lambda.lambda1 = -real_inner(g.first, u.first) / target.a1;
    lambda.lambda2 = -real_inner(g.second, u.second) / target.a2;

    const double total_kinetic = 2.0 * parts.kinetic;
    if (total_kinetic > opts.divergence_kinetic && value < -opts.divergence_energy) {
      return finish(params, std::move(u), MinimizeStatus::DivergenceDetected, it);
    }
    if (value < 0.0 && value < initial_value && total_kinetic > 10.0 * initial_kinetic &&
        std::max(spectral_tail_fraction(u.first), spectral_tail_fraction(u.second)) >
            opts.collapse_tail) {
      return finish(params, std::move(u), MinimizeStatus::DivergenceDetected, it);
    }
    if (std::abs(value) < opts.spread_energy && boundary_mass_fraction(u) > opts.spread_threshold) {
      return finish(params, std::move(u), MinimizeStatus::SpreadDetected, it);
    }
    const double residual = stationarity_residual(u, params, lambda);
    if (residual < opts.grad_tol) return finish(params, std::move(u), MinimizeStatus::Converged, it);
    if (residual < 0.99 * best_residual) {
      best_residual = residual;
      best_at = it;
    } else if (it - best_at > opts.stall_window) {
      return finish(params, std::move(u), MinimizeStatus::IterLimit, it);
    }

    const FieldPair d = descent_direction(u, g, lambda);
    const double slack = roundoff_floor(parts);
    bool accepted = false;
    while (tau > 1e-14) {
      FieldPair trial(u.first - cplx(tau) * d.first, u.second - cplx(tau) * d.second);
      trial = project_masses(trial, target);
      EnergyParts trial_parts = energy_parts(trial, params);
      const double trial_value = trial_parts.total();
      if (std::isfinite(trial_value) && trial_value <= value + slack) {
        u = std::move(trial);
        parts = trial_parts;
        value = trial_value;
        tau = std::min(1.1 * tau, opts.max_step);
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) return finish(params, std::move(u), MinimizeStatus::IterLimit, it);
  }
  return finish(params, std::move(u), MinimizeStatus::IterLimit, opts.max_iters);
}

MinimizeResult minimize(const SystemParams& params, const MassConstraint& target, const Grid& grid,
                        const MinimizeOptions& opts) {
  params.validate();
  target.validate();
  opts.validate();
  if (grid.dim() != params.dim) throw Error(ErrorKind::InvalidGrid, "grid dimension differs from N");
  const auto guesses = initial_guesses(params, target, grid, opts);
  std::optional<MinimizeResult> best;
  for (std::size_t k = 0; k < guesses.size(); ++k) {
    MinimizeResult r = minimize_from(params, target, guesses[k], opts);
    r.guess_index = static_cast<int>(k);
    if (!best || better(r, *best)) best = std::move(r);
  }
  return std::move(*best);
}

std::vector<ScanRow> scan_m(const SystemParams& params, const std::vector<MassConstraint>& masses,
                            const Grid& grid, const MinimizeOptions& opts, int jobs) {
  std::vector<ScanRow> rows(masses.size());
  auto run = [&](std::size_t k) {
    ScanRow& row = rows[k];
    row.masses = masses[k];
    try {
      const MinimizeResult r = minimize(params, masses[k], grid, opts);
      row.value = r.value;
      row.multipliers = r.multipliers;
      row.status = r.status;
    } catch (const Error&) {
      row.value = std::numeric_limits<double>::quiet_NaN();
      row.status = MinimizeStatus::IterLimit;
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1 || masses.size() < 2) {
    for (std::size_t k = 0; k < masses.size(); ++k) run(k);
    return rows;
  }
  // Static round-robin assignment; each row is written by exactly one worker.
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t k = static_cast<std::size_t>(w); k < masses.size(); k += jobs) run(k);
    });
  }
  for (auto& t : workers) t.join();
  return rows;
}

double divergence_family_energy(const SystemParams& params, const GroundStateQ& q,
                                const MassConstraint& masses, double t, const Grid& grid) {
  params.validate();
  masses.validate();
  const Field base = sample_profile(q, grid);
  const Field scaled = rescale_conformal(base, t);
  const double norm = std::sqrt(q.mass);
  FieldPair family(cplx(std::sqrt(masses.a1) / norm) * scaled,
                   cplx(std::sqrt(masses.a2) / norm) * scaled);
  return energy(family, params);
}

namespace {

ComponentStructure component_structure(const Field& u) {
  const Grid& g = u.grid();
  ComponentStructure s;
  s.center = periodic_center(u);
  const double peak = max_abs(u);
  if (peak == 0.0) return s;

  cplx weighted{};
  for (cplx v : u.values()) weighted += std::abs(v) * v;
  const double mean_phase = std::arg(weighted);
  const cplx unrotate = std::polar(1.0, -mean_phase);
  for (cplx v : u.values()) {
    if (std::abs(v) > 1e-6 * peak) {
      s.phase_deviation = std::max(s.phase_deviation, std::abs(std::arg(v * unrotate)));
    }
  }

  const double h = g.spacing();
  const int bins = static_cast<int>(g.half_width() / h);
  std::vector<double> sum(bins, 0.0);
  std::vector<int> count(bins, 0);
  double min_ratio = 1.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Shift d = periodic_difference(g, g.position(k), s.center);
    double r2 = 0.0, reach = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      r2 += d[a] * d[a];
      reach = std::max(reach, std::abs(d[a]));
    }
    const int b = static_cast<int>(std::sqrt(r2) / h);
    if (b < bins) {
      sum[b] += std::abs(u[k]);
      ++count[b];
    }
    if (reach < 0.5 * g.half_width()) min_ratio = std::min(min_ratio, std::abs(u[k]) / peak);
  }
  s.min_amplitude_ratio = min_ratio;
  int pairs = 0, rises = 0;
  double prev = -1.0;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    const double mean = sum[b] / count[b];
    if (prev >= 0.0) {
      ++pairs;
      if (mean > prev + 1e-12 * peak) ++rises;
    }
    prev = mean;
  }
  s.unimodality_violation = pairs > 0 ? static_cast<double>(rises) / pairs : 0.0;
  return s;
}

}  // namespace

bool StructureReport::passes(double phase_tol) const {
  for (const auto& c : component) {
    if (!(c.phase_deviation < phase_tol) || c.unimodality_violation != 0.0 ||
        !(c.min_amplitude_ratio > 0.0)) {
      return false;
    }
  }
  return center_offset < spacing;
}

StructureReport pair_structure(const FieldPair& pair) {
  StructureReport r;
  r.component[0] = component_structure(pair.first);
  r.component[1] = component_structure(pair.second);
  const Shift d = periodic_difference(pair.grid(), r.component[0].center, r.component[1].center);
  double s = 0.0;
  for (int a = 0; a < pair.grid().dim(); ++a) s += d[a] * d[a];
  r.center_offset = std::sqrt(s);
  r.spacing = pair.grid().spacing();
  return r;
}

StructureReport check_minimizer_structure(const MinimizeResult& result) {
  if (result.status != MinimizeStatus::Converged) {
    throw Error(ErrorKind::NotConverged, "structure check needs a converged minimizer");
  }
  return pair_structure(result.pair);
}

}  // namespace critmass
