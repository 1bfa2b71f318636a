#include "critmass/concentration_lab.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "critmass/energy_model.hpp"
#include "critmass/error.hpp"
#include "critmass/nls_dynamics.hpp"

namespace critmass {

double epsilon_of(const FieldPair& pair) {
  const double k = kinetic(pair.first) + kinetic(pair.second);
  if (!(k > 0.0)) throw Error(ErrorKind::ZeroKinetic, "epsilon needs nonzero kinetic energy");
  return 1.0 / std::sqrt(k);
}

FieldPair rescale_to_unit(const FieldPair& pair) {
  const double eps = epsilon_of(pair);
  return {rescale_conformal(pair.first, eps), rescale_conformal(pair.second, eps)};
}

namespace {

FieldPair centered(const FieldPair& pair) {
  Field density(pair.grid());
  for (std::size_t k = 0; k < density.size(); ++k) {
    density[k] = std::sqrt(std::norm(pair.first[k]) + std::norm(pair.second[k]));
  }
  Shift c = periodic_center(density);
  for (auto& x : c) x = -x;
  return {translate(pair.first, c), translate(pair.second, c)};
}

double sequence_exponent(const SystemParams& p) {
  return 2.0 - 0.5 * p.dim * (p.r1 + p.r2 - 2.0);
}

}  // namespace

FieldPair rescale_to_unit(const FieldPair& pair, const Grid& zoom) {
  const double eps = epsilon_of(pair);
  const FieldPair c = centered(pair);
  return {resample(c.first, zoom, eps), resample(c.second, zoom, eps)};
}

Field predicted_profile(const GroundStateQ& q, double mu, double alpha, const Grid& grid) {
  if (!(alpha > 0.0) || !(mu > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "predicted profile needs alpha > 0 and mu > 0");
  }
  const double n = q.dim;
  const double amp = std::pow(mu, -0.25 * n) * std::pow(alpha, 0.25 * n);
  return sample_profile(q, grid, amp, std::sqrt(alpha));
}

std::vector<MassConstraint> default_mass_sequence(const SystemParams& params, int steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidParams, "mass sequence needs at least one step");
  const auto [s1, s2] = critical_masses(params, mass_critical_q(params.dim));
  std::vector<MassConstraint> out;
  for (int k = 1; k <= steps; ++k) {
    const double f = 1.0 - std::ldexp(1.0, -k);
    out.push_back({f * s1, f * s2});
  }
  return out;
}

namespace {

void validate_sequence(const std::vector<MassConstraint>& masses, double s1, double s2) {
  for (std::size_t k = 0; k < masses.size(); ++k) {
    const auto& m = masses[k];
    m.validate();
    if (m.a1 > s1 || m.a2 > s2 || (m.a1 == s1 && m.a2 == s2)) {
      throw Error(ErrorKind::InvalidParams, "mass sequence must stay below the critical pair");
    }
    if (k > 0) {
      const auto& prev = masses[k - 1];
      if (m.a1 < prev.a1 || m.a2 < prev.a2 || (m.a1 == prev.a1 && m.a2 == prev.a2)) {
        throw Error(ErrorKind::InvalidParams, "mass sequence must increase toward the critical pair");
      }
    }
  }
}

// Fills everything downstream of the minimization.
void analyse(ConcentrationRecord& rec, const MinimizeResult& res, const SystemParams& params,
             const GroundStateQ& q, double s1, double s2, const ConcentrationOptions& opts) {
  const int n = params.dim;
  rec.status = res.status;
  rec.value = res.value;
  rec.multipliers = res.multipliers;
  rec.epsilon = epsilon_of(res.pair);
  const double e2 = rec.epsilon * rec.epsilon;
  rec.rescaled_multipliers = {e2 * res.multipliers.lambda1, e2 * res.multipliers.lambda2};
  rec.multiplier_identity_gap =
      std::abs(s1 * rec.rescaled_multipliers.lambda1 + s2 * rec.rescaled_multipliers.lambda2 - 2.0 / n);
  rec.alpha = {rec.rescaled_multipliers.lambda1 * n / 2.0, rec.rescaled_multipliers.lambda2 * n / 2.0};
  if (res.status != MinimizeStatus::Converged) return;

  // Quantities of the rescaled pair do not depend on the sampling grid, so take
  // them on the pair's own grid where no resampling is involved.
  const double p = params.mass_critical_exponent();
  rec.potential_sum = (params.mu1 * lp_integral(res.pair.first, p) * std::pow(e2, 0.5 * n * (p / 2.0 - 1.0)) +
                       params.mu2 * lp_integral(res.pair.second, p) * std::pow(e2, 0.5 * n * (p / 2.0 - 1.0)));
  const double c = coupling(res.pair, params);
  const double c_scale = std::pow(rec.epsilon, 0.5 * n * (params.r1 + params.r2 - 2.0));
  rec.coupling_decay = std::pow(rec.epsilon, sequence_exponent(params)) * c * c_scale;

  if (!(rec.alpha[0] > 0.0) || !(rec.alpha[1] > 0.0)) return;
  const double width = opts.zoom_width / std::sqrt(std::min(rec.alpha[0], rec.alpha[1]));
  const Grid zoom(n, res.pair.grid().points_per_axis(), width);
  try {
    FieldPair predicted(predicted_profile(q, params.mu1, rec.alpha[0], zoom),
                        predicted_profile(q, params.mu2, rec.alpha[1], zoom));
    FieldPair aligned = align_to_orbit(rescale_to_unit(res.pair, zoom), predicted);
    std::array<double, 2> err{};
    for (int i = 0; i < 2; ++i) {
      Field d = aligned[i];
      d -= predicted[i];
      err[i] = h1_norm(d) / h1_norm(predicted[i]);
    }
    rec.profile_errors = err;
    rec.aligned = std::move(aligned);
    rec.predicted = std::move(predicted);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DomainEscape) throw;
  }
}

}  // namespace

std::vector<ConcentrationRecord> concentration_run(const SystemParams& params,
                                                   const std::vector<MassConstraint>& masses,
                                                   const Grid& grid,
                                                   const ConcentrationOptions& opts) {
  params.validate();
  opts.minimize.validate();
  if (!(opts.zoom_width > 0.0)) throw Error(ErrorKind::InvalidParams, "zoom width must be positive");
  const GroundStateQ& q = mass_critical_q(params.dim);
  const auto [s1, s2] = critical_masses(params, q);
  validate_sequence(masses, s1, s2);
  if (grid.dim() != params.dim) throw Error(ErrorKind::InvalidGrid, "grid dimension differs from N");

  std::vector<ConcentrationRecord> records(masses.size());
  for (std::size_t k = 0; k < masses.size(); ++k) records[k].masses = masses[k];

  if (opts.parallel) {
    const int jobs = std::max(1, opts.jobs);
    auto work = [&](int tid) {
      for (std::size_t k = tid; k < masses.size(); k += jobs) {
        const MinimizeResult res = minimize(params, masses[k], grid, opts.minimize);
        records[k].half_width = grid.half_width();
        analyse(records[k], res, params, q, s1, s2, opts);
      }
    };
    std::vector<std::jthread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(work, t);
    work(0);
    return records;
  }

  std::optional<FieldPair> previous;
  double first_eps = 0.0;
  double last_eps = 0.0;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    double width = grid.half_width();
    if (opts.adapt_box && previous) width = std::min(width, grid.half_width() * last_eps / first_eps);
    const Grid box(grid.dim(), grid.points_per_axis(), width);

    std::optional<MinimizeResult> res;
    if (opts.warm_start && previous) {
      try {
        const FieldPair c = centered(*previous);
        res = minimize_from(params, masses[k], {resample(c.first, box), resample(c.second, box)},
                            opts.minimize);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DomainEscape) throw;
      }
    }
    if (!res || res->status != MinimizeStatus::Converged) {
      MinimizeResult cold = minimize(params, masses[k], box, opts.minimize);
      if (!res || cold.status == MinimizeStatus::Converged) res = std::move(cold);
    }
    records[k].half_width = width;
    analyse(records[k], *res, params, q, s1, s2, opts);
    if (res->status == MinimizeStatus::Converged) {
      if (!previous) first_eps = records[k].epsilon;
      last_eps = records[k].epsilon;
      previous = res->pair;
    }
  }
  return records;
}

}  // namespace critmass
