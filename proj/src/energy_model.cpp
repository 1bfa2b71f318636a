#include "critmass/energy_model.hpp"

#include <cmath>

#include "critmass/error.hpp"

namespace critmass {

namespace detail {
double singular_power_factor(double modulus, double exponent, double floor) {
  if (modulus <= floor) return 0.0;
  return std::pow(modulus, exponent - 2.0);
}
}  // namespace detail

namespace {

struct Terms {
  Field minus_laplacian;
  Field focusing;  // mu |u|^{4/N} u
  Field coupled;   // beta r |u|^{r-2} u |v|^{s}
};

Terms component_terms(const FieldPair& pair, const SystemParams& params, int i) {
  const Field& u = pair[i];
  const Field& v = pair[1 - i];
  const double power = 4.0 / params.dim;
  Terms t{-1.0 * laplacian(u), Field(u.grid()), Field(u.grid())};
  for (std::size_t k = 0; k < u.size(); ++k) {
    t.focusing[k] = params.mu(i) * std::pow(std::abs(u[k]), power) * u[k];
  }
  if (params.beta != 0.0) {
    const double floor = 1e-12 * max_abs(u);
    const double ri = params.r(i);
    const double rj = params.r(1 - i);
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double factor = detail::singular_power_factor(std::abs(u[k]), ri, floor);
      t.coupled[k] = params.beta * ri * factor * std::pow(std::abs(v[k]), rj) * u[k];
    }
  }
  return t;
}

double l2_norm_sq(const Field& f) { return mass(f); }

}  // namespace

double coupling(const FieldPair& pair, const SystemParams& params) {
  double s = 0.0;
  const Field& u = pair.first;
  const Field& v = pair.second;
  for (std::size_t k = 0; k < u.size(); ++k) {
    s += std::pow(std::abs(u[k]), params.r1) * std::pow(std::abs(v[k]), params.r2);
  }
  return s * u.grid().cell_volume();
}

EnergyParts energy_parts(const FieldPair& pair, const SystemParams& params) {
  const int n = params.dim;
  const double p = 2.0 + 4.0 / n;
  const double weight = n / (2.0 * n + 4.0);
  EnergyParts e;
  e.kinetic = 0.5 * (kinetic(pair.first) + kinetic(pair.second));
  e.potential = weight * (params.mu1 * lp_integral(pair.first, p) +
                          params.mu2 * lp_integral(pair.second, p));
  e.coupling = params.beta * coupling(pair, params);
  return e;
}

double energy(const FieldPair& pair, const SystemParams& params) {
  return energy_parts(pair, params).total();
}

FieldPair gradient(const FieldPair& pair, const SystemParams& params) {
  auto make = [&](int i) {
    Terms t = component_terms(pair, params, i);
    Field g = std::move(t.minus_laplacian);
    g -= t.focusing;
    if (params.beta != 0.0) g -= t.coupled;
    return g;
  };
  return FieldPair(make(0), make(1));
}

Multipliers extract_multipliers(const FieldPair& pair, const SystemParams& params) {
  const double c = coupling(pair, params);
  const double p = 2.0 + 4.0 / params.dim;
  double lambda[2];
  for (int i = 0; i < 2; ++i) {
    const double m = mass(pair[i]);
    if (m == 0.0) throw Error(ErrorKind::ZeroMass, "component has zero mass");
    lambda[i] = (-kinetic(pair[i]) + params.mu(i) * lp_integral(pair[i], p) +
                 params.beta * params.r(i) * c) / m;
  }
  return {lambda[0], lambda[1]};
}

double stationarity_residual(const FieldPair& pair, const SystemParams& params,
                             const Multipliers& multipliers) {
  double res = 0.0, scale = 0.0;
  for (int i = 0; i < 2; ++i) {
    Terms t = component_terms(pair, params, i);
    Field shifted = cplx(multipliers[i]) * Field(pair[i]);
    Field r = t.minus_laplacian + shifted;
    r -= t.focusing;
    r -= t.coupled;
    res += l2_norm_sq(r);
    scale += l2_norm_sq(t.minus_laplacian) + l2_norm_sq(shifted) + l2_norm_sq(t.focusing) +
             l2_norm_sq(t.coupled);
  }
  return scale > 0.0 ? std::sqrt(res / scale) : 0.0;
}

double pohozaev_residual(const FieldPair& pair, const SystemParams& params) {
  const EnergyParts e = energy_parts(pair, params);
  const double weight = params.dim * (params.r1 + params.r2 - 2.0) / 4.0;
  return e.kinetic - e.potential - weight * e.coupling;
}

double pohozaev_relative(const FieldPair& pair, const SystemParams& params) {
  const EnergyParts e = energy_parts(pair, params);
  const double weight = params.dim * (params.r1 + params.r2 - 2.0) / 4.0;
  const double raw = e.kinetic - e.potential - weight * e.coupling;
  return e.kinetic > 0.0 ? raw / e.kinetic : raw;
}

}  // namespace critmass
