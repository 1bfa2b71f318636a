#include "critmass/scalar_ground.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "critmass/error.hpp"

namespace critmass {

namespace {

namespace odeint = boost::numeric::odeint;

// (Q, Q', mass, kinetic, potential) with the integrals accumulated in r.
using State = std::array<double, 5>;

double sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

struct RadialEquation {
  int dim;
  double p;
  double c1;
  double c0;
  double area;

  void operator()(const State& y, State& dy, double r) const {
    const double q = y[0];
    const double dq = y[1];
    const double aq = std::abs(q);
    const double nonlinear = std::pow(aq, p - 2.0) * q;
    dy[0] = dq;
    dy[1] = (c0 * q - nonlinear) / c1 - (dim - 1) / r * dq;
    const double w = area * std::pow(r, dim - 1);
    dy[2] = w * q * q;
    dy[3] = w * dq * dq;
    dy[4] = w * std::pow(aq, p);
  }

  State start(double s, double r0) const {
    const double curvature = (c0 * s - std::pow(s, p - 1.0)) / (c1 * dim);
    State y{};
    y[0] = s + 0.5 * curvature * r0 * r0;
    y[1] = curvature * r0;
    // Integrals over the ball of radius r0 (matters in 1D).
    const double ball = area * std::pow(r0, dim) / dim;
    y[2] = ball * s * s;
    y[4] = ball * std::pow(s, p);
    return y;
  }

  double decay_rate() const { return std::sqrt(c0 / c1); }
};

enum class Outcome { Overshoot, Undershoot };

class Shooter {
 public:
  Shooter(const RadialEquation& eq, double tol) : eq_(eq), tol_(tol) {}

  void advance(State& y, double from, double to) const {
    // Near-pure relative control: Q decays by many orders of magnitude.
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-12 * tol_, tol_);
    odeint::integrate_adaptive(stepper, eq_, y, from, to, (to - from) * 0.25);
  }

  Outcome classify(double s, double r0, double check, double r_max) const {
    State y = eq_.start(s, r0);
    double r = r0;
    while (r < r_max) {
      advance(y, r, r + check);
      r += check;
      if (y[0] <= 0.0) return Outcome::Overshoot;
      if (y[1] >= 0.0) return Outcome::Undershoot;
    }
    return Outcome::Undershoot;
  }

 private:
  const RadialEquation& eq_;
  double tol_;
};

// Decaying solution r^{1-N/2} K_nu(kappa r) of the linearized equation.
struct BesselTail {
  int dim;
  double kappa;

  double shape(double r) const {
    const double nu = std::abs(0.5 * dim - 1.0);
    return std::pow(r, 1.0 - 0.5 * dim) * std::cyl_bessel_k(nu, kappa * r);
  }
  double log_derivative(double r) const {
    const double nu = std::abs(0.5 * dim - 1.0);
    const double a = 1.0 - 0.5 * dim;
    const double z = kappa * r;
    const double k = std::cyl_bessel_k(nu, z);
    const double dk = -0.5 * (std::cyl_bessel_k(std::abs(nu - 1.0), z) + std::cyl_bessel_k(nu + 1.0, z));
    return a / r + kappa * dk / k;
  }
};

void limit_slopes(std::vector<double>& slope, const std::vector<double>& value, double dr) {
  for (std::size_t k = 0; k + 1 < value.size(); ++k) {
    const double delta = (value[k + 1] - value[k]) / dr;
    if (delta == 0.0) {
      slope[k] = slope[k + 1] = 0.0;
      continue;
    }
    const double a = slope[k] / delta;
    const double b = slope[k + 1] / delta;
    if (a < 0.0) slope[k] = 0.0;
    if (b < 0.0) slope[k + 1] = 0.0;
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      slope[k] = tau * a * delta;
      slope[k + 1] = tau * b * delta;
    }
  }
}

}  // namespace

bool GroundStateQ::is_mass_critical() const {
  return std::abs(exponent - (2.0 + 4.0 / dim)) < 1e-12;
}

double GroundStateQ::operator()(double r) const {
  r = std::abs(r);
  const double pos = r / dr;
  const std::size_t k = static_cast<std::size_t>(pos);
  if (k + 1 >= value.size()) return 0.0;
  const double t = pos - static_cast<double>(k);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * value[k] + h10 * dr * slope[k] + h01 * value[k + 1] + h11 * dr * slope[k + 1];
}

GroundStateQ solve_q(int dim, double exponent, double tol, const ShootingOptions& options) {
  if (dim < 1 || dim > 3) throw Error(ErrorKind::InvalidParams, "dim must be 1, 2 or 3");
  if (!(exponent > 2.0)) throw Error(ErrorKind::InvalidParams, "exponent must exceed 2");
  if (dim >= 3 && !(exponent < 2.0 * dim / (dim - 2.0))) {
    throw Error(ErrorKind::InvalidParams, "exponent must be below 2N/(N-2)");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParams, "tol must be positive");

  RadialEquation eq{dim, exponent, dim * (exponent - 2.0) / 4.0,
                    1.0 - (dim - 2.0) * (exponent - 2.0) / 4.0, sphere_area(dim)};
  const double kappa = eq.decay_rate();
  const double ell = 1.0 / kappa;
  const double r0 = 1e-8;
  const double check = 0.02 * ell;
  const double r_max = 80.0 * ell;
  Shooter shooter(eq, options.integrator_tol);

  double lo = options.initial_low;
  double hi = options.initial_high;
  int widen = 0;
  while (shooter.classify(lo, r0, check, r_max) != Outcome::Undershoot) {
    lo *= 0.5;
    if (++widen > options.max_widenings) throw Error(ErrorKind::NoConvergence, "no undershooting Q(0) found");
  }
  widen = 0;
  while (shooter.classify(hi, r0, check, r_max) != Outcome::Overshoot) {
    hi *= 2.0;
    if (++widen > options.max_widenings) throw Error(ErrorKind::NoConvergence, "no overshooting Q(0) found");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (shooter.classify(mid, r0, check, r_max) == Outcome::Undershoot ? lo : hi) = mid;
  }

  GroundStateQ q;
  q.dim = dim;
  q.exponent = exponent;
  q.dr = 2e-3 * ell;
  q.center_value = 0.5 * (lo + hi);

  // March both bracket ends on the output grid and keep their average until
  // they separate; beyond that point the shooting data no longer determine Q.
  State ylo = eq.start(lo, r0);
  State yhi = eq.start(hi, r0);
  double r = r0;
  q.value.push_back(q.center_value);
  q.slope.push_back(0.0);
  State cut_state{};
  for (std::size_t k = 1;; ++k) {
    const double next = static_cast<double>(k) * q.dr;
    shooter.advance(ylo, r, next);
    shooter.advance(yhi, r, next);
    r = next;
    const double v = 0.5 * (ylo[0] + yhi[0]);
    const bool split = std::abs(ylo[0] - yhi[0]) > 1e-7 * std::abs(v);
    if (split || v < 1e-6 * q.center_value || ylo[1] >= 0.0 || yhi[0] <= 0.0 || r > r_max) break;
    for (int c = 0; c < 5; ++c) cut_state[c] = 0.5 * (ylo[c] + yhi[c]);
    q.value.push_back(cut_state[0]);
    q.slope.push_back(cut_state[1]);
  }
  if (q.value.size() < 16) throw Error(ErrorKind::NoConvergence, "shooting profile collapsed near the origin");
  q.cut_radius = q.radius(q.value.size() - 1);

  BesselTail tail{dim, kappa};
  const double qc = q.value.back();
  const double match = qc / tail.shape(q.cut_radius);
  q.residual = ell * std::abs(q.slope.back() / qc - tail.log_derivative(q.cut_radius));

  double tail_mass = 0.0, tail_kinetic = 0.0, tail_potential = 0.0;
  double prev_r = q.cut_radius;
  double prev_v = qc;
  double prev_s = q.slope.back();
  const double floor = 1e-14 * q.center_value;
  while (prev_v >= floor) {
    const double rr = prev_r + q.dr;
    const double v = match * tail.shape(rr);
    const double s = v * tail.log_derivative(rr);
    const double w0 = eq.area * std::pow(prev_r, dim - 1);
    const double w1 = eq.area * std::pow(rr, dim - 1);
    tail_mass += 0.5 * q.dr * (w0 * prev_v * prev_v + w1 * v * v);
    tail_kinetic += 0.5 * q.dr * (w0 * prev_s * prev_s + w1 * s * s);
    tail_potential += 0.5 * q.dr * (w0 * std::pow(prev_v, exponent) + w1 * std::pow(v, exponent));
    q.value.push_back(v);
    q.slope.push_back(s);
    prev_r = rr;
    prev_v = v;
    prev_s = s;
  }
  limit_slopes(q.slope, q.value, q.dr);

  q.mass = cut_state[2] + tail_mass;
  q.kinetic = cut_state[3] + tail_kinetic;
  q.potential = cut_state[4] + tail_potential;
  q.gn_constant = exponent / (2.0 * std::pow(q.mass, 0.5 * (exponent - 2.0)));

  if (!(q.residual < tol)) {
    std::ostringstream os;
    os << "tail matching residual " << q.residual << " exceeds tol " << tol;
    throw Error(ErrorKind::NoConvergence, os.str());
  }
  return q;
}

const GroundStateQ& mass_critical_q(int dim) {
  static std::mutex mutex;
  static std::map<int, GroundStateQ> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(dim);
  if (it == cache.end()) it = cache.emplace(dim, solve_q(dim, 2.0 + 4.0 / dim)).first;
  return it->second;
}

std::pair<double, double> critical_masses(const SystemParams& params, const GroundStateQ& q) {
  if (!q.is_mass_critical() || q.dim != params.dim) {
    throw Error(ErrorKind::ExponentMismatch, "critical masses need the mass-critical Q of dimension N");
  }
  const double half_n = -0.5 * params.dim;
  return {std::pow(params.mu1, half_n) * q.mass, std::pow(params.mu2, half_n) * q.mass};
}

Field sample_profile(const GroundStateQ& q, const Grid& grid, double amplitude, double scale,
                     double boundary_tol) {
  if (grid.dim() != q.dim) throw Error(ErrorKind::InvalidGrid, "profile and grid dimensions differ");
  Field f = sample(grid, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int d = 0; d < grid.dim(); ++d) r2 += x[d] * x[d];
    return cplx(amplitude * q(scale * std::sqrt(r2)), 0.0);
  });
  if (boundary_amplitude(f) > boundary_tol) {
    throw Error(ErrorKind::DomainEscape, "ground state profile does not fit the box");
  }
  return f;
}

Field rescaled_ground_state(const GroundStateQ& q, double mu, const Grid& grid) {
  if (!q.is_mass_critical()) throw Error(ErrorKind::ExponentMismatch, "rescaled ground state needs mass-critical Q");
  return sample_profile(q, grid, std::pow(mu, -0.25 * q.dim));
}

GnTerms gn_terms(const Field& f, const GroundStateQ& q) {
  const double m = mass(f);
  if (m == 0.0) throw Error(ErrorKind::ZeroField, "GN deficit of the zero field");
  const double p = q.exponent;
  const int n = q.dim;
  const double k = kinetic(f);
  const double kin_power = n * (p - 2.0) / 4.0;
  GnTerms t;
  t.lhs = lp_integral(f, p);
  t.rhs = q.gn_constant * std::pow(k, kin_power) * std::pow(m, 0.5 * p - kin_power);
  return t;
}

double gn_deficit(const Field& f, const GroundStateQ& q) {
  const auto t = gn_terms(f, q);
  return t.rhs - t.lhs;
}

}  // namespace critmass
