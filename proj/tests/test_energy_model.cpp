#include <doctest.h>

#include <cmath>
#include <numbers>

#include "critmass/energy_model.hpp"
#include "critmass/error.hpp"
#include "critmass/scalar_ground.hpp"

using namespace critmass;

namespace {

constexpr double pi = std::numbers::pi;

Field bump(const Grid& g, double width, double shift, cplx amp) {
  return sample(g, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) r2 += (x[d] - shift) * (x[d] - shift);
    return amp * std::exp(-0.5 * r2 / (width * width));
  });
}

SystemParams asym_params(int dim) {
  SystemParams p;
  p.dim = dim;
  p.mu1 = 1.3;
  p.mu2 = 0.7;
  p.beta = 0.8;
  p.r1 = dim == 3 ? 1.4 : 1.6;
  p.r2 = dim == 3 ? 1.5 : 1.7;
  return p;
}

}  // namespace

TEST_CASE("energy groups of a gaussian pair") {
  // u = a exp(-x^2/2) in 1D: K = a^2 sqrt(pi)/2, int u^6 = a^6 sqrt(pi/3).
  const Grid g(1, 256, 12.0);
  SystemParams p;
  p.beta = 2.0;
  const FieldPair pair(bump(g, 1.0, 0.0, 0.5), bump(g, 1.0, 0.0, 1.5));
  const EnergyParts e = energy_parts(pair, p);
  CHECK(e.kinetic == doctest::Approx(0.5 * (0.25 + 2.25) * std::sqrt(pi) / 2.0).epsilon(1e-10));
  const double pot = (1.0 / 6.0) * (std::pow(0.5, 6) + std::pow(1.5, 6)) * std::sqrt(pi / 3.0);
  CHECK(e.potential == doctest::Approx(pot).epsilon(1e-12));
  // int |u1|^1.5 |u2|^1.5 = (0.75)^1.5 int exp(-1.5 x^2) = 0.75^1.5 sqrt(pi/1.5)
  const double c = std::pow(0.75, 1.5) * std::sqrt(pi / 1.5);
  CHECK(coupling(pair, p) == doctest::Approx(c).epsilon(1e-12));
  CHECK(e.coupling == doctest::Approx(2.0 * c).epsilon(1e-12));
  CHECK(energy(pair, p) == doctest::Approx(e.kinetic - e.potential - e.coupling));
}

TEST_CASE("gradient matches finite differences of the energy") {
  for (int dim = 1; dim <= 3; ++dim) {
    CAPTURE(dim);
    const SystemParams p = asym_params(dim);
    const Grid g(dim, dim == 3 ? 32 : 128, 8.0);
    const FieldPair u(bump(g, 1.1, 0.2, cplx(0.9, 0.3)), bump(g, 0.8, -0.3, cplx(-0.4, 1.0)));
    const FieldPair h(random_band_limited(g, 10 + dim), random_band_limited(g, 20 + dim));
    const FieldPair grad = gradient(u, p);
    const double predicted = real_inner(grad.first, h.first) + real_inner(grad.second, h.second);
    const double s = 1e-4;
    auto shifted = [&](double t) {
      return FieldPair(u.first + cplx(t) * h.first, u.second + cplx(t) * h.second);
    };
    const double fd = (energy(shifted(s), p) - energy(shifted(-s), p)) / (2.0 * s);
    CHECK(fd == doctest::Approx(predicted).epsilon(1e-6));
  }
}

TEST_CASE("decoupled gradient ignores the other component") {
  SystemParams p;
  p.beta = 0.0;
  const Grid g(1, 128, 8.0);
  const Field u1 = bump(g, 1.0, 0.0, 1.0);
  const FieldPair a(u1, bump(g, 1.0, 1.0, 2.0));
  const FieldPair b(u1, random_band_limited(g, 5));
  const Field ga = gradient(a, p).first;
  const Field gb = gradient(b, p).first;
  for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(ga[i] == gb[i]);
}

TEST_CASE("multipliers and residual at a scaled ground state") {
  // For beta = 0, u_i = mu_i^{-1/4} Q solves -u'' - mu u^5 = -2 u, so lambda_i = 2.
  SystemParams p;
  p.beta = 0.0;
  p.mu1 = 2.0;
  p.mu2 = 0.5;
  const GroundStateQ& q = mass_critical_q(1);
  const Grid g(1, 1024, 32.0);
  const FieldPair pair(rescaled_ground_state(q, p.mu1, g), rescaled_ground_state(q, p.mu2, g));
  const Multipliers m = extract_multipliers(pair, p);
  CHECK(m.lambda1 == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(m.lambda2 == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(stationarity_residual(pair, p, m) < 1e-6);
  CHECK(stationarity_residual(pair, p, {1.0, 1.0}) > 0.1);
  // J vanishes on the scaled ground states and so does the Pohozaev combination.
  CHECK(std::abs(energy(pair, p)) < 1e-6);
  CHECK(std::abs(pohozaev_relative(pair, p)) < 1e-6);
}

TEST_CASE("Pohozaev residual is half the dilation derivative of J") {
  const SystemParams p = asym_params(1);
  const Grid g(1, 512, 16.0);
  const FieldPair u(bump(g, 1.0, 0.0, 1.2), bump(g, 0.7, 0.0, 0.9));
  const double s = 1e-4;
  auto j_at = [&](double t) {
    return energy(FieldPair(rescale_conformal(u.first, t), rescale_conformal(u.second, t)), p);
  };
  const double derivative = (j_at(1.0 + s) - j_at(1.0 - s)) / (2.0 * s);
  CHECK(pohozaev_residual(u, p) == doctest::Approx(0.5 * derivative).epsilon(1e-6));
}

TEST_CASE("zero mass component") {
  const Grid g(1, 64, 8.0);
  const FieldPair pair(bump(g, 1.0, 0.0, 1.0), Field(g));
  try {
    extract_multipliers(pair, SystemParams{});
    FAIL("expected ZeroMass");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroMass);
  }
}

TEST_CASE("phase invariance of the energy") {
  const SystemParams p = asym_params(2);
  const Grid g(2, 64, 8.0);
  const FieldPair u(bump(g, 1.0, 0.1, 1.0), bump(g, 1.2, -0.2, 0.8));
  FieldPair v = u;
  v.first *= std::polar(1.0, 0.7);
  v.second *= std::polar(1.0, -2.1);
  CHECK(energy(v, p) == doctest::Approx(energy(u, p)).epsilon(1e-13));
}
