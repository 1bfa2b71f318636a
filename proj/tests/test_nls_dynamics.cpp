#include <doctest.h>

#include <cmath>

#include "critmass/energy_model.hpp"
#include "critmass/error.hpp"
#include "critmass/nls_dynamics.hpp"

using namespace critmass;

namespace {

Field gaussian(const Grid& g, double amp, double shift = 0.0) {
  return sample(g, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) r2 += (x[d] - shift) * (x[d] - shift);
    return cplx(amp * std::exp(-0.5 * r2), 0.0);
  });
}

// i u_t + lap u = 0 with u(0) = exp(-|x|^2/2).
cplx free_gaussian(double r2, double t, int dim) {
  const cplx s(1.0, 2.0 * t);
  return std::pow(s, -0.5 * dim) * std::exp(-r2 / (2.0 * s));
}

double max_diff(const Field& a, const Field& b) {
  Field d = a;
  d -= b;
  return max_abs(d);
}

const MinimizeResult& half_critical_minimizer() {
  static const MinimizeResult r = [] {
    const SystemParams p;
    const auto [s1, s2] = critical_masses(p, mass_critical_q(1));
    return minimize(p, {0.5 * s1, 0.5 * s2}, Grid(1, 512, 24.0));
  }();
  return r;
}

}  // namespace

TEST_CASE("linear limit reproduces the free Schrodinger gaussian") {
  // Amplitude 1e-5 makes every nonlinear phase below 1e-20.
  SystemParams p;
  p.beta = 0.0;
  for (int dim = 1; dim <= 2; ++dim) {
    CAPTURE(dim);
    p.dim = dim;
    const Grid g(dim, dim == 1 ? 512 : 128, 24.0);
    const double amp = 1e-5;
    FieldPair pair(gaussian(g, amp), gaussian(g, amp));
    FieldPair final_state = pair;
    evolve(pair, p, {1e-2, 1.0, 50}, nullptr, &final_state);
    const Field exact = sample(g, [&](const std::array<double, 3>& x) {
      double r2 = 0.0;
      for (int d = 0; d < dim; ++d) r2 += x[d] * x[d];
      return amp * free_gaussian(r2, 1.0, dim);
    });
    CHECK(max_diff(final_state.first, exact) < 1e-10 * amp);
  }
}

TEST_CASE("mass is conserved to round-off and energy to the splitting error") {
  const SystemParams p;
  const Grid g(1, 512, 24.0);
  const FieldPair pair(gaussian(g, 0.9), gaussian(g, 0.7, 0.5));
  const TrajectorySummary s = evolve(pair, p, {1e-3, 2.0, 200});
  REQUIRE(s.samples.size() == 11);
  CHECK(s.samples.back().t == doctest::Approx(2.0));
  CHECK(s.scheme_order == 2);
  for (const auto& x : s.samples) {
    CHECK(x.mass1 == doctest::Approx(s.samples[0].mass1).epsilon(1e-12));
    CHECK(x.mass2 == doctest::Approx(s.samples[0].mass2).epsilon(1e-12));
    CHECK(x.energy == doctest::Approx(s.samples[0].energy).epsilon(1e-4));
  }
}

TEST_CASE("global error is second order in the time step") {
  const SystemParams p;
  const Grid g(1, 256, 16.0);
  const FieldPair pair(gaussian(g, 1.0), gaussian(g, 0.8, 0.4));
  auto run = [&](double dt) {
    FieldPair out = pair;
    evolve(pair, p, {dt, 0.5, 1000000}, nullptr, &out);
    return out;
  };
  const FieldPair ref = run(1.25e-4);
  const double e1 = max_diff(run(4e-3).first, ref.first);
  const double e2 = max_diff(run(2e-3).first, ref.first);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("stepping back undoes a step") {
  const SystemParams p;
  const Grid g(1, 256, 16.0);
  const EvolutionState s0{FieldPair(gaussian(g, 1.0), gaussian(g, 0.5, 1.0)), 0.0, 0};
  const EvolutionState s1 = step(s0, 1e-2, p);
  CHECK(s1.step_count == 1);
  CHECK(s1.time == doctest::Approx(1e-2));
  const EvolutionState back = step(s1, -1e-2, p);
  CHECK(max_diff(back.pair.first, s0.pair.first) < 1e-13);
  CHECK(max_diff(back.pair.second, s0.pair.second) < 1e-13);
}

TEST_CASE("orbit distance ignores translations and phases") {
  const Grid g(1, 512, 24.0);
  const FieldPair ref(gaussian(g, 1.0), gaussian(g, 0.6));
  FieldPair moved(translate(ref.first, {1.37, 0, 0}), translate(ref.second, {1.37, 0, 0}));
  moved.first *= std::polar(1.0, 0.4);
  moved.second *= std::polar(1.0, -2.0);
  CHECK(orbit_distance(moved, ref) < 1e-9);
  CHECK(orbit_distance(ref, ref) < 1e-12);
  // a relative shift between the components is not in the orbit
  const FieldPair split(translate(ref.first, {1.0, 0, 0}), ref.second);
  CHECK(orbit_distance(split, ref) > 0.1);
}

TEST_CASE("orbit distance in two dimensions") {
  const Grid g(2, 64, 10.0);
  const FieldPair ref(gaussian(g, 1.0), gaussian(g, 0.6));
  const Shift y{0.31, -0.77, 0.0};
  const FieldPair moved(translate(ref.first, y), translate(ref.second, y));
  CHECK(orbit_distance(moved, ref) < 1e-8);
}

TEST_CASE("non-finite data is reported") {
  const SystemParams p;
  const Grid g(1, 64, 8.0);
  Field bad = gaussian(g, 1.0);
  bad[10] = cplx(NAN, 0.0);
  SplitStepIntegrator it(g, p, 1e-3);
  FieldPair pair(bad, gaussian(g, 1.0));
  try {
    it.advance(pair);
    FAIL("expected NumericalBlowup");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NumericalBlowup);
  }
  CHECK_THROWS_AS(SplitStepIntegrator(g, p, 0.0), Error);
}

TEST_CASE("random perturbations have the requested relative size") {
  const Grid g(1, 256, 16.0);
  const FieldPair pair(gaussian(g, 1.0), gaussian(g, 0.5));
  const FieldPair w = random_perturbation(pair, 0.03, 9);
  const double wn = std::hypot(h1_norm(w.first), h1_norm(w.second));
  const double un = std::hypot(h1_norm(pair.first), h1_norm(pair.second));
  CHECK(wn / un == doctest::Approx(0.03).epsilon(1e-10));
  const FieldPair w2 = random_perturbation(pair, 0.03, 9);
  CHECK(max_diff(w.first, w2.first) == 0.0);
  CHECK(max_diff(w.first, random_perturbation(pair, 0.03, 10).first) > 0.0);
}

TEST_CASE("a converged minimizer stays on its orbit") {
  const MinimizeResult& r = half_critical_minimizer();
  REQUIRE(r.status == MinimizeStatus::Converged);
  const SystemParams p;
  ProbeOptions o;
  o.perturbation_size = 0.0;
  o.horizon = 2.0;
  const TrajectorySummary still = stability_probe(r, p, o);
  for (const auto& x : still.samples) CHECK(x.orbit_distance < 1e-6);
  o.perturbation_size = 1e-2;
  const TrajectorySummary kicked = stability_probe(r, p, o);
  double worst = 0.0;
  for (const auto& x : kicked.samples) worst = std::max(worst, x.orbit_distance);
  CHECK(worst < 5e-2);
  CHECK(kicked.samples.front().mass1 == doctest::Approx(mass(r.pair.first)).epsilon(1e-12));
}

TEST_CASE("probe preconditions") {
  const MinimizeResult& r = half_critical_minimizer();
  const SystemParams p;
  ProbeOptions o;
  o.perturbation_size = 0.2;
  CHECK_THROWS_AS(stability_probe(r, p, o), Error);
  MinimizeResult unconverged = r;
  unconverged.status = MinimizeStatus::IterLimit;
  try {
    stability_probe(unconverged, p);
    FAIL("expected NotConverged");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotConverged);
  }
}
