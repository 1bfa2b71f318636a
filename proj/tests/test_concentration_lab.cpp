#include <doctest.h>

#include <cmath>
#include <numbers>

#include "critmass/concentration_lab.hpp"
#include "critmass/error.hpp"

using namespace critmass;

namespace {

Field gaussian(const Grid& g, double amp, double width) {
  return sample(g, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) r2 += x[d] * x[d];
    return cplx(amp * std::exp(-0.5 * r2 / (width * width)), 0.0);
  });
}

}  // namespace

TEST_CASE("epsilon from the kinetic sum") {
  // 1D gaussian exp(-x^2/2): kinetic = sqrt(pi)/2; scale so each is 2.
  const Grid g(1, 512, 20.0);
  const double amp = std::sqrt(2.0 / (std::sqrt(std::numbers::pi) / 2.0));
  const FieldPair pair(gaussian(g, amp, 1.0), gaussian(g, amp, 1.0));
  CHECK(epsilon_of(pair) == doctest::Approx(0.5).epsilon(1e-12));
  const FieldPair narrow(rescale_conformal(pair.first, 2.0), rescale_conformal(pair.second, 2.0));
  CHECK(epsilon_of(narrow) == doctest::Approx(0.25).epsilon(1e-6));
  try {
    epsilon_of(FieldPair(Field(g), Field(g)));
    FAIL("expected ZeroKinetic");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroKinetic);
  }
}

TEST_CASE("rescaling to unit kinetic energy") {
  const Grid g(1, 1024, 20.0);
  const FieldPair pair(gaussian(g, 1.0, 0.3), gaussian(g, 0.5, 0.4));
  const FieldPair v = rescale_to_unit(pair);
  CHECK(kinetic(v.first) + kinetic(v.second) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mass(v.first) == doctest::Approx(mass(pair.first)).epsilon(1e-6));
  CHECK(mass(v.second) == doctest::Approx(mass(pair.second)).epsilon(1e-6));
  const FieldPair again = rescale_to_unit(v);
  Field d = again.first;
  d -= v.first;
  CHECK(max_abs(d) < 1e-6);
  // onto a separate zoom grid
  const Grid zoom(1, 512, 40.0);
  const FieldPair z = rescale_to_unit(pair, zoom);
  CHECK(kinetic(z.first) + kinetic(z.second) == doctest::Approx(1.0).epsilon(1e-6));
  // a zoom grid too small to hold the profile
  CHECK_THROWS_AS(rescale_to_unit(pair, Grid(1, 512, 2.0)), Error);
}

TEST_CASE("predicted profiles carry the critical mass for every alpha") {
  const GroundStateQ& q = mass_critical_q(1);
  const Grid g(1, 2048, 48.0);
  for (double mu : {1.0, 2.5}) {
    const double star = std::pow(mu, -0.5) * q.mass;
    const Field a = predicted_profile(q, mu, 0.5, g);
    const Field b = predicted_profile(q, mu, 2.0, g);
    CHECK(mass(a) == doctest::Approx(star).epsilon(1e-6));
    CHECK(mass(b) == doctest::Approx(star).epsilon(1e-6));
  }
  const double k1 = kinetic(predicted_profile(q, 1.0, 1.0, g));
  const double k2 = kinetic(predicted_profile(q, 1.0, 2.0, g));
  CHECK(k2 == doctest::Approx(2.0 * k1).epsilon(1e-6));
  // alpha = mu = 1 is the plain Q
  Field d = predicted_profile(q, 1.0, 1.0, g);
  d -= sample_profile(q, g);
  CHECK(max_abs(d) == 0.0);
  CHECK_THROWS_AS(predicted_profile(q, 1.0, -1.0, g), Error);
}

TEST_CASE("default mass sequence") {
  const SystemParams p;
  const auto seq = default_mass_sequence(p, 3);
  REQUIRE(seq.size() == 3);
  const double star = mass_critical_q(1).mass;
  CHECK(seq[0].a1 == doctest::Approx(0.5 * star));
  CHECK(seq[2].a2 == doctest::Approx(0.875 * star));
}

TEST_CASE("sequence validation") {
  const SystemParams p;
  const Grid g(1, 256, 16.0);
  const double star = mass_critical_q(1).mass;
  CHECK_THROWS_AS(concentration_run(p, {{star, star}}, g), Error);
  CHECK_THROWS_AS(concentration_run(p, {{1.1 * star, 0.5 * star}}, g), Error);
  CHECK_THROWS_AS(concentration_run(p, {{0.6 * star, 0.6 * star}, {0.5 * star, 0.5 * star}}, g), Error);
}

TEST_CASE("records along a short sequence") {
  SystemParams p;
  p.mu1 = 1.2;
  p.mu2 = 0.9;
  const auto seq = default_mass_sequence(p, 4);
  const auto recs = concentration_run(p, seq, Grid(1, 1024, 32.0));
  REQUIRE(recs.size() == 4);
  const auto [s1, s2] = critical_masses(p, mass_critical_q(1));
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const auto& r = recs[k];
    CAPTURE(k);
    REQUIRE(r.status == MinimizeStatus::Converged);
    CHECK(r.rescaled_multipliers.lambda1 == doctest::Approx(r.epsilon * r.epsilon * r.multipliers.lambda1));
    CHECK(r.alpha[1] == doctest::Approx(r.rescaled_multipliers.lambda2 / 2.0));
    CHECK(r.multiplier_identity_gap ==
          doctest::Approx(std::abs(s1 * r.rescaled_multipliers.lambda1 + s2 * r.rescaled_multipliers.lambda2 - 2.0)));
    REQUIRE(r.profile_errors.has_value());
    REQUIRE(r.aligned.has_value());
    CHECK(kinetic(r.aligned->first) + kinetic(r.aligned->second) == doctest::Approx(1.0).epsilon(1e-5));
    if (k > 0) {
      CHECK(r.epsilon < recs[k - 1].epsilon);
      CHECK(r.multiplier_identity_gap < recs[k - 1].multiplier_identity_gap);
      CHECK((*r.profile_errors)[0] < (*recs[k - 1].profile_errors)[0]);
      CHECK(r.coupling_decay < recs[k - 1].coupling_decay);
    }
  }
}

TEST_CASE("parallel cold starts agree with the warm-started sequence") {
  const SystemParams p;
  const auto seq = default_mass_sequence(p, 3);
  const Grid g(1, 1024, 32.0);
  ConcentrationOptions warm;
  warm.adapt_box = false;
  ConcentrationOptions cold = warm;
  cold.parallel = true;
  cold.jobs = 2;
  const auto a = concentration_run(p, seq, g, warm);
  const auto b = concentration_run(p, seq, g, cold);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    CHECK(a[k].value == doctest::Approx(b[k].value).epsilon(1e-8));
    CHECK(a[k].epsilon == doctest::Approx(b[k].epsilon).epsilon(1e-5));
  }
}
