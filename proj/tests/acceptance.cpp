// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "critmass/cli.hpp"
#include "critmass/concentration_lab.hpp"
#include "critmass/energy_model.hpp"
#include "critmass/error.hpp"
#include "critmass/mass_minimizer.hpp"
#include "critmass/nls_dynamics.hpp"
#include "critmass/scalar_ground.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace critmass;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string exact(double x) { return fmt("%.17g", x); }

// Setup shared by criteria 4, 8, 9, 10.
const SystemParams kParams{};  // N=1, mu=(1,1), beta=1, r=(1.5,1.5)
const Grid kGrid(1, 1024, 32.0);

MassConstraint fraction_of_critical(double f1, double f2) {
  const auto [s1, s2] = critical_masses(kParams, mass_critical_q(1));
  return {f1 * s1, f2 * s2};
}

const MinimizeResult& half_critical_minimizer() {
  static const MinimizeResult r = minimize(kParams, fraction_of_critical(0.5, 0.5), kGrid);
  return r;
}

Verdict criterion1() {
  const GroundStateQ q = solve_q(1, 6.0);
  const double oracle = std::numbers::pi * std::sqrt(3.0) / 2.0;
  const double err = std::abs(q.mass - oracle);
  return {err < 1e-6, fmt("mass %.10f, closed form %.10f, error %.2e", q.mass, oracle, err)};
}

Verdict criterion2() {
  const GroundStateQ q = solve_q(2, 4.0);
  const double oracle = oracle::shoot_ground_state(2, 4.0, 2.5e-4, 40.0).mass;
  const double rel = std::abs(q.mass - oracle) / oracle;
  return {rel < 1e-3, fmt("mass %.8f, RK4 oracle %.8f, relative %.2e", q.mass, oracle, rel)};
}

Verdict criterion3() {
  const GroundStateQ& q = mass_critical_q(1);
  const Field qs = sample_profile(q, kGrid);
  const GnTerms tq = gn_terms(qs, q);
  const double at_q = std::abs(gn_deficit(qs, q)) / tq.rhs;
  double worst = INFINITY;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const Field f = random_band_limited(kGrid, 1000 + s);
    const GnTerms t = gn_terms(f, q);
    worst = std::min(worst, (t.rhs - t.lhs) / t.rhs);
  }
  return {at_q < 1e-6 && worst >= -1e-8,
          fmt("relative deficit at Q %.2e, min relative deficit over 1000 fields %.3e", at_q, worst)};
}

Verdict criterion4() {
  const MinimizeResult& r = half_critical_minimizer();
  const MinimizeResult fine = minimize(kParams, fraction_of_critical(0.5, 0.5), Grid(1, 2048, 32.0));
  const double rel = std::abs(r.value - fine.value) / std::abs(fine.value);
  const bool ok = r.status == MinimizeStatus::Converged && fine.status == MinimizeStatus::Converged &&
                  r.value < 0.0 && r.pohozaev < 1e-6 && r.grad_residual < 1e-6 && rel < 1e-4;
  return {ok, fmt("status %s, value %.12f, pohozaev %.2e, stationarity %.2e, 1024 vs 2048 relative %.2e",
                  std::string(to_string(r.status)).c_str(), r.value, r.pohozaev, r.grad_residual, rel)};
}

Verdict criterion5() {
  SystemParams p = kParams;
  p.beta = 0.0;
  const MinimizeResult r = minimize(p, fraction_of_critical(0.5, 0.5), kGrid);
  return {r.status == MinimizeStatus::SpreadDetected && std::abs(r.value) < 1e-3,
          fmt("status %s, value %.3e", std::string(to_string(r.status)).c_str(), r.value)};
}

Verdict criterion6() {
  const MinimizeResult r = minimize(kParams, fraction_of_critical(1.1, 0.5), kGrid);
  const Grid fine(1, 1024, 16.0);
  const MassConstraint crit = fraction_of_critical(1.0, 1.0);
  double e[3];
  const double ts[3] = {1.0, 2.0, 4.0};
  for (int i = 0; i < 3; ++i) e[i] = divergence_family_energy(kParams, mass_critical_q(1), crit, ts[i], fine);
  const bool ok = r.status == MinimizeStatus::DivergenceDetected && e[0] > e[1] && e[1] > e[2] && e[0] < 0.0;
  return {ok, fmt("status %s, family energy t=1,2,4: %.6f %.6f %.6f", std::string(to_string(r.status)).c_str(),
                  e[0], e[1], e[2])};
}

Verdict criterion7() {
  struct Split {
    double a[2], b[2];
  };
  const Split splits[5] = {{{0.6, 0.6}, {0.3, 0.3}},
                           {{0.8, 0.5}, {0.5, 0.2}},
                           {{0.7, 0.9}, {0.4, 0.5}},
                           {{0.9, 0.9}, {0.6, 0.3}},
                           {{0.5, 0.8}, {0.25, 0.4}}};
  bool ok = true;
  std::string detail;
  for (const auto& s : splits) {
    const MinimizeResult ma = minimize(kParams, fraction_of_critical(s.a[0], s.a[1]), kGrid);
    const MinimizeResult mb = minimize(kParams, fraction_of_critical(s.b[0], s.b[1]), kGrid);
    const MinimizeResult mc =
        minimize(kParams, fraction_of_critical(s.a[0] - s.b[0], s.a[1] - s.b[1]), kGrid);
    const double slack = mb.value + mc.value + 2e-4 * std::abs(ma.value) - ma.value;
    const bool conv = ma.status == MinimizeStatus::Converged && mb.status == MinimizeStatus::Converged &&
                      mc.status == MinimizeStatus::Converged;
    ok = ok && conv && slack >= 0.0;
    detail += fmt("%s[%.4f <= %.4f + %.4f]", detail.empty() ? "" : " ", ma.value, mb.value, mc.value);
    if (!conv) detail += "(not converged)";
  }
  return {ok, detail};
}

Verdict criterion8() {
  const StructureReport s = check_minimizer_structure(half_critical_minimizer());
  const double phase = std::max(s.component[0].phase_deviation, s.component[1].phase_deviation);
  const double unimodal = std::max(s.component[0].unimodality_violation, s.component[1].unimodality_violation);
  const bool ok = phase < 1e-6 && unimodal == 0.0 && s.center_offset < s.spacing;
  return {ok, fmt("phase deviation %.2e, unimodality violation %g, center offset %.2e (spacing %.4f)", phase,
                  unimodal, s.center_offset, s.spacing)};
}

struct Drift {
  double mass = 0.0, energy = 0.0;
};

Drift drift_over(const FieldPair& u, double dt, long long steps) {
  const TrajectorySummary s = evolve(u, kParams, {dt, static_cast<double>(steps) * dt, 1000});
  Drift d;
  const auto& s0 = s.samples.front();
  for (const auto& x : s.samples) {
    d.mass = std::max({d.mass, std::abs(x.mass1 / s0.mass1 - 1.0), std::abs(x.mass2 / s0.mass2 - 1.0)});
    d.energy = std::max(d.energy, std::abs(x.energy - s0.energy) / std::abs(s0.energy));
  }
  return d;
}

Verdict criterion9() {
  const FieldPair& u = half_critical_minimizer().pair;
  const Drift full = drift_over(u, kDefaultTimeStep, 10000);
  const Drift half = drift_over(u, kDefaultTimeStep / 2.0, 20000);
  const double ratio = full.energy / half.energy;
  const bool ok = full.mass < 1e-10 && full.energy < 1e-8 && ratio >= 3.5 && ratio <= 4.5;
  return {ok, fmt("mass drift %.2e, energy drift %.2e, energy drift at dt/2 %.2e, ratio %.2f", full.mass,
                  full.energy, half.energy, ratio)};
}

double max_orbit(const TrajectorySummary& s) {
  double m = 0.0;
  for (const auto& x : s.samples) m = std::max(m, x.orbit_distance);
  return m;
}

Verdict criterion10() {
  ProbeOptions po;
  po.perturbation_size = 1e-2;
  po.horizon = 20.0;
  const double perturbed = max_orbit(stability_probe(half_critical_minimizer(), kParams, po));
  po.perturbation_size = 0.0;
  const double still = max_orbit(stability_probe(half_critical_minimizer(), kParams, po));
  return {perturbed < 5e-2 && still < 1e-4,
          fmt("max orbit distance perturbed %.3e, unperturbed %.3e", perturbed, still)};
}

std::vector<MassConstraint> concentration_sequence() {
  auto seq = default_mass_sequence(kParams, 6);
  seq.back() = fraction_of_critical(0.995, 0.995);
  return seq;
}

Verdict criterion11() {
  const auto recs = concentration_run(kParams, concentration_sequence(), kGrid);
  bool eps_dec = true, conv = true;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    conv = conv && recs[k].status == MinimizeStatus::Converged;
    if (k > 0) eps_dec = eps_dec && recs[k].epsilon < recs[k - 1].epsilon;
  }
  const double two_over_n = 2.0 / kParams.dim;
  const auto& last = recs.back();
  const double gap = last.multiplier_identity_gap / two_over_n;
  auto err = [&](std::size_t k) {
    const auto& e = recs[k].profile_errors;
    return e ? std::max((*e)[0], (*e)[1]) : INFINITY;
  };
  const std::size_t n = recs.size();
  const bool err_dec = err(n - 3) > err(n - 2) && err(n - 2) > err(n - 1);
  const double target = (kParams.dim + 2.0) / kParams.dim;
  const double pot = std::abs(last.potential_sum - target) / target;
  const bool ok = conv && eps_dec && gap < 0.05 && err_dec && pot < 0.05;
  return {ok, fmt("eps decreasing %s, identity gap %.2f%%, last profile errors %.3e %.3e %.3e, potential "
                  "sum %.4f (%.2f%% off)%s",
                  eps_dec ? "yes" : "no", 100 * gap, err(n - 3), err(n - 2), err(n - 1), last.potential_sum,
                  100 * pot, conv ? "" : ", not all converged")};
}

struct CliRun {
  int code = -1;
  json manifest;
  std::vector<std::pair<std::string, std::string>> files;  // name, bytes
};

CliRun run_cli(std::vector<std::string> args, const fs::path& dir) {
  args.push_back("--out");
  args.push_back(dir.string());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name == "manifest.json") {
      std::ifstream in(e.path());
      r.manifest = json::parse(in);
      r.manifest.erase("wall_time_s");
      r.manifest["config"].erase("output_dir");
    } else {
      std::ifstream in(e.path(), std::ios::binary);
      r.files.emplace_back(name, std::string(std::istreambuf_iterator<char>(in), {}));
    }
  }
  std::sort(r.files.begin(), r.files.end());
  return r;
}

Verdict criterion12() {
  const fs::path root = fs::temp_directory_path() / ("critmass_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const MassConstraint half = fraction_of_critical(0.5, 0.5);
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases = {
      {"minimize", {"minimize", "--a1", exact(half.a1), "--a2", exact(half.a2)}},
      {"probe",
       {"evolve", "--init", "minimize", "--a1", exact(half.a1), "--a2", exact(half.a2), "--perturb", "0.01",
        "--horizon", "20"}},
      {"concentrate", {"concentrate", "--steps", "6", "--final-fraction", "0.995"}},
  };
  bool ok = true;
  std::string detail;
  for (const auto& [label, args] : cases) {
    auto with_seed = args;
    with_seed.insert(with_seed.end(), {"--seed", "2024", "--grid-n", "1024", "--box-l", "32"});
    const CliRun a = run_cli(with_seed, root / (label + "_a"));
    const CliRun b = run_cli(with_seed, root / (label + "_b"));
    const bool same = a.code == 0 && b.code == 0 && a.manifest == b.manifest && a.files == b.files;
    ok = ok && same;
    detail += fmt("%s%s %s (%zu files)", detail.empty() ? "" : ", ", label.c_str(),
                  same ? "identical" : "DIFFERS", a.files.size());
  }
  fs::remove_all(root);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria = {
      criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
      criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};
  // Criteria 8 and 12 carry no time limit of their own.
  const double limits[] = {1, 10, 30, 60, 60, 60, 300, INFINITY, 120, 300, 600, INFINITY};
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < limits[i];
    const bool pass = v.pass && in_time;
    if (!pass) ++failures;
    std::printf("criterion %d: %s  %s; %.2f s (limit %g s)%s\n", id, pass ? "PASS" : "FAIL", v.detail.c_str(),
                secs, limits[i], in_time ? "" : " over time");
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
