#include "critmass/cli.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "critmass/concentration_lab.hpp"
#include "critmass/energy_model.hpp"
#include "critmass/error.hpp"
#include "critmass/field_io.hpp"
#include "critmass/mass_minimizer.hpp"
#include "critmass/nls_dynamics.hpp"
#include "critmass/scalar_ground.hpp"

namespace critmass::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

// Usage problems that are not tied to a library error kind.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A flag that can also be supplied through the subcommand block of --config.
struct Binding {
  std::string key;
  CLI::Option* option = nullptr;
  std::function<void(const json&)> assign;
};

struct Command {
  CLI::App* app = nullptr;
  std::vector<Binding> bindings;
  CLI::Option* grid_n_opt = nullptr;
  CLI::Option* box_l_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* params_opt = nullptr;
  CLI::Option* out_opt = nullptr;

  template <typename T>
  CLI::Option* add(const std::string& flag, const std::string& key, T& var, const std::string& desc) {
    CLI::Option* opt = app->add_option(flag, var, desc);
    bindings.push_back({key, opt, [&var](const json& j) { var = j.get<T>(); }});
    return opt;
  }
  CLI::Option* add_flag(const std::string& flag, const std::string& key, bool& var,
                        const std::string& desc) {
    CLI::Option* opt = app->add_flag(flag, var, desc);
    bindings.push_back({key, opt, [&var](const json& j) { var = j.get<bool>(); }});
    return opt;
  }
};

struct Common {
  std::string config_path;
  std::string params_path;
  std::string out_dir = "out";
  int grid_n = 1024;
  double box_l = 32.0;
  std::uint64_t seed = 0;
};

void add_common(Command& cmd, Common& c) {
  cmd.app->add_option("--config", c.config_path, "JSON run configuration (flags win)");
  cmd.params_opt = cmd.app->add_option("--params", c.params_path, "JSON parameter file {dim, mu1, mu2, beta, r1, r2}");
  cmd.grid_n_opt = cmd.app->add_option("--grid-n", c.grid_n, "points per axis (power of two)");
  cmd.box_l_opt = cmd.app->add_option("--box-l", c.box_l, "box half width");
  cmd.seed_opt = cmd.app->add_option("--seed", c.seed, "random seed");
  cmd.out_opt = cmd.app->add_option("--out", c.out_dir, "output directory");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("malformed JSON in " + path + ": " + e.what());
  }
}

void require_object(const json& j, const std::string& what) {
  if (!j.is_object()) throw UsageError(what + " must be a JSON object");
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("CRITMASS_SEED");
  if (!raw || !*raw) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("CRITMASS_SEED is not an unsigned integer: ") + raw);
  }
}

// Merges --config, --params and the environment into `config`; flags win over
// the config file, and the seed falls back to CRITMASS_SEED before the file.
RunConfig resolve(const std::string& name, Command& cmd, Common& c) {
  RunConfig config;
  json file = json::object();
  if (!c.config_path.empty()) {
    file = read_json_file(c.config_path);
    require_object(file, "config");
    for (const auto& [key, value] : file.items()) {
      if (key != "params" && key != "grid" && key != "seed" && key != "output_dir" && key != name) {
        throw UsageError("unknown config key '" + key + "'");
      }
    }
  }
  try {
    if (cmd.params_opt->count() > 0) {
      config.params = params_from_json(read_json_file(c.params_path));
    } else if (file.contains("params")) {
      config.params = params_from_json(file["params"]);
    }
    if (file.contains("grid")) {
      const json& g = file["grid"];
      require_object(g, "config grid");
      for (const auto& [key, value] : g.items()) {
        if (key == "points_per_axis") {
          if (cmd.grid_n_opt->count() == 0) c.grid_n = value.get<int>();
        } else if (key == "half_width") {
          if (cmd.box_l_opt->count() == 0) c.box_l = value.get<double>();
        } else {
          throw UsageError("unknown config key 'grid." + key + "'");
        }
      }
    }
    if (cmd.seed_opt->count() == 0) {
      if (auto s = env_seed()) {
        c.seed = *s;
      } else if (file.contains("seed")) {
        c.seed = file["seed"].get<std::uint64_t>();
      }
    }
    if (file.contains(name)) {
      const json& block = file[name];
      require_object(block, "config " + name);
      for (const auto& [key, value] : block.items()) {
        auto it = std::find_if(cmd.bindings.begin(), cmd.bindings.end(),
                               [&](const Binding& b) { return b.key == key; });
        if (it == cmd.bindings.end()) throw UsageError("unknown config key '" + name + "." + key + "'");
        if (it->option->count() == 0) it->assign(value);
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config value has the wrong type: ") + e.what());
  }
  config.grid_n = c.grid_n;
  config.box_l = c.box_l;
  config.seed = c.seed;
  if (cmd.out_opt->count() == 0 && file.contains("output_dir")) {
    config.output_dir = file["output_dir"].get<std::string>();
  } else {
    config.output_dir = c.out_dir;
  }
  return config;
}

Grid make_grid(const RunConfig& config) {
  return Grid(config.params.dim, config.grid_n, config.box_l);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir_.string() + ": " + ec.message());
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void text(const std::string& name, const std::string& content) const {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path(name).string());
    out << content;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path(name).string());
  }
  void write_json(const std::string& name, const json& j) const { text(name, j.dump(2) + "\n"); }
  void pair(const std::string& stem, const FieldPair& p) const {
    save_field(path(stem + "_u1.fld"), p.first);
    save_field(path(stem + "_u2.fld"), p.second);
  }

  /// Notes a pair whose amplitude at the box edge exceeds 1e-8 of its maximum.
  void check_boundary(const std::string& label, const FieldPair& p) const {
    const double edge = std::max(boundary_amplitude(p.first), boundary_amplitude(p.second));
    if (edge > kBoundaryWarning) {
      std::ostringstream msg;
      msg << label << ": boundary amplitude " << edge << " of max exceeds " << kBoundaryWarning
          << "; enlarge --box-l";
      warnings_.push_back(msg.str());
    }
  }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  static constexpr double kBoundaryWarning = 1e-8;
  fs::path dir_;
  mutable std::vector<std::string> warnings_;
};

json masses_json(const MassConstraint& m) { return {{"a1", m.a1}, {"a2", m.a2}}; }

struct Outcome {
  json results = json::object();
  std::string status = "ok";
  int code = kExitOk;
};

// ---- q-profile -------------------------------------------------------------

struct QProfileOpts {
  int dim = 0;
  double exponent = 0.0;
  double tol = 1e-5;
};

Outcome run_q_profile(const RunConfig& config, const QProfileOpts& o, const Output& out) {
  const int dim = o.dim > 0 ? o.dim : config.params.dim;
  const double p = o.exponent > 0.0 ? o.exponent : 2.0 + 4.0 / dim;
  // The cached mass-critical profile already meets the default tolerance.
  const bool cached = p == 2.0 + 4.0 / dim && o.tol >= 1e-5;
  const GroundStateQ q = cached ? mass_critical_q(dim) : solve_q(dim, p, o.tol);
  std::ostringstream csv;
  csv << "radius,value\n";
  for (std::size_t k = 0; k < q.value.size(); ++k) csv << fmt(q.radius(k)) << ',' << fmt(q.value[k]) << '\n';
  out.text("q_profile.csv", csv.str());
  json summary = {{"dim", q.dim},           {"p", q.exponent},
                  {"mass", q.mass},         {"kinetic", q.kinetic},
                  {"gn_constant", q.gn_constant}, {"center_value", q.center_value},
                  {"residual", q.residual}};
  out.write_json("q_summary.json", summary);
  return {summary};
}

// ---- minimize / scan -------------------------------------------------------

struct MinimizeOpts {
  double a1 = std::nan("");
  double a2 = std::nan("");
  double tol = 1e-8;
  int restarts = 4;
  int max_iters = 20000;
  bool require_converged = false;
};

MinimizeOptions minimizer_options(double tol, int restarts, int max_iters, std::uint64_t seed) {
  MinimizeOptions m;
  m.grad_tol = tol;
  m.restarts = restarts;
  m.max_iters = max_iters;
  m.seed = seed;
  return m;
}

MassConstraint required_masses(double a1, double a2, const std::string& name) {
  if (std::isnan(a1)) throw UsageError("--a1 is required (or " + name + ".a1 in --config)");
  if (std::isnan(a2)) throw UsageError("--a2 is required (or " + name + ".a2 in --config)");
  MassConstraint m{a1, a2};
  m.validate();
  return m;
}

json result_json(const MinimizeResult& r) {
  return {{"status", std::string(to_string(r.status))},
          {"value", r.value},
          {"lambda1", r.multipliers.lambda1},
          {"lambda2", r.multipliers.lambda2},
          {"grad_residual", r.grad_residual},
          {"pohozaev", r.pohozaev},
          {"iterations", r.iterations},
          {"guess_index", r.guess_index},
          {"mass1", mass(r.pair.first)},
          {"mass2", mass(r.pair.second)}};
}

Outcome run_minimize(const RunConfig& config, const MinimizeOpts& o, const Output& out) {
  const MassConstraint m = required_masses(o.a1, o.a2, "minimize");
  const Grid grid = make_grid(config);
  const MinimizeResult r =
      minimize(config.params, m, grid, minimizer_options(o.tol, o.restarts, o.max_iters, config.seed));
  out.check_boundary("minimizer", r.pair);
  json res = result_json(r);
  res["masses"] = masses_json(m);
  res["satisfies_a1"] = config.params.satisfies_a1();
  res["satisfies_a2"] = config.params.satisfies_a2();
  if (config.params.dim <= 3) {
    const auto [s1, s2] = critical_masses(config.params, mass_critical_q(config.params.dim));
    res["critical_masses"] = masses_json({s1, s2});
  }
  out.write_json("minimize.json", res);
  out.pair("minimizer", r.pair);
  Outcome oc{res, std::string(to_string(r.status))};
  if (o.require_converged && r.status != MinimizeStatus::Converged) oc.code = kExitNumerical;
  return oc;
}

struct ScanOpts {
  std::string masses_csv;
  double tol = 1e-8;
  int restarts = 4;
  int max_iters = 20000;
  int jobs = 1;
  bool require_converged = false;
};

std::vector<MassConstraint> read_mass_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<MassConstraint> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected a1,a2");
    try {
      std::size_t u1 = 0, u2 = 0;
      const std::string s1 = line.substr(0, comma), s2 = line.substr(comma + 1);
      const double a1 = std::stod(s1, &u1);
      const double a2 = std::stod(s2, &u2);
      if (s1.find_first_not_of(" \t", u1) != std::string::npos ||
          s2.find_first_not_of(" \t", u2) != std::string::npos) {
        throw std::invalid_argument(line);
      }
      rows.push_back({a1, a2});
    } catch (const std::invalid_argument&) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected numeric a1,a2");
    }
  }
  for (const auto& m : rows) m.validate();
  return rows;
}

Outcome run_scan(const RunConfig& config, const ScanOpts& o, const Output& out) {
  if (o.masses_csv.empty()) throw UsageError("--masses is required (or scan.masses in --config)");
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  const auto masses = read_mass_csv(o.masses_csv);
  const auto rows = scan_m(config.params, masses, make_grid(config),
                           minimizer_options(o.tol, o.restarts, o.max_iters, config.seed), o.jobs);
  std::ostringstream csv;
  csv << "a1,a2,value,lambda1,lambda2,status\n";
  json arr = json::array();
  bool all = true;
  for (const auto& r : rows) {
    csv << fmt(r.masses.a1) << ',' << fmt(r.masses.a2) << ',' << fmt(r.value) << ','
        << fmt(r.multipliers.lambda1) << ',' << fmt(r.multipliers.lambda2) << ',' << to_string(r.status) << '\n';
    arr.push_back({{"masses", masses_json(r.masses)},
                   {"value", r.value},
                   {"lambda1", r.multipliers.lambda1},
                   {"lambda2", r.multipliers.lambda2},
                   {"status", std::string(to_string(r.status))}});
    all = all && r.status == MinimizeStatus::Converged;
  }
  out.text("scan.csv", csv.str());
  Outcome oc{{{"rows", arr}}, all ? "ok" : "not all converged"};
  if (o.require_converged && !all) oc.code = kExitNumerical;
  return oc;
}

// ---- evolve ----------------------------------------------------------------

struct EvolveOpts {
  std::string init = "minimize";
  double a1 = std::nan("");
  double a2 = std::nan("");
  double tol = 1e-8;
  int restarts = 4;
  double dt = kDefaultTimeStep;
  double horizon = 1.0;
  int sample_every = 100;
  double perturb = 0.0;
  bool raw_perturb = false;
};

Outcome run_evolve(const RunConfig& config, const EvolveOpts& o, const Output& out) {
  if (!(o.perturb >= 0.0) || o.perturb > 0.1) throw UsageError("--perturb must lie in [0, 0.1]");
  json res = json::object();
  std::optional<FieldPair> initial;
  if (o.init == "minimize") {
    const MassConstraint m = required_masses(o.a1, o.a2, "evolve");
    const MinimizeResult r = minimize(config.params, m, make_grid(config),
                                      minimizer_options(o.tol, o.restarts, 20000, config.seed));
    res["minimize"] = result_json(r);
    if (r.status != MinimizeStatus::Converged) {
      out.write_json("evolve.json", res);
      return {res, std::string(to_string(r.status)), kExitNumerical};
    }
    initial = r.pair;
  } else {
    initial = FieldPair(load_field(o.init + "_u1.fld"), load_field(o.init + "_u2.fld"));
    if (initial->grid().dim() != config.params.dim) {
      throw Error(ErrorKind::InvalidGrid, "initial fields do not match the parameter dimension");
    }
  }
  const FieldPair reference = *initial;
  FieldPair start = *initial;
  if (o.perturb > 0.0) {
    const FieldPair w = random_perturbation(reference, o.perturb, config.seed);
    start.first += w.first;
    start.second += w.second;
    if (!o.raw_perturb) start = project_masses(start, {mass(reference.first), mass(reference.second)});
  }
  out.check_boundary("initial state", start);
  FieldPair final_state = start;
  const TrajectorySummary s =
      evolve(start, config.params, {o.dt, o.horizon, o.sample_every}, &reference, &final_state);

  std::ostringstream csv;
  csv << "t,mass1,mass2,energy,orbit_distance\n";
  double max_orbit = 0.0, mass_drift = 0.0, energy_drift = 0.0;
  const auto& s0 = s.samples.front();
  for (const auto& x : s.samples) {
    csv << fmt(x.t) << ',' << fmt(x.mass1) << ',' << fmt(x.mass2) << ',' << fmt(x.energy) << ','
        << fmt(x.orbit_distance) << '\n';
    max_orbit = std::max(max_orbit, x.orbit_distance);
    mass_drift = std::max({mass_drift, std::abs(x.mass1 / s0.mass1 - 1.0), std::abs(x.mass2 / s0.mass2 - 1.0)});
    energy_drift = std::max(energy_drift, std::abs(x.energy - s0.energy) / std::abs(s0.energy));
  }
  out.text("trajectory.csv", csv.str());
  out.pair("final", final_state);
  out.check_boundary("final state", final_state);
  res["dt"] = s.dt;
  res["scheme_order"] = s.scheme_order;
  res["samples"] = s.samples.size();
  res["max_orbit_distance"] = max_orbit;
  res["mass_drift"] = mass_drift;
  res["energy_drift"] = energy_drift;
  res["final_time"] = s.samples.back().t;
  out.write_json("evolve.json", res);
  return {res};
}

// ---- concentrate -----------------------------------------------------------

struct ConcentrateOpts {
  int steps = 6;
  double final_fraction = 0.0;
  double tol = 1e-8;
  int restarts = 4;
  double zoom_width = 16.0;
  bool parallel = false;
  int jobs = 1;
  bool require_converged = false;
};

Outcome run_concentrate(const RunConfig& config, const ConcentrateOpts& o, const Output& out) {
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  auto seq = default_mass_sequence(config.params, o.steps);
  if (o.final_fraction > 0.0) {
    if (!(o.final_fraction < 1.0)) throw UsageError("--final-fraction must lie in (0, 1)");
    const auto [s1, s2] = critical_masses(config.params, mass_critical_q(config.params.dim));
    seq.back() = {o.final_fraction * s1, o.final_fraction * s2};
  }
  ConcentrationOptions co;
  co.minimize = minimizer_options(o.tol, o.restarts, 20000, config.seed);
  co.parallel = o.parallel;
  co.jobs = o.jobs;
  co.zoom_width = o.zoom_width;
  const auto recs = concentration_run(config.params, seq, make_grid(config), co);

  std::ostringstream csv;
  csv << "k,a1,a2,status,epsilon,lambda1,lambda2,rescaled_lambda1,rescaled_lambda2,"
         "identity_gap,alpha1,alpha2,profile_error1,profile_error2,potential_sum,coupling_decay,half_width\n";
  json arr = json::array();
  bool all = true;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const auto& r = recs[k];
    const std::string e1 = r.profile_errors ? fmt((*r.profile_errors)[0]) : "";
    const std::string e2 = r.profile_errors ? fmt((*r.profile_errors)[1]) : "";
    csv << k + 1 << ',' << fmt(r.masses.a1) << ',' << fmt(r.masses.a2) << ',' << to_string(r.status) << ','
        << fmt(r.epsilon) << ',' << fmt(r.multipliers.lambda1) << ',' << fmt(r.multipliers.lambda2) << ','
        << fmt(r.rescaled_multipliers.lambda1) << ',' << fmt(r.rescaled_multipliers.lambda2) << ','
        << fmt(r.multiplier_identity_gap) << ',' << fmt(r.alpha[0]) << ',' << fmt(r.alpha[1]) << ',' << e1
        << ',' << e2 << ',' << fmt(r.potential_sum) << ',' << fmt(r.coupling_decay) << ','
        << fmt(r.half_width) << '\n';
    json rec = {{"masses", masses_json(r.masses)},
                {"status", std::string(to_string(r.status))},
                {"epsilon", r.epsilon},
                {"lambda1", r.multipliers.lambda1},
                {"lambda2", r.multipliers.lambda2},
                {"identity_gap", r.multiplier_identity_gap},
                {"alpha", {r.alpha[0], r.alpha[1]}},
                {"potential_sum", r.potential_sum},
                {"coupling_decay", r.coupling_decay}};
    if (r.profile_errors) rec["profile_errors"] = {(*r.profile_errors)[0], (*r.profile_errors)[1]};
    arr.push_back(rec);
    if (r.aligned) {
      out.pair("record" + std::to_string(k + 1) + "_aligned", *r.aligned);
      out.check_boundary("record " + std::to_string(k + 1) + " zoom grid", *r.aligned);
    }
    if (r.predicted) out.pair("record" + std::to_string(k + 1) + "_predicted", *r.predicted);
    all = all && r.status == MinimizeStatus::Converged;
  }
  out.text("concentration.csv", csv.str());
  Outcome oc{{{"records", arr}}, all ? "ok" : "not all converged"};
  if (o.require_converged && !all) oc.code = kExitNumerical;
  return oc;
}

// ---- verify ----------------------------------------------------------------

struct VerifyOpts {
  int random_fields = 200;
  int steps = 1000;
};

Outcome run_verify(const RunConfig& config, const VerifyOpts& o, const Output& out) {
  const SystemParams& p = config.params;
  const Grid grid = make_grid(config);
  const GroundStateQ& q = mass_critical_q(p.dim);
  json checks = json::array();
  bool all = true;
  auto check = [&](const std::string& name, double value, double bound, bool pass) {
    checks.push_back({{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
    all = all && pass;
  };

  const Field qs = sample_profile(q, grid);
  const GnTerms gq = gn_terms(qs, q);
  const double gq_rel = std::abs(gq.rhs - gq.lhs) / gq.rhs;
  check("gn_equality_at_q", gq_rel, 1e-6, gq_rel < 1e-6);

  double worst = INFINITY;
  for (int s = 0; s < o.random_fields; ++s) {
    const Field f = random_band_limited(grid, config.seed + static_cast<std::uint64_t>(s));
    const GnTerms t = gn_terms(f, q);
    worst = std::min(worst, (t.rhs - t.lhs) / t.rhs);
  }
  check("gn_random_min_relative_deficit", worst, -1e-8, worst >= -1e-8);

  const double pk = kinetic(qs);
  const double pp = lp_integral(qs, q.exponent);
  const double poh = std::abs(pk - p.dim / (p.dim + 2.0) * pp) / pk;
  check("pohozaev_at_q", poh, 1e-6, poh < 1e-6);

  // Conservation is checked on a half-critical minimizer, which the scheme
  // keeps stationary up to round-off.
  const auto [s1, s2] = critical_masses(p, q);
  MinimizeOptions mopt;
  mopt.seed = config.seed;
  const MinimizeResult m = minimize(p, {0.5 * s1, 0.5 * s2}, grid, mopt);
  check("minimizer_converged", m.grad_residual, mopt.grad_tol, m.status == MinimizeStatus::Converged);
  const TrajectorySummary s =
      evolve(m.pair, p, {kDefaultTimeStep, o.steps * kDefaultTimeStep, std::max(1, o.steps / 10)});
  double md = 0.0, ed = 0.0;
  const auto& s0 = s.samples.front();
  for (const auto& x : s.samples) {
    md = std::max({md, std::abs(x.mass1 / s0.mass1 - 1.0), std::abs(x.mass2 / s0.mass2 - 1.0)});
    ed = std::max(ed, std::abs(x.energy - s0.energy) / std::abs(s0.energy));
  }
  check("mass_conservation", md, 1e-10, md < 1e-10);
  check("energy_conservation", ed, 1e-8, ed < 1e-8);

  json res = {{"checks", checks}, {"all_pass", all}};
  out.write_json("verify.json", res);
  return {res, all ? "ok" : "failed", all ? kExitOk : kExitNumerical};
}

bool is_validation(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidGrid:
    case ErrorKind::InvalidParams:
    case ErrorKind::ExponentMismatch:
    case ErrorKind::ZeroField:
    case ErrorKind::ZeroMass:
    case ErrorKind::ZeroKinetic:
    case ErrorKind::Io:
      return true;
    default:
      return false;
  }
}

json versions() {
  return {{"critmass", kVersion},
          {"compiler", __VERSION__},
          {"fftw", std::string(fftw_version)},
          {"cli11", CLI11_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

}  // namespace

json to_json(const RunConfig& config) {
  return {{"params", critmass::to_json(config.params)},
          {"grid", {{"points_per_axis", config.grid_n}, {"half_width", config.box_l}}},
          {"seed", config.seed},
          {"output_dir", config.output_dir.string()},
          {"options", config.options}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for coupled mass-critical NLS systems", "critmass"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  std::map<std::string, Command> cmds;
  auto sub = [&](const std::string& name, const std::string& desc) -> Command& {
    Command& c = cmds[name];
    c.app = app.add_subcommand(name, desc);
    add_common(c, common);
    return c;
  };

  QProfileOpts qo;
  {
    Command& c = sub("q-profile", "radial ground state Q and its invariants");
    c.add("--dim", "dim", qo.dim, "dimension (defaults to the params dim)");
    c.add("--exponent", "exponent", qo.exponent, "exponent p (defaults to 2 + 4/N)");
    c.add("--tol", "tol", qo.tol, "shooting tolerance");
  }
  MinimizeOpts mo;
  {
    Command& c = sub("minimize", "constrained minimization on S(a1, a2)");
    c.add("--a1", "a1", mo.a1, "mass of the first component");
    c.add("--a2", "a2", mo.a2, "mass of the second component");
    c.add("--tol", "tol", mo.tol, "relative stationarity tolerance");
    c.add("--restarts", "restarts", mo.restarts, "number of initial guesses");
    c.add("--max-iters", "max_iters", mo.max_iters, "iteration cap per guess");
    c.add_flag("--require-converged", "require_converged", mo.require_converged,
               "exit 3 unless the status is Converged");
  }
  ScanOpts so;
  {
    Command& c = sub("scan", "minimize over a CSV of (a1, a2) rows");
    c.add("--masses", "masses", so.masses_csv, "CSV file of a1,a2 rows");
    c.add("--tol", "tol", so.tol, "relative stationarity tolerance");
    c.add("--restarts", "restarts", so.restarts, "number of initial guesses");
    c.add("--max-iters", "max_iters", so.max_iters, "iteration cap per guess");
    c.add("--jobs", "jobs", so.jobs, "worker threads");
    c.add_flag("--require-converged", "require_converged", so.require_converged,
               "exit 3 unless every row converged");
  }
  EvolveOpts eo;
  {
    Command& c = sub("evolve", "split-step evolution of a field pair");
    c.add("--init", "init", eo.init, "'.fld' prefix (reads <prefix>_u1.fld, <prefix>_u2.fld) or 'minimize'");
    c.add("--a1", "a1", eo.a1, "first mass when --init minimize");
    c.add("--a2", "a2", eo.a2, "second mass when --init minimize");
    c.add("--tol", "tol", eo.tol, "stationarity tolerance when --init minimize");
    c.add("--restarts", "restarts", eo.restarts, "initial guesses when --init minimize");
    c.add("--dt", "dt", eo.dt, "time step");
    c.add("--horizon", "horizon", eo.horizon, "final time");
    c.add("--sample-every", "sample_every", eo.sample_every, "steps between samples");
    c.add("--perturb", "perturb", eo.perturb, "relative H1 size of a random perturbation");
    c.add_flag("--raw-perturb", "raw_perturb", eo.raw_perturb, "keep the perturbed masses instead of restoring them");
  }
  ConcentrateOpts co;
  {
    Command& c = sub("concentrate", "minimizers along masses approaching the critical pair");
    c.add("--steps", "steps", co.steps, "sequence length K of (1 - 2^-k) a*");
    c.add("--final-fraction", "final_fraction", co.final_fraction, "replace the last mass by this fraction of a*");
    c.add("--tol", "tol", co.tol, "relative stationarity tolerance");
    c.add("--restarts", "restarts", co.restarts, "number of initial guesses");
    c.add("--zoom-width", "zoom_width", co.zoom_width, "zoom grid half width in units of alpha^-1/2");
    c.add_flag("--parallel", "parallel", co.parallel, "cold-start records independently");
    c.add("--jobs", "jobs", co.jobs, "worker threads with --parallel");
    c.add_flag("--require-converged", "require_converged", co.require_converged,
               "exit 3 unless every record converged");
  }
  VerifyOpts vo;
  {
    Command& c = sub("verify", "invariant checks: GN sharpness, Pohozaev on Q, conservation");
    c.add("--random-fields", "random_fields", vo.random_fields, "random fields for the GN check");
    c.add("--steps", "steps", vo.steps, "evolution steps for the conservation check");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  std::string name;
  for (const auto& [n, c] : cmds) {
    if (c.app->parsed()) name = n;
  }
  Command& cmd = cmds[name];
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig config;
  std::optional<Output> output;
  try {
    config = resolve(name, cmd, common);
    config.params.validate();
    output.emplace(config.output_dir);
  } catch (const Error& e) {
    err << "critmass " << name << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const UsageError& e) {
    err << "critmass " << name << ": " << e.what() << '\n';
    return kExitValidation;
  }

  Outcome oc;
  try {
    if (name == "q-profile") {
      config.options = {{"dim", qo.dim}, {"exponent", qo.exponent}, {"tol", qo.tol}};
      oc = run_q_profile(config, qo, *output);
    } else if (name == "minimize") {
      config.options = {{"a1", mo.a1}, {"a2", mo.a2}, {"tol", mo.tol}, {"restarts", mo.restarts},
                        {"max_iters", mo.max_iters}, {"require_converged", mo.require_converged}};
      oc = run_minimize(config, mo, *output);
    } else if (name == "scan") {
      config.options = {{"masses", so.masses_csv}, {"tol", so.tol}, {"restarts", so.restarts},
                        {"max_iters", so.max_iters}, {"jobs", so.jobs},
                        {"require_converged", so.require_converged}};
      oc = run_scan(config, so, *output);
    } else if (name == "evolve") {
      config.options = {{"init", eo.init}, {"a1", eo.a1}, {"a2", eo.a2}, {"tol", eo.tol},
                        {"restarts", eo.restarts}, {"dt", eo.dt}, {"horizon", eo.horizon},
                        {"sample_every", eo.sample_every}, {"perturb", eo.perturb},
                        {"raw_perturb", eo.raw_perturb}};
      oc = run_evolve(config, eo, *output);
    } else if (name == "concentrate") {
      config.options = {{"steps", co.steps}, {"final_fraction", co.final_fraction}, {"tol", co.tol},
                        {"restarts", co.restarts}, {"zoom_width", co.zoom_width},
                        {"parallel", co.parallel}, {"jobs", co.jobs},
                        {"require_converged", co.require_converged}};
      oc = run_concentrate(config, co, *output);
    } else {
      config.options = {{"random_fields", vo.random_fields}, {"steps", vo.steps}};
      oc = run_verify(config, vo, *output);
    }
  } catch (const UsageError& e) {
    err << "critmass " << name << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    err << "critmass " << name << ": " << e.what() << '\n';
    if (is_validation(e.kind())) return kExitValidation;
    oc.status = std::string(to_string(e.kind()));
    oc.code = kExitNumerical;
    oc.results = {{"error", e.what()}};
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest = {{"subcommand", name},
                   {"config", to_json(config)},
                   {"seed", config.seed},
                   {"versions", versions()},
                   {"wall_time_s", wall},
                   {"status", oc.status},
                   {"exit_code", oc.code},
                   {"results", oc.results}};
  if (!output->warnings().empty()) {
    manifest["warnings"] = output->warnings();
    for (const auto& w : output->warnings()) err << "critmass " << name << ": warning: " << w << '\n';
  }
  try {
    output->write_json("manifest.json", manifest);
  } catch (const Error& e) {
    err << "critmass " << name << ": " << e.what() << '\n';
    return kExitValidation;
  }
  out << name << ": " << oc.status << " (" << output->path("manifest.json").string() << ")\n";
  return oc.code;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace critmass::cli
