#include "critmass/params.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "critmass/error.hpp"

namespace critmass {

std::optional<std::string> SystemParams::violation() const {
  std::ostringstream os;
  if (dim < 1) return std::string("(H): N >= 1 violated");
  if (dim > 3) return std::string("N must be 1, 2 or 3 (N >= 4 is not supported)");
  if (!(mu1 > 0.0)) return std::string("(H): mu1 > 0 violated");
  if (!(mu2 > 0.0)) return std::string("(H): mu2 > 0 violated");
  // beta = 0 is admitted as the decoupled limit; (H) itself asks for beta > 0.
  if (!(beta >= 0.0)) return std::string("(H): beta > 0 violated (beta = 0 allowed as decoupled case)");
  if (!(r1 > 1.0)) return std::string("(H): r1 > 1 violated");
  if (!(r2 > 1.0)) return std::string("(H): r2 > 1 violated");
  const double bound = 2.0 + 4.0 / dim;
  if (!(r1 + r2 < bound)) {
    os << "(H): r1 + r2 < 2 + 4/N violated (r1 + r2 = " << r1 + r2 << ", bound " << bound << ")";
    return os.str();
  }
  return std::nullopt;
}

void SystemParams::validate() const {
  if (auto v = violation()) throw Error(ErrorKind::InvalidParams, *v);
}

namespace {
bool one_sided(int dim, double r_self, double r_other) {
  if (!(r_self < 2.0)) return false;
  if (dim <= 2) return true;
  return 2.0 * r_other / (2.0 - r_self) <= 2.0 * dim / (dim - 2.0);
}
}  // namespace

bool SystemParams::satisfies_a1() const { return one_sided(dim, r2, r1); }
bool SystemParams::satisfies_a2() const { return one_sided(dim, r1, r2); }

void MassConstraint::validate() const {
  if (!(a1 > 0.0) || !(a2 > 0.0) || !std::isfinite(a1) || !std::isfinite(a2)) {
    throw Error(ErrorKind::InvalidParams, "masses a1, a2 must be positive");
  }
}

SystemParams params_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"dim", "mu1", "mu2", "beta", "r1", "r2"};
  if (!j.is_object()) throw Error(ErrorKind::InvalidParams, "parameter file must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorKind::InvalidParams, "unknown parameter key '" + key + "'");
  }
  SystemParams p;
  try {
    if (j.contains("dim")) p.dim = j.at("dim").get<int>();
    if (j.contains("mu1")) p.mu1 = j.at("mu1").get<double>();
    if (j.contains("mu2")) p.mu2 = j.at("mu2").get<double>();
    if (j.contains("beta")) p.beta = j.at("beta").get<double>();
    if (j.contains("r1")) p.r1 = j.at("r1").get<double>();
    if (j.contains("r2")) p.r2 = j.at("r2").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidParams, std::string("bad parameter value: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const SystemParams& p) {
  return {{"dim", p.dim}, {"mu1", p.mu1}, {"mu2", p.mu2},
          {"beta", p.beta}, {"r1", p.r1}, {"r2", p.r2}};
}

}  // namespace critmass
