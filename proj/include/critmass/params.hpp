#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace critmass {

/// (N, mu1, mu2, beta, r1, r2) of the coupled mass-critical system.
struct SystemParams {
  int dim = 1;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double beta = 1.0;
  double r1 = 1.5;
  double r2 = 1.5;

  /// First violated clause of N >= 1, mu_i > 0, beta > 0, r_i > 1,
  /// r1 + r2 < 2 + 4/N; nullopt when all hold. Also rejects N outside 1..3.
  /// beta == 0 is accepted so the decoupled problem can be run.
  std::optional<std::string> violation() const;
  /// Throws Error(InvalidParams) naming the violated clause.
  void validate() const;

  /// Extra hypotheses used for boundary-mass compactness; reported only.
  bool satisfies_a1() const;
  bool satisfies_a2() const;

  double mass_critical_exponent() const { return 2.0 + 4.0 / dim; }
  double mu(int i) const { return i == 0 ? mu1 : mu2; }
  double r(int i) const { return i == 0 ? r1 : r2; }
};

struct MassConstraint {
  double a1 = 0.0;
  double a2 = 0.0;

  double operator[](int i) const { return i == 0 ? a1 : a2; }
  void validate() const;
};

struct Multipliers {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  double operator[](int i) const { return i == 0 ? lambda1 : lambda2; }
};

/// Parses {dim, mu1, mu2, beta, r1, r2}; unknown keys are rejected by name.
/// Missing keys keep their defaults. Validates the result.
SystemParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SystemParams& p);

}  // namespace critmass
