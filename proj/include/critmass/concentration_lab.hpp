#pragma once

#include <array>
#include <optional>
#include <vector>

#include "critmass/field.hpp"
#include "critmass/mass_minimizer.hpp"
#include "critmass/params.hpp"
#include "critmass/scalar_ground.hpp"

namespace critmass {

/// (kinetic(u1) + kinetic(u2))^{-1/2}; throws ZeroKinetic.
double epsilon_of(const FieldPair& pair);

/// (eps^{N/2} u1(eps x), eps^{N/2} u2(eps x)) on the pair's own grid.
FieldPair rescale_to_unit(const FieldPair& pair);
/// Same rescaling sampled onto `zoom`, after moving the pair's center to the origin.
FieldPair rescale_to_unit(const FieldPair& pair, const Grid& zoom);

/// mu^{-N/4} alpha^{N/4} Q(alpha^{1/2} |x|); the phase is left to alignment.
Field predicted_profile(const GroundStateQ& q, double mu, double alpha, const Grid& grid);

/// (1 - 2^{-k}) (a1*, a2*) for k = 1..steps.
std::vector<MassConstraint> default_mass_sequence(const SystemParams& params, int steps = 6);

struct ConcentrationOptions {
  MinimizeOptions minimize;
  /// Reuse the previous minimizer as the initial guess.
  bool warm_start = true;
  /// Cold-start every record independently, `jobs` at a time (ignores warm_start).
  bool parallel = false;
  int jobs = 1;
  /// Zoom grid half width in units of alpha^{-1/2}.
  double zoom_width = 16.0;
  /// Shrink the physical box with the previous epsilon.
  bool adapt_box = true;
};

struct ConcentrationRecord {
  MassConstraint masses;
  MinimizeStatus status = MinimizeStatus::IterLimit;
  double value = 0.0;
  Multipliers multipliers;
  double epsilon = 0.0;
  /// (eps^2 lambda1, eps^2 lambda2).
  Multipliers rescaled_multipliers;
  /// |a1* eps^2 lambda1 + a2* eps^2 lambda2 - 2/N|.
  double multiplier_identity_gap = 0.0;
  std::array<double, 2> alpha{};
  /// Relative H1 errors of the aligned rescaled pair against the predicted
  /// profiles; empty unless converged with positive alphas.
  std::optional<std::array<double, 2>> profile_errors;
  /// mu1 int |v1|^p + mu2 int |v2|^p for the rescaled pair.
  double potential_sum = 0.0;
  /// eps^{2 - N(r1 + r2 - 2)/2} C(v).
  double coupling_decay = 0.0;
  /// Physical box half width used for the minimization.
  double half_width = 0.0;
  /// Aligned rescaled pair and the predicted pair on the zoom grid.
  std::optional<FieldPair> aligned;
  std::optional<FieldPair> predicted;
};

/// Minimizes along `masses`, rescales each minimizer to unit kinetic energy and
/// compares it with the predicted limit profiles. `grid` fixes the resolution
/// and the initial box.
std::vector<ConcentrationRecord> concentration_run(const SystemParams& params,
                                                   const std::vector<MassConstraint>& masses,
                                                   const Grid& grid,
                                                   const ConcentrationOptions& opts = {});

}  // namespace critmass
