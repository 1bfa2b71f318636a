#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "critmass/field.hpp"
#include "critmass/params.hpp"
#include "critmass/scalar_ground.hpp"

namespace critmass {

enum class MinimizeStatus { Converged, SpreadDetected, DivergenceDetected, IterLimit };

std::string_view to_string(MinimizeStatus status);

struct MinimizeOptions {
  /// Initial step of the preconditioned flow (dimensionless; adapted on the fly).
  double step = 0.5;
  /// Step cap; above 1 the flow amplifies the highest Fourier modes.
  double max_step = 1.0;
  int max_iters = 20000;
  /// Stop with IterLimit once the best residual has not dropped by 1% for this
  /// many iterations (the flow is stuck at its round-off floor).
  int stall_window = 500;
  /// Relative stationarity residual declaring convergence.
  double grad_tol = 1e-8;
  /// Number of initial guesses: the Q-product guess plus restarts - 1 random ones.
  int restarts = 4;
  /// Boundary-mass fraction that, together with |J| < spread_energy, signals vanishing.
  double spread_threshold = 0.05;
  double spread_energy = 1e-3;
  /// Kinetic/energy pair signalling unboundedness below.
  double divergence_kinetic = 1e4;
  double divergence_energy = 1e3;
  /// Spectral power fraction in the outer third of the band signalling collapse
  /// below the grid scale (used with growing kinetic energy and J < 0).
  double collapse_tail = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MinimizeResult {
  FieldPair pair;
  double value = 0.0;
  Multipliers multipliers;
  double grad_residual = 0.0;
  /// Pohozaev residual relative to the kinetic group.
  double pohozaev = 0.0;
  MinimizeStatus status = MinimizeStatus::IterLimit;
  int iterations = 0;
  /// Which initial guess produced the result (0 = Q-product guess when it fits the grid).
  int guess_index = 0;
};

/// (sqrt(a1 / mass(u1)) u1, sqrt(a2 / mass(u2)) u2).
FieldPair project_masses(const FieldPair& pair, const MassConstraint& target);

/// Best of opts.restarts projected-gradient-flow runs on S(a1, a2).
MinimizeResult minimize(const SystemParams& params, const MassConstraint& target, const Grid& grid,
                        const MinimizeOptions& opts = {});

/// Single flow run from a given initial pair (projected onto the constraint first).
MinimizeResult minimize_from(const SystemParams& params, const MassConstraint& target,
                             const FieldPair& initial, const MinimizeOptions& opts = {});

/// Fraction of each component's mass farther than L/2 (max-norm, periodic)
/// from its center; the larger of the two.
double boundary_mass_fraction(const FieldPair& pair);

struct ScanRow {
  MassConstraint masses;
  double value = 0.0;
  Multipliers multipliers;
  MinimizeStatus status = MinimizeStatus::IterLimit;
};

/// Independent minimize per entry, in input order; `jobs` > 1 runs entries concurrently.
std::vector<ScanRow> scan_m(const SystemParams& params, const std::vector<MassConstraint>& masses,
                            const Grid& grid, const MinimizeOptions& opts = {}, int jobs = 1);

/// J on (sqrt(a1) Q_t / ||Q||, sqrt(a2) Q_t / ||Q||) with Q_t the conformal rescaling of Q.
double divergence_family_energy(const SystemParams& params, const GroundStateQ& q,
                                const MassConstraint& masses, double t, const Grid& grid);

struct ComponentStructure {
  /// Max |phase - weighted mean phase| over nodes with |u| > 1e-6 max |u|.
  double phase_deviation = 0.0;
  /// Fraction of radial bins (about the center) whose mean |u| rises outward.
  double unimodality_violation = 0.0;
  /// min |u| / max |u| over the half box around the center.
  double min_amplitude_ratio = 0.0;
  Shift center{};
};

struct StructureReport {
  ComponentStructure component[2];
  double center_offset = 0.0;
  double spacing = 0.0;

  bool passes(double phase_tol = 1e-6) const;
};

StructureReport pair_structure(const FieldPair& pair);
/// Throws NotConverged unless result.status == Converged.
StructureReport check_minimizer_structure(const MinimizeResult& result);

}  // namespace critmass
