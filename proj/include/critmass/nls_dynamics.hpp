#pragma once

#include <cstdint>
#include <vector>

#include "critmass/field.hpp"
#include "critmass/mass_minimizer.hpp"
#include "critmass/params.hpp"

namespace critmass {

/// Default fixed time step of the split-step integrator.
inline constexpr double kDefaultTimeStep = 1e-3;

struct EvolutionState {
  FieldPair pair;
  double time = 0.0;
  long long step_count = 0;
};

struct TrajectorySample {
  double t = 0.0;
  double mass1 = 0.0;
  double mass2 = 0.0;
  double energy = 0.0;
  double orbit_distance = 0.0;
};

struct TrajectorySummary {
  std::vector<TrajectorySample> samples;
  double dt = 0.0;
  int scheme_order = 2;
};

/// Strang splitting: half kinetic step (exact in Fourier space), exact
/// nonlinear phase rotation, half kinetic step. Negative dt runs backwards.
class SplitStepIntegrator {
 public:
  SplitStepIntegrator(const Grid& grid, const SystemParams& params, double dt);

  /// One step in place; throws NumericalBlowup on non-finite values.
  void advance(FieldPair& pair) const;
  double dt() const noexcept { return dt_; }

 private:
  void half_kinetic(Field& f) const;
  void nonlinear(FieldPair& pair) const;

  Grid grid_;
  SystemParams params_;
  double dt_;
  std::vector<cplx> half_propagator_;
};

EvolutionState step(const EvolutionState& state, double dt, const SystemParams& params);

/// `pair` moved by the common translation and per-component phases that
/// maximize its H1 overlap with `reference`.
FieldPair align_to_orbit(const FieldPair& pair, const FieldPair& reference);

/// H1 x H1 distance to the orbit of `reference` under a common translation and
/// independent phases of the two components. Upper bound on the distance to G.
double orbit_distance(const FieldPair& pair, const FieldPair& reference);

struct EvolveOptions {
  double dt = kDefaultTimeStep;
  double horizon = 1.0;
  int sample_every = 100;
};

/// Evolves `initial`, sampling masses, energy and orbit distance to `reference`
/// (initial pair when null). The final state is returned through `final_state`
/// when non-null.
TrajectorySummary evolve(const FieldPair& initial, const SystemParams& params,
                         const EvolveOptions& opts, const FieldPair* reference = nullptr,
                         FieldPair* final_state = nullptr);

struct ProbeOptions {
  double perturbation_size = 1e-2;
  double horizon = 20.0;
  double dt = kDefaultTimeStep;
  int sample_every = 100;
  std::uint64_t seed = 0;
  /// Rescale the perturbed data back onto S(a1, a2).
  bool restore_masses = true;
};

/// Localized random perturbation with ||w||_{H1xH1} = size ||pair||_{H1xH1}.
FieldPair random_perturbation(const FieldPair& pair, double size, std::uint64_t seed);

/// Perturbs a converged minimizer and tracks its orbit distance in time.
TrajectorySummary stability_probe(const MinimizeResult& minimizer, const SystemParams& params,
                                  const ProbeOptions& opts = {});

}  // namespace critmass
