#pragma once

#include <utility>
#include <vector>

#include "critmass/field.hpp"
#include "critmass/params.hpp"

namespace critmass {

/// Positive radial solution Q_p of
///   -c1 (Q'' + (N-1)/r Q') + c0 Q = Q^{p-1},
///   c1 = N(p-2)/4,  c0 = 1 - (N-2)(p-2)/4,
/// stored as uniformly spaced radial samples with slopes.
struct GroundStateQ {
  int dim = 1;
  double exponent = 6.0;
  double dr = 0.0;
  std::vector<double> value;  // Q(k dr)
  std::vector<double> slope;  // Q'(k dr), Fritsch-Carlson limited
  double center_value = 0.0;  // Q(0)
  double cut_radius = 0.0;    // shooting data used below, decaying tail above
  double mass = 0.0;          // ||Q||_2^2
  double kinetic = 0.0;       // ||grad Q||_2^2
  double potential = 0.0;     // int Q^p
  double gn_constant = 0.0;   // p / (2 ||Q||_2^{p-2})
  double residual = 0.0;      // log-derivative mismatch at the cut, in units of the decay length

  bool is_mass_critical() const;
  /// Monotone cubic interpolation of the profile; 0 beyond the last sample.
  double operator()(double r) const;
  double radius(std::size_t k) const { return static_cast<double>(k) * dr; }
};

struct ShootingOptions {
  /// Relative and absolute tolerance of the adaptive Dormand-Prince integrator.
  double integrator_tol = 1e-13;
  double initial_low = 0.1;
  double initial_high = 20.0;
  int max_widenings = 20;
};

/// Bisection shooting on Q(0). Throws NoConvergence when no bracket is found
/// or when the matched tail misses by more than `tol`.
GroundStateQ solve_q(int dim, double exponent, double tol = 1e-5,
                     const ShootingOptions& options = {});

/// Cached mass-critical Q for a dimension (computed once per process).
const GroundStateQ& mass_critical_q(int dim);

/// (mu1^{-N/2} ||Q||^2, mu2^{-N/2} ||Q||^2).
std::pair<double, double> critical_masses(const SystemParams& params, const GroundStateQ& q);

/// amplitude * Q(scale |x|) on the grid; DomainEscape when the boundary
/// amplitude exceeds `boundary_tol` relative to the peak.
Field sample_profile(const GroundStateQ& q, const Grid& grid, double amplitude = 1.0,
                     double scale = 1.0, double boundary_tol = 1e-6);

/// mu^{-N/4} Q(|x|) on the grid.
Field rescaled_ground_state(const GroundStateQ& q, double mu, const Grid& grid);

struct GnTerms {
  double lhs = 0.0;  // int |f|^p
  double rhs = 0.0;  // sharp-constant bound
};
GnTerms gn_terms(const Field& f, const GroundStateQ& q);
/// rhs - lhs of the sharp Gagliardo-Nirenberg inequality at exponent q.exponent.
double gn_deficit(const Field& f, const GroundStateQ& q);

}  // namespace critmass
