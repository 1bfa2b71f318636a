#pragma once

#include "critmass/field.hpp"
#include "critmass/params.hpp"

namespace critmass {

/// The three groups of J evaluated separately.
struct EnergyParts {
  double kinetic = 0.0;    // 1/2 int |grad u1|^2 + |grad u2|^2
  double potential = 0.0;  // sum_i mu_i N/(2N+4) int |u_i|^{2+4/N}
  double coupling = 0.0;   // beta int |u1|^{r1} |u2|^{r2}
  double total() const { return kinetic - potential - coupling; }
};

EnergyParts energy_parts(const FieldPair& pair, const SystemParams& params);
double energy(const FieldPair& pair, const SystemParams& params);

/// int |u1|^{r1} |u2|^{r2}, without beta.
double coupling(const FieldPair& pair, const SystemParams& params);

/// Unconstrained L2 gradient of J with respect to Re<.,.>.
FieldPair gradient(const FieldPair& pair, const SystemParams& params);

/// lambda_i from projecting the Euler-Lagrange equation onto u_i.
Multipliers extract_multipliers(const FieldPair& pair, const SystemParams& params);

/// Relative L2 norm of the elliptic-system residual with the given multipliers.
double stationarity_residual(const FieldPair& pair, const SystemParams& params,
                             const Multipliers& multipliers);

/// 1/2 K - N/(2N+4) sum mu_i P_i - N(r1+r2-2)/4 beta C. Equals half the
/// derivative of J along the mass-preserving dilation at t = 1.
double pohozaev_residual(const FieldPair& pair, const SystemParams& params);
/// pohozaev_residual divided by the kinetic group 1/2 K.
double pohozaev_relative(const FieldPair& pair, const SystemParams& params);

namespace detail {
/// Pointwise |u_i|^{r-2} u_i with the small-amplitude floor applied.
double singular_power_factor(double modulus, double exponent, double floor);
}  // namespace detail

}  // namespace critmass
