#pragma once

// Normalized Poisson problems Δ_φ u = f on the evolving metric.

#include "pcflow/kahler_ops.hpp"

namespace pcflow {

inline constexpr double kDefaultPoissonTol = 1e-10;

enum class Normalization {
  MeanZeroAgainstOmegaPhi,  // ∫u ω_φ = 0
  ExpMassEqualsVolume,      // ∫e^u ω_φ = Vol
};

struct PoissonSolution {
  ScalarField field;
  double residual_linf = 0.0;  // sup |Δ_φ u − projected rhs|
  double compat_defect = 0.0;  // |∫rhs ω_φ| / Vol before projection
};

// Projects rhs onto the ω_φ-mean-zero subspace, inverts Δ_φ directly and
// applies the requested normalization. Throws ToleranceNotMet when the
// discrete residual exceeds poisson_tol.
PoissonSolution solve_poisson_phi(const Geometry& geom, const MetricState& state,
                                  std::span<const double> rhs, Normalization normalization,
                                  double poisson_tol = kDefaultPoissonTol);

// Δ_φP = R̄ − tr_φ Ric(ω₀), ∫P ω_φ = 0.
PoissonSolution solve_P(const Geometry& geom, const MetricState& state,
                        double poisson_tol = kDefaultPoissonTol);

// Ric(ω_φ) − λω_φ = i∂∂̄h, ∫e^h ω_φ = Vol. Traced: Δ_φh = R(ω_φ) − λ.
PoissonSolution solve_ricci_potential(const Geometry& geom, const MetricState& state,
                                      double poisson_tol = kDefaultPoissonTol);

// Shift making ∫e^{u+c} ω_φ = Vol, evaluated with max subtraction.
double exp_mass_shift(const Geometry& geom, const MetricState& state, std::span<const double> u);

}  // namespace pcflow
