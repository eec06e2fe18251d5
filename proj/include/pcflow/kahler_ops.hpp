#pragma once

// Pointwise Kähler quantities on ω_φ = ω₀ + i∂∂̄φ (complex dimension one).

#include "pcflow/geometry.hpp"

namespace pcflow {

inline constexpr double kDefaultRhoFloor = 1e-6;

struct MetricState {
  ScalarField phi;
  ScalarField rho;    // ω_φ / ω₀
  ScalarField big_f;  // log ρ
  double time = 0.0;
};

// ρ = 1 + D(φ)/s₀. Positivity is not checked here.
ScalarField ma_density(const Geometry& geom, std::span<const double> phi);

// Builds a MetricState, throwing NotKahlerError when min ρ ≤ rho_floor.
MetricState validate_kahler(const Geometry& geom, ScalarField phi, double time = 0.0,
                            double rho_floor = kDefaultRhoFloor);

double min_value(std::span<const double> f);
double max_value(std::span<const double> f);
double max_abs(std::span<const double> f);

// Δ_φ f = D(f)/(s₀ρ).
ScalarField laplacian_phi(const Geometry& geom, const MetricState& state,
                          std::span<const double> f);

// tr_{ω_φ} Ric(ω₀) = r₀/(s₀ρ).
ScalarField trace_ric0(const Geometry& geom, const MetricState& state);

struct ScalarCurvature {
  ScalarField value;         // −Δ_φF + tr_φ Ric(ω₀)
  double form_discrepancy;   // sup |value − (−D(log s₀ρ)/(s₀ρ))|
};

// The second form needs D(log s₀); on the sphere that is the constant −1
// (Ric(ω₀) = ω₀), which the reduced chart cannot differentiate at the poles.
ScalarCurvature scalar_curvature_forms(const Geometry& geom, const MetricState& state);
ScalarField scalar_curvature(const Geometry& geom, const MetricState& state);

// Average scalar curvature ∫R(ω₀)ω₀ / ∫ω₀.
double rbar(const Geometry& geom);

}  // namespace pcflow
