#pragma once

// Energy functionals and monitored norms along the flow.

#include <utility>
#include <vector>

#include "pcflow/elliptic.hpp"

namespace pcflow {

// A closed (1,1)-form χ given by its chart density (same convention as
// Geometry::ricci_density) and its average χ̄ = ∫χ / Vol.
struct ClosedForm11 {
  ScalarField density;
  double mean = 0.0;
};

ClosedForm11 make_closed_form(const Geometry& geom, ScalarField density);
// χ = −Ric(ω₀), χ̄ = −R̄.
ClosedForm11 minus_ricci_form(const Geometry& geom);
// χ = ω₀, χ̄ = 1.
ClosedForm11 reference_form(const Geometry& geom);

inline constexpr int kDefaultQuadPoints = 16;

// Gauss–Legendre nodes and weights on [0, 1].
std::vector<std::pair<double, double>> gauss_legendre_unit(int points);

// ∫F ω_φ.
double entropy(const Geometry& geom, const MetricState& state);

// J_χ(φ) = ∫₀¹ ∫ φ (tr_{tφ}χ − χ̄) ω_{tφ} dt along the segment tφ.
double j_chi_path(const Geometry& geom, const ClosedForm11& chi, std::span<const double> phi,
                  int quad_points = kDefaultQuadPoints, double rho_floor = kDefaultRhoFloor);

// ½∫i∂φ∧∂̄φ. Logged next to j_chi_path; the two differ by χ̄-dependent terms
// unless χ = ω₀.
double j_chi_closed_form(const Geometry& geom, const ClosedForm11& chi,
                         std::span<const double> phi);

// Entropy + J_{−Ric}.
double k_energy(const Geometry& geom, const MetricState& state,
                int quad_points = kDefaultQuadPoints);

// ∫|∇_φ(F+P)|² ω_φ = ∫ i∂(F+P)∧∂̄(F+P).
double dissipation(const Geometry& geom, const MetricState& state, std::span<const double> p);

// ½∫φ(ρ + 1) ω₀.
double i_functional(const Geometry& geom, const MetricState& state);

// ∫(R − R̄)² ω_φ.
double calabi_energy(const Geometry& geom, const MetricState& state);

using ExponentTable = std::vector<std::pair<double, double>>;  // (p, value), configured order

struct EstimateProbes {
  ExponentTable grad_f;   // ∫|∇_φF|^{2p} ω_φ
  ExponentTable trace0;   // ∫(tr_φω₀)^{p+1} ω_φ
  ExponentTable grad_p;   // ∫|∇_φP|^{2p} ω_φ
};

EstimateProbes estimate_probes(const Geometry& geom, const MetricState& state,
                               std::span<const double> p, const std::vector<double>& p_list);

}  // namespace pcflow
