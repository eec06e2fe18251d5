#include "pcflow/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pcflow/error.hpp"

namespace pcflow {

double exp_mass_shift(const Geometry& geom, const MetricState& state, std::span<const double> u) {
  const double top = max_value(u);
  ScalarField e(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) e[i] = std::exp(u[i] - top);
  const double mass = geom.integrate(e, state.rho);
  return -(top + std::log(mass / geom.volume()));
}

PoissonSolution solve_poisson_phi(const Geometry& geom, const MetricState& state,
                                  std::span<const double> rhs, Normalization normalization,
                                  double poisson_tol) {
  geom.check_shape(rhs);
  const std::size_t n = geom.size();
  const auto& s0 = geom.reference_density();
  const ScalarField ones(n, 1.0);
  const double vol_phi = geom.integrate(ones, state.rho);

  PoissonSolution sol;
  const double mass = geom.integrate(rhs, state.rho);
  sol.compat_defect = std::abs(mass) / geom.volume();
  const double mean = mass / vol_phi;

  ScalarField projected(n);
  ScalarField chart_rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    projected[i] = rhs[i] - mean;
    chart_rhs[i] = projected[i] * s0[i] * state.rho[i];
  }
  sol.field.assign(n, 0.0);
  // A vanishing right-hand side (flat reference) has the exact solution 0.
  if (std::all_of(projected.begin(), projected.end(), [](double v) { return v == 0.0; })) {
    return sol;
  }
  geom.solve_mixed(chart_rhs, sol.field);

  const ScalarField check = laplacian_phi(geom, state, sol.field);
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    residual = std::max(residual, std::abs(check[i] - projected[i]));
  }
  sol.residual_linf = residual;
  if (!(residual <= poisson_tol)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "Poisson residual %.3e exceeds tolerance %.3e", residual,
                  poisson_tol);
    throw Error(ErrorKind::ToleranceNotMet, buf);
  }

  double shift = 0.0;
  switch (normalization) {
    case Normalization::MeanZeroAgainstOmegaPhi:
      shift = -geom.integrate(sol.field, state.rho) / vol_phi;
      break;
    case Normalization::ExpMassEqualsVolume:
      shift = exp_mass_shift(geom, state, sol.field);
      break;
  }
  for (double& v : sol.field) v += shift;
  return sol;
}

PoissonSolution solve_P(const Geometry& geom, const MetricState& state, double poisson_tol) {
  ScalarField rhs = trace_ric0(geom, state);
  const double average = rbar(geom);
  for (double& v : rhs) v = average - v;
  return solve_poisson_phi(geom, state, rhs, Normalization::MeanZeroAgainstOmegaPhi,
                           poisson_tol);
}

PoissonSolution solve_ricci_potential(const Geometry& geom, const MetricState& state,
                                      double poisson_tol) {
  ScalarField rhs = scalar_curvature(geom, state);
  const double lambda = geom.einstein_constant();
  for (double& v : rhs) v -= lambda;
  return solve_poisson_phi(geom, state, rhs, Normalization::ExpMassEqualsVolume, poisson_tol);
}

}  // namespace pcflow
