#include "pcflow/kahler_ops.hpp"

#include <algorithm>
#include <cmath>

#include "pcflow/error.hpp"
#include "pcflow/parallel.hpp"

namespace pcflow {

double min_value(std::span<const double> f) {
  double m = f.empty() ? 0.0 : f[0];
  for (double v : f) m = std::min(m, v);
  return m;
}

double max_value(std::span<const double> f) {
  double m = f.empty() ? 0.0 : f[0];
  for (double v : f) m = std::max(m, v);
  return m;
}

double max_abs(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

ScalarField ma_density(const Geometry& geom, std::span<const double> phi) {
  ScalarField rho = geom.mixed_second_derivative(phi);
  const auto& s0 = geom.reference_density();
  parallel_for(rho.size(), [&](std::size_t i) { rho[i] = 1.0 + rho[i] / s0[i]; });
  return rho;
}

MetricState validate_kahler(const Geometry& geom, ScalarField phi, double time,
                            double rho_floor) {
  geom.check_shape(phi);
  for (double v : phi) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "potential is not finite");
  }
  MetricState state;
  state.rho = ma_density(geom, phi);
  const double min_rho = min_value(state.rho);
  if (!(min_rho > rho_floor)) throw NotKahlerError(min_rho);
  state.big_f.resize(state.rho.size());
  parallel_for(state.rho.size(), [&](std::size_t i) { state.big_f[i] = std::log(state.rho[i]); });
  state.phi = std::move(phi);
  state.time = time;
  return state;
}

ScalarField laplacian_phi(const Geometry& geom, const MetricState& state,
                          std::span<const double> f) {
  ScalarField out = geom.mixed_second_derivative(f);
  const auto& s0 = geom.reference_density();
  parallel_for(out.size(), [&](std::size_t i) { out[i] /= s0[i] * state.rho[i]; });
  return out;
}

ScalarField trace_ric0(const Geometry& geom, const MetricState& state) {
  const auto& s0 = geom.reference_density();
  const auto& r0 = geom.ricci_density();
  ScalarField out(geom.size());
  parallel_for(out.size(), [&](std::size_t i) { out[i] = r0[i] / (s0[i] * state.rho[i]); });
  return out;
}

ScalarCurvature scalar_curvature_forms(const Geometry& geom, const MetricState& state) {
  const std::size_t n = geom.size();
  ScalarCurvature result;
  result.value = laplacian_phi(geom, state, state.big_f);
  const ScalarField tr = trace_ric0(geom, state);
  for (std::size_t i = 0; i < n; ++i) result.value[i] = tr[i] - result.value[i];

  // Second form: −D(log σ₀ρ)/(σ₀ρ), differentiated in one piece.
  const auto& s0 = geom.reference_density();
  ScalarField log_density(n);
  for (std::size_t i = 0; i < n; ++i) log_density[i] = std::log(s0[i] * state.rho[i]);
  ScalarField d = geom.mixed_second_derivative(log_density);
  if (geom.kind() == GeometryKind::Sphere) {
    // s₀ ≡ 1 in the reduced chart; the true density contributes D(log σ₀) = −1.
    for (double& v : d) v -= 1.0;
  }
  double discrepancy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double alt = -d[i] / (s0[i] * state.rho[i]);
    discrepancy = std::max(discrepancy, std::abs(alt - result.value[i]));
  }
  result.form_discrepancy = discrepancy;
  return result;
}

ScalarField scalar_curvature(const Geometry& geom, const MetricState& state) {
  ScalarField r = laplacian_phi(geom, state, state.big_f);
  const ScalarField tr = trace_ric0(geom, state);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = tr[i] - r[i];
  return r;
}

double rbar(const Geometry& geom) {
  // R(ω₀)·ω₀ has chart density r₀.
  return geom.chart_integral(geom.ricci_density()) / geom.volume();
}

}  // namespace pcflow
