#include "pcflow/functionals.hpp"

#include <boost/math/special_functions/legendre.hpp>
#include <cmath>

#include "pcflow/error.hpp"

namespace pcflow {

ClosedForm11 make_closed_form(const Geometry& geom, ScalarField density) {
  geom.check_shape(density);
  ClosedForm11 chi;
  chi.mean = geom.chart_integral(density) / geom.volume();
  chi.density = std::move(density);
  return chi;
}

ClosedForm11 minus_ricci_form(const Geometry& geom) {
  ScalarField d = geom.ricci_density();
  for (double& v : d) v = -v;
  return make_closed_form(geom, std::move(d));
}

ClosedForm11 reference_form(const Geometry& geom) {
  return make_closed_form(geom, geom.reference_density());
}

std::vector<std::pair<double, double>> gauss_legendre_unit(int points) {
  if (points < 1) throw Error(ErrorKind::InvalidArgument, "quadrature needs at least one node");
  // legendre_p_zeros returns the nonnegative roots in increasing order.
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(points);
  std::vector<std::pair<double, double>> rule;
  for (double x : zeros) {
    const double dp = boost::math::legendre_p_prime(points, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    if (x == 0.0) {
      rule.emplace_back(0.5, 0.5 * w);
    } else {
      rule.emplace_back(0.5 * (1.0 - x), 0.5 * w);
      rule.emplace_back(0.5 * (1.0 + x), 0.5 * w);
    }
  }
  std::sort(rule.begin(), rule.end());
  return rule;
}

double entropy(const Geometry& geom, const MetricState& state) {
  return geom.integrate(state.big_f, state.rho);
}

double j_chi_path(const Geometry& geom, const ClosedForm11& chi, std::span<const double> phi,
                  int quad_points, double rho_floor) {
  geom.check_shape(phi);
  geom.check_shape(chi.density);
  const std::size_t n = geom.size();
  const auto& s0 = geom.reference_density();
  const ScalarField d_phi = geom.mixed_second_derivative(phi);

  double total = 0.0;
  ScalarField integrand(n);
  for (const auto& [t, w] : gauss_legendre_unit(quad_points)) {
    double min_rho = 1.0 + t * d_phi[0] / s0[0];
    for (std::size_t i = 0; i < n; ++i) {
      const double rho_t = 1.0 + t * d_phi[i] / s0[i];
      min_rho = std::min(min_rho, rho_t);
      integrand[i] = phi[i] * (chi.density[i] - chi.mean * s0[i] * rho_t);
    }
    if (!(min_rho > rho_floor)) throw NotKahlerError(min_rho);
    total += w * geom.chart_integral(integrand);
  }
  return total;
}

double j_chi_closed_form(const Geometry& geom, const ClosedForm11&, std::span<const double> phi) {
  return 0.5 * geom.dirichlet_energy(phi);
}

double k_energy(const Geometry& geom, const MetricState& state, int quad_points) {
  return entropy(geom, state) + j_chi_path(geom, minus_ricci_form(geom), state.phi, quad_points);
}

double dissipation(const Geometry& geom, const MetricState& state, std::span<const double> p) {
  geom.check_shape(p);
  ScalarField u(geom.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = state.big_f[i] + p[i];
  return geom.dirichlet_energy(u);
}

double i_functional(const Geometry& geom, const MetricState& state) {
  ScalarField w(geom.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 * (state.rho[i] + 1.0);
  return geom.integrate(state.phi, w);
}

double calabi_energy(const Geometry& geom, const MetricState& state) {
  ScalarField r = scalar_curvature(geom, state);
  const double average = rbar(geom);
  for (double& v : r) v = (v - average) * (v - average);
  return geom.integrate(r, state.rho);
}

EstimateProbes estimate_probes(const Geometry& geom, const MetricState& state,
                               std::span<const double> p, const std::vector<double>& p_list) {
  const std::size_t n = geom.size();
  ScalarField grad_f(n), grad_p(n);
  geom.gradient_norm_sq(state.big_f, grad_f);
  geom.gradient_norm_sq(p, grad_p);
  for (std::size_t i = 0; i < n; ++i) {
    grad_f[i] /= state.rho[i];
    grad_p[i] /= state.rho[i];
  }
  EstimateProbes probes;
  ScalarField buf(n);
  for (double e : p_list) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::pow(grad_f[i], e);
    probes.grad_f.emplace_back(e, geom.integrate(buf, state.rho));
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::pow(1.0 / state.rho[i], e + 1.0);
    probes.trace0.emplace_back(e, geom.integrate(buf, state.rho));
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::pow(grad_p[i], e);
    probes.grad_p.emplace_back(e, geom.integrate(buf, state.rho));
  }
  return probes;
}

}  // namespace pcflow
