#include "pcflow/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pcflow/error.hpp"

namespace pcflow {

void Geometry::finalize(ScalarField density, ScalarField ricci, double cell_measure) {
  density_ = std::move(density);
  ricci_ = std::move(ricci);
  cell_measure_ = cell_measure;
  volume_ = chart_integral(density_);
}

void Geometry::check_shape(std::span<const double> f) const {
  if (f.size() != size()) {
    throw Error(ErrorKind::ShapeError, "field has " + std::to_string(f.size()) +
                                           " values, geometry has " + std::to_string(size()) +
                                           " nodes");
  }
}

double Geometry::chart_integral(std::span<const double> f) const {
  check_shape(f);
  double sum = 0.0;
  for (double v : f) sum += v;
  return sum * cell_measure_;
}

double Geometry::integrate(std::span<const double> f) const {
  check_shape(f);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * density_[i];
  return sum * cell_measure_;
}

double Geometry::integrate(std::span<const double> f, std::span<const double> weight) const {
  check_shape(f);
  check_shape(weight);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * weight[i] * density_[i];
  return sum * cell_measure_;
}

ScalarField Geometry::mixed_second_derivative(std::span<const double> f) const {
  check_shape(f);
  ScalarField out(size());
  mixed_second_derivative(f, out);
  return out;
}

// --- sphere ---------------------------------------------------------------

SphereGeometry::SphereGeometry(int nmu) : nmu_(nmu) {
  if (nmu < 32) {
    throw Error(ErrorKind::BadGrid, "sphere needs nmu >= 32, got " + std::to_string(nmu));
  }
  mu_.resize(nmu);
  for (int i = 0; i < nmu; ++i) mu_[i] = mu(i);
  face_coeff_.resize(nmu - 1);
  for (int f = 0; f + 1 < nmu; ++f) {
    const double m = static_cast<double>(f + 1) / nmu;
    face_coeff_[f] = m * (1.0 - m);
  }
  // Ric(ω₀) = ω₀, so r₀ coincides with s₀ ≡ 1.
  finalize(ScalarField(nmu, 1.0), ScalarField(nmu, 1.0), 4.0 * std::numbers::pi / nmu);
}

void SphereGeometry::mixed_second_derivative(std::span<const double> f,
                                             std::span<double> out) const {
  check_shape(f);
  check_shape(out);
  const double inv_h = static_cast<double>(nmu_);
  double left = 0.0;
  for (int i = 0; i < nmu_; ++i) {
    const double right =
        (i + 1 < nmu_) ? face_coeff_[i] * (f[i + 1] - f[i]) * inv_h : 0.0;
    out[i] = 0.5 * (right - left) * inv_h;
    left = right;
  }
}

void SphereGeometry::solve_mixed(std::span<const double> rhs, std::span<double> out) const {
  check_shape(rhs);
  check_shape(out);
  // Forward sweep accumulates the face fluxes from the zero-flux pole; the
  // last row is the compatibility condition and is dropped. Back-substitution
  // integrates the flux with u₀ = 0, then the chart mean is removed.
  const double h = spacing();
  double flux = 0.0;
  out[0] = 0.0;
  for (int i = 0; i + 1 < nmu_; ++i) {
    flux += 2.0 * h * rhs[i];
    if (!(face_coeff_[i] > 0.0)) {
      throw Error(ErrorKind::SingularSolve, "degenerate face coefficient");
    }
    out[i + 1] = out[i] + h * flux / face_coeff_[i];
  }
  double mean = 0.0;
  for (int i = 0; i < nmu_; ++i) mean += out[i];
  mean /= nmu_;
  for (int i = 0; i < nmu_; ++i) out[i] -= mean;
}

void SphereGeometry::solve_shifted(double alpha, std::span<const double> rhs,
                                   std::span<double> out) const {
  check_shape(rhs);
  check_shape(out);
  const int n = nmu_;
  const double c = 0.5 * alpha * nmu_ * nmu_;
  std::vector<double> upper(n, 0.0);
  std::vector<double> work(n, 0.0);
  // Thomas algorithm on the symmetric tridiagonal I − alpha·D.
  double prev_upper = 0.0;
  double prev_work = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a_left = (i > 0) ? face_coeff_[i - 1] : 0.0;
    const double a_right = (i + 1 < n) ? face_coeff_[i] : 0.0;
    const double lower = -c * a_left;
    const double diag = 1.0 + c * (a_left + a_right);
    const double denom = diag - lower * prev_upper;
    if (!(std::abs(denom) > 0.0)) {
      throw Error(ErrorKind::SingularSolve, "tridiagonal pivot vanished");
    }
    upper[i] = -c * a_right / denom;
    work[i] = (rhs[i] - lower * prev_work) / denom;
    prev_upper = upper[i];
    prev_work = work[i];
  }
  out[n - 1] = work[n - 1];
  for (int i = n - 2; i >= 0; --i) out[i] = work[i] - upper[i] * out[i + 1];
}

double SphereGeometry::dirichlet_energy(std::span<const double> u) const {
  check_shape(u);
  double sum = 0.0;
  for (int f = 0; f + 1 < nmu_; ++f) {
    const double d = u[f + 1] - u[f];
    sum += face_coeff_[f] * d * d;
  }
  return 2.0 * std::numbers::pi * sum * nmu_;
}

void SphereGeometry::gradient_norm_sq(std::span<const double> u, std::span<double> out) const {
  check_shape(u);
  check_shape(out);
  const double inv_h = static_cast<double>(nmu_);
  double left = 0.0;
  for (int i = 0; i < nmu_; ++i) {
    double right = 0.0;
    if (i + 1 < nmu_) {
      const double d = (u[i + 1] - u[i]) * inv_h;
      right = face_coeff_[i] * d * d;
    }
    out[i] = 0.25 * (left + right);
    left = right;
  }
}

double SphereGeometry::min_spacing() const { return 2.0 / nmu_; }

std::shared_ptr<const SphereGeometry> build_sphere_geometry(int nmu) {
  return std::make_shared<const SphereGeometry>(nmu);
}

}  // namespace pcflow
