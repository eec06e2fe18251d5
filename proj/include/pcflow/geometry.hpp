#pragma once

// Discretized model geometries in complex dimension one.
//
// Chart convention: a Kähler form is written ω = i σ dz∧dz̄, so that
// i dz∧dz̄ = 2 dx∧dy. Every backend exposes the same reduced picture:
//
//   * a "chart measure" with constant weight per node (cell_measure()),
//   * the reference density s₀ of ω₀ against that measure,
//   * the mixed derivative operator D with ω_φ = ω₀ + i∂∂̄φ  <=>  ρ = 1 + D(φ)/s₀,
//   * the chart density r₀ of Ric(ω₀).
//
// On the torus D = ∂z∂z̄ and s₀ = σ₀. On the S¹-reduced sphere the density
// 2/(1+|z|²)² is absorbed by the momentum coordinate μ, so s₀ ≡ 1 and
// D f = ½ ∂_μ(μ(1−μ) ∂_μ f).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace pcflow {

using ScalarField = std::vector<double>;

enum class GeometryKind : std::uint8_t { Torus = 1, Sphere = 2 };

struct CosineMode {
  int kx = 0;
  int ky = 0;
  double amplitude = 0.0;

  friend bool operator==(const CosineMode&, const CosineMode&) = default;
};

class Geometry {
 public:
  virtual ~Geometry() = default;
  Geometry(const Geometry&) = delete;
  Geometry& operator=(const Geometry&) = delete;

  virtual GeometryKind kind() const = 0;

  std::size_t size() const { return density_.size(); }

  const ScalarField& reference_density() const { return density_; }
  const ScalarField& ricci_density() const { return ricci_; }

  // Chart measure carried by each node.
  double cell_measure() const { return cell_measure_; }

  // λ in c₁(M) = λ[ω₀] (0 on the torus, 1 on the Kähler–Einstein sphere).
  virtual double einstein_constant() const = 0;

  // ∫ω₀ computed by quadrature.
  double volume() const { return volume_; }

  // Throws ShapeError unless f has one value per node.
  void check_shape(std::span<const double> f) const;

  // ∫ f ω₀, fixed sequential summation order.
  double integrate(std::span<const double> f) const;
  // ∫ f·weight ω₀ (weight = ρ gives ∫ f ω_φ).
  double integrate(std::span<const double> f, std::span<const double> weight) const;
  // Σ f · cell_measure, i.e. the integral against the bare chart measure.
  double chart_integral(std::span<const double> f) const;

  ScalarField mixed_second_derivative(std::span<const double> f) const;
  virtual void mixed_second_derivative(std::span<const double> f,
                                       std::span<double> out) const = 0;

  // Inverts D on the complement of constants. The chart mean of rhs is
  // ignored; the result has zero chart mean.
  virtual void solve_mixed(std::span<const double> rhs, std::span<double> out) const = 0;

  // Solves (I − alpha·D) u = rhs for alpha ≥ 0.
  virtual void solve_shifted(double alpha, std::span<const double> rhs,
                             std::span<double> out) const = 0;

  // ∫ i∂u∧∂̄u ≥ 0, consistent with −∫u·D(u) over the chart measure.
  virtual double dirichlet_energy(std::span<const double> u) const = 0;

  // Pointwise |∂u|² measured by ω₀ (u_z u_z̄ / s₀ in chart form).
  // Dividing by ρ gives |∇_φ u|².
  virtual void gradient_norm_sq(std::span<const double> u, std::span<double> out) const = 0;

  // Removes content the time integrator must not carry (2/3-rule on the
  // torus; identity on the sphere).
  virtual void band_limit(std::span<double> f) const = 0;

  // Effective grid spacing used by the explicit step-size heuristic.
  virtual double min_spacing() const = 0;

 protected:
  Geometry() = default;
  void finalize(ScalarField density, ScalarField ricci, double cell_measure);

 private:
  ScalarField density_;
  ScalarField ricci_;
  double cell_measure_ = 0.0;
  double volume_ = 0.0;
};

using GeometryPtr = std::shared_ptr<const Geometry>;

class TorusGeometry final : public Geometry {
 public:
  TorusGeometry(int nx, int ny, double length, std::vector<CosineMode> sigma0_modes);
  ~TorusGeometry() override;

  GeometryKind kind() const override { return GeometryKind::Torus; }
  double einstein_constant() const override { return 0.0; }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double length() const { return length_; }
  const std::vector<CosineMode>& sigma0_modes() const { return modes_; }
  bool is_flat() const;

  double x(int ix) const { return length_ * ix / nx_; }
  double y(int iy) const { return length_ * iy / ny_; }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * nx_ + ix;
  }

  // Angular wavenumbers along x for the half spectrum, and along y for the
  // full spectrum.
  const std::vector<double>& wavenumbers_x() const { return kx_; }
  const std::vector<double>& wavenumbers_y() const { return ky_; }

  void mixed_second_derivative(std::span<const double> f,
                               std::span<double> out) const override;
  using Geometry::mixed_second_derivative;
  void solve_mixed(std::span<const double> rhs, std::span<double> out) const override;
  void solve_shifted(double alpha, std::span<const double> rhs,
                     std::span<double> out) const override;
  double dirichlet_energy(std::span<const double> u) const override;
  void gradient_norm_sq(std::span<const double> u, std::span<double> out) const override;
  void band_limit(std::span<double> f) const override;
  double min_spacing() const override;

  // Spectral partial derivatives (Nyquist content dropped).
  void gradient(std::span<const double> u, std::span<double> ux, std::span<double> uy) const;

 private:
  struct Plans;
  std::size_t spectral_size() const;

  int nx_;
  int ny_;
  double length_;
  std::vector<CosineMode> modes_;
  std::vector<double> kx_;
  std::vector<double> ky_;
  std::unique_ptr<Plans> plans_;
};

class SphereGeometry final : public Geometry {
 public:
  explicit SphereGeometry(int nmu);

  GeometryKind kind() const override { return GeometryKind::Sphere; }
  double einstein_constant() const override { return 1.0; }

  int nmu() const { return nmu_; }
  double spacing() const { return 1.0 / nmu_; }
  double mu(int i) const { return (i + 0.5) / nmu_; }
  const std::vector<double>& nodes() const { return mu_; }

  void mixed_second_derivative(std::span<const double> f,
                               std::span<double> out) const override;
  using Geometry::mixed_second_derivative;
  void solve_mixed(std::span<const double> rhs, std::span<double> out) const override;
  void solve_shifted(double alpha, std::span<const double> rhs,
                     std::span<double> out) const override;
  double dirichlet_energy(std::span<const double> u) const override;
  void gradient_norm_sq(std::span<const double> u, std::span<double> out) const override;
  void band_limit(std::span<double>) const override {}
  double min_spacing() const override;

 private:
  int nmu_;
  std::vector<double> mu_;
  // μ(1−μ) at the nmu−1 interior faces; boundary faces carry zero flux.
  std::vector<double> face_coeff_;
};

std::shared_ptr<const TorusGeometry> build_torus_geometry(int nx, int ny, double length,
                                                          std::vector<CosineMode> sigma0_modes);
std::shared_ptr<const SphereGeometry> build_sphere_geometry(int nmu);

}  // namespace pcflow
