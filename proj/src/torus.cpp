#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "pcflow/error.hpp"
#include "pcflow/geometry.hpp"
#include "pcflow/parallel.hpp"

namespace pcflow {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

template <class T>
struct FftwFree {
  void operator()(T* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree<double>>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree<fftw_complex>>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

}  // namespace

struct TorusGeometry::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Plans(int nx, int ny) {
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    const std::size_t ns = static_cast<std::size_t>(ny) * (nx / 2 + 1);
    auto re = alloc_real(n);
    auto sp = alloc_complex(ns);
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_dft_r2c_2d(ny, nx, re.get(), sp.get(), FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_2d(ny, nx, sp.get(), re.get(), FFTW_ESTIMATE);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
};

namespace {

// Per-thread transform buffers, reused across calls of the same size.
struct Workspace {
  std::size_t n = 0;
  std::size_t ns = 0;
  RealBuffer re;
  ComplexBuffer sp;

  void reserve(std::size_t real_size, std::size_t spectral_size) {
    if (real_size != n || spectral_size != ns) {
      re = alloc_real(real_size);
      sp = alloc_complex(spectral_size);
      n = real_size;
      ns = spectral_size;
    }
  }
};

Workspace& workspace(std::size_t n, std::size_t ns) {
  thread_local Workspace ws;
  ws.reserve(n, ns);
  return ws;
}

// One forward transform, a per-mode multiplier, one inverse transform. The
// symbol is real, or purely imaginary when Imaginary is set.
template <bool Imaginary = false, class Symbol>
void spectral_apply(fftw_plan forward, fftw_plan backward, int nx, int ny,
                    std::span<const double> in, std::span<double> out, Symbol&& symbol) {
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  const int hx = nx / 2 + 1;
  auto& ws = workspace(n, static_cast<std::size_t>(ny) * hx);
  std::copy(in.begin(), in.end(), ws.re.get());
  fftw_execute_dft_r2c(forward, ws.re.get(), ws.sp.get());
  const double scale = 1.0 / static_cast<double>(n);
  for (int jy = 0; jy < ny; ++jy) {
    fftw_complex* row = ws.sp.get() + static_cast<std::size_t>(jy) * hx;
    for (int jx = 0; jx < hx; ++jx) {
      const double m = symbol(jx, jy) * scale;
      const double a = row[jx][0], b = row[jx][1];
      if constexpr (Imaginary) {
        row[jx][0] = -m * b;
        row[jx][1] = m * a;
      } else {
        row[jx][0] = m * a;
        row[jx][1] = m * b;
      }
    }
  }
  fftw_execute_dft_c2r(backward, ws.sp.get(), ws.re.get());
  std::copy(ws.re.get(), ws.re.get() + n, out.begin());
}

}  // namespace

TorusGeometry::TorusGeometry(int nx, int ny, double length, std::vector<CosineMode> sigma0_modes)
    : nx_(nx), ny_(ny), length_(length), modes_(std::move(sigma0_modes)) {
  if (!is_power_of_two(nx) || !is_power_of_two(ny) || nx < 16 || ny < 16) {
    throw Error(ErrorKind::BadGrid, "torus grid sizes must be powers of two >= 16, got " +
                                        std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw Error(ErrorKind::BadGrid, "torus length must be positive");
  }
  const double two_pi_over_l = 2.0 * std::numbers::pi / length;
  kx_.resize(nx / 2 + 1);
  for (int j = 0; j <= nx / 2; ++j) kx_[j] = two_pi_over_l * j;
  ky_.resize(ny);
  for (int j = 0; j < ny; ++j) ky_[j] = two_pi_over_l * (j <= ny / 2 ? j : j - ny);

  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  ScalarField sigma(n, 1.0);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      double s = 1.0;
      for (const auto& m : modes_) {
        s += m.amplitude * std::cos(two_pi_over_l * (m.kx * x(ix) + m.ky * y(iy)));
      }
      sigma[index(ix, iy)] = s;
    }
  }
  double min_sigma = sigma[0];
  for (double s : sigma) min_sigma = std::min(min_sigma, s);
  if (!(min_sigma > 0.0)) {
    throw Error(ErrorKind::NonPositiveDensity,
                "reference density reaches " + std::to_string(min_sigma));
  }

  plans_ = std::make_unique<Plans>(nx, ny);

  // r₀ = −(log σ₀)_{zz̄}; identically zero for the flat metric.
  ScalarField ricci(n, 0.0);
  if (!is_flat()) {
    ScalarField log_sigma(n);
    for (std::size_t i = 0; i < n; ++i) log_sigma[i] = std::log(sigma[i]);
    mixed_second_derivative(log_sigma, ricci);
    for (double& r : ricci) r = -r;
  }
  const double cell = 2.0 * length * length / static_cast<double>(n);
  finalize(std::move(sigma), std::move(ricci), cell);
}

TorusGeometry::~TorusGeometry() = default;

bool TorusGeometry::is_flat() const {
  for (const auto& m : modes_) {
    if (m.amplitude != 0.0) return false;
  }
  return true;
}

std::size_t TorusGeometry::spectral_size() const {
  return static_cast<std::size_t>(ny_) * (nx_ / 2 + 1);
}

void TorusGeometry::mixed_second_derivative(std::span<const double> f,
                                            std::span<double> out) const {
  if (f.size() != static_cast<std::size_t>(nx_) * ny_ || out.size() != f.size()) {
    throw Error(ErrorKind::ShapeError, "field does not match torus grid");
  }
  spectral_apply(plans_->forward, plans_->backward, nx_, ny_, f, out, [&](int jx, int jy) {
    return -0.25 * (kx_[jx] * kx_[jx] + ky_[jy] * ky_[jy]);
  });
}

void TorusGeometry::solve_mixed(std::span<const double> rhs, std::span<double> out) const {
  check_shape(rhs);
  check_shape(out);
  spectral_apply(plans_->forward, plans_->backward, nx_, ny_, rhs, out, [&](int jx, int jy) {
    const double k2 = kx_[jx] * kx_[jx] + ky_[jy] * ky_[jy];
    return k2 > 0.0 ? -4.0 / k2 : 0.0;
  });
}

void TorusGeometry::solve_shifted(double alpha, std::span<const double> rhs,
                                  std::span<double> out) const {
  check_shape(rhs);
  check_shape(out);
  spectral_apply(plans_->forward, plans_->backward, nx_, ny_, rhs, out, [&](int jx, int jy) {
    const double k2 = kx_[jx] * kx_[jx] + ky_[jy] * ky_[jy];
    return 1.0 / (1.0 + 0.25 * alpha * k2);
  });
}

double TorusGeometry::dirichlet_energy(std::span<const double> u) const {
  check_shape(u);
  const std::size_t n = u.size();
  const int hx = nx_ / 2 + 1;
  auto& ws = workspace(n, spectral_size());
  std::copy(u.begin(), u.end(), ws.re.get());
  fftw_execute_dft_r2c(plans_->forward, ws.re.get(), ws.sp.get());
  const fftw_complex* sp = ws.sp.get();
  // Parseval with the same symbol as the mixed derivative:
  // ∫2|u_z|² dxdy = ½∫|∇u|² dxdy.
  double sum = 0.0;
  for (int jy = 0; jy < ny_; ++jy) {
    for (int jx = 0; jx < hx; ++jx) {
      const auto& c = sp[static_cast<std::size_t>(jy) * hx + jx];
      const double mult = (jx == 0 || jx == nx_ / 2) ? 1.0 : 2.0;
      const double k2 = kx_[jx] * kx_[jx] + ky_[jy] * ky_[jy];
      sum += mult * k2 * (c[0] * c[0] + c[1] * c[1]);
    }
  }
  const double area = length_ * length_ / static_cast<double>(n);
  return 0.5 * area * sum / static_cast<double>(n);
}

void TorusGeometry::gradient(std::span<const double> u, std::span<double> ux,
                             std::span<double> uy) const {
  check_shape(u);
  check_shape(ux);
  check_shape(uy);
  const int nyq_x = nx_ / 2;
  const int nyq_y = ny_ / 2;
  spectral_apply<true>(plans_->forward, plans_->backward, nx_, ny_, u, ux, [&](int jx, int jy) {
    return (jx == nyq_x || jy == nyq_y) ? 0.0 : kx_[jx];
  });
  spectral_apply<true>(plans_->forward, plans_->backward, nx_, ny_, u, uy, [&](int jx, int jy) {
    return (jx == nyq_x || jy == nyq_y) ? 0.0 : ky_[jy];
  });
}

void TorusGeometry::gradient_norm_sq(std::span<const double> u, std::span<double> out) const {
  check_shape(out);
  ScalarField ux(u.size()), uy(u.size());
  gradient(u, ux, uy);
  const auto& sigma = reference_density();
  parallel_for(u.size(), [&](std::size_t i) {
    out[i] = 0.25 * (ux[i] * ux[i] + uy[i] * uy[i]) / sigma[i];
  });
}

void TorusGeometry::band_limit(std::span<double> f) const {
  check_shape(f);
  const int cut_x = nx_ / 3;
  const int cut_y = ny_ / 3;
  spectral_apply(plans_->forward, plans_->backward, nx_, ny_, f, f, [&](int jx, int jy) {
    const int my = jy <= ny_ / 2 ? jy : ny_ - jy;
    return (jx <= cut_x && my <= cut_y) ? 1.0 : 0.0;
  });
}

double TorusGeometry::min_spacing() const {
  return std::min(length_ / nx_, length_ / ny_);
}

std::shared_ptr<const TorusGeometry> build_torus_geometry(int nx, int ny, double length,
                                                          std::vector<CosineMode> sigma0_modes) {
  return std::make_shared<const TorusGeometry>(nx, ny, length, std::move(sigma0_modes));
}

}  // namespace pcflow
