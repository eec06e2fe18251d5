#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

#include "pcflow/geometry.hpp"

namespace testing_support {

using pcflow::ScalarField;
inline constexpr double kPi = std::numbers::pi;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Σ a cos(kx x + ky y) + b sin(...) over |kx|,|ky| ≤ kmax, amplitudes ~ amp/(1+|k|²).
inline ScalarField random_torus_field(const pcflow::TorusGeometry& g, std::mt19937_64& rng,
                                      double amp, int kmax = 4) {
  ScalarField f(g.size(), 0.0);
  const double w = 2.0 * kPi / g.length();
  for (int kx = -kmax; kx <= kmax; ++kx) {
    for (int ky = 0; ky <= kmax; ++ky) {
      if (ky == 0 && kx <= 0) continue;
      const double s = amp / (1.0 + kx * kx + ky * ky);
      const double a = uniform(rng, -s, s);
      const double b = uniform(rng, -s, s);
      for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) {
          const double th = w * (kx * g.x(ix) + ky * g.y(iy));
          f[g.index(ix, iy)] += a * std::cos(th) + b * std::sin(th);
        }
    }
  }
  return f;
}

// Σ c_k μ^k for k = 1..degree.
inline ScalarField random_sphere_field(const pcflow::SphereGeometry& g, std::mt19937_64& rng,
                                       double amp, int degree = 4) {
  std::vector<double> c(degree + 1);
  for (int k = 1; k <= degree; ++k) c[k] = uniform(rng, -amp, amp) / k;
  ScalarField f(g.size());
  for (int i = 0; i < g.nmu(); ++i) {
    double v = 0.0;
    for (int k = degree; k >= 1; --k) v = (v + c[k]) * g.mu(i);
    f[i] = v;
  }
  return f;
}

inline double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing_support
