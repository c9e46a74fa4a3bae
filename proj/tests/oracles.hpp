#pragma once

// Reference values computed without the library's transforms.

#include "hartree/core.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

constexpr double pi = std::numbers::pi;

/// \int |a exp(-r^2/(2 s^2))|^2 d^3x
inline double gaussian_mass(double a, double s) { return a * a * std::pow(pi, 1.5) * s * s * s; }

/// \int |grad a exp(-r^2/(2 s^2))|^2 d^3x
inline double gaussian_kinetic(double a, double s) { return 1.5 * a * a * std::pow(pi, 1.5) * s; }

/// \int |a exp(-r^2/(2 s^2))|^q d^3x
inline double gaussian_lq(double a, double s, double q) {
  return std::pow(a, q) * std::pow(2.0 * pi * s * s / q, 1.5);
}

/// Laplacian of a exp(-r^2/(2 s^2)).
inline double gaussian_laplacian(double a, double s, double r2) {
  return a * (r2 / (s * s * s * s) - 3.0 / (s * s)) * std::exp(-r2 / (2.0 * s * s));
}

/// (|x|^{-2} * rho)(r) for radial rho, from the angular integral
/// \int dOmega / |x - y|^2 = (2 pi / (r r')) ln((r + r') / |r - r'|).
template <typename Rho>
double radial_hartree(Rho&& rho, double r, double r_max) {
  using boost::math::quadrature::gauss_kronrod;
  if (r == 0.0) {
    return 4.0 * pi * gauss_kronrod<double, 61>::integrate([&](double s) { return rho(s); }, 0.0, r_max, 15, 1e-14);
  }
  const auto f = [&](double s) { return 2.0 * pi * rho(s) * s / r * std::log((r + s) / std::abs(r - s)); };
  const double inner = gauss_kronrod<double, 61>::integrate(f, 0.0, r, 15, 1e-14);
  const double outer = gauss_kronrod<double, 61>::integrate(f, r, r_max, 15, 1e-14);
  return inner + outer;
}

/// Periodic |x|^{-2} potential by O(n^6) summation with a kernel built from the Fourier series
/// (2 pi^2 / |k|, zero mean) by explicit trigonometric sums.
inline Eigen::ArrayXd periodic_hartree_direct(const hartree::Field& f) {
  const hartree::GridSpec& g = f.grid;
  const int n = g.n();
  const double L = g.half_length();
  const double dk = pi / L;
  const auto mode = [n](int i) { return i < n / 2 ? i : i - n; };
  Eigen::ArrayXd kernel(static_cast<Eigen::Index>(g.size()));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
              const int mi = mode(i), mj = mode(j), mk = mode(k);
              if (mi == 0 && mj == 0 && mk == 0) continue;
              const double kk = dk * std::sqrt(double(mi * mi + mj * mj + mk * mk));
              acc += 2.0 * pi * pi / kk * std::cos(2.0 * pi * (mi * a + mj * b + mk * c) / n);
            }
        kernel[static_cast<Eigen::Index>(g.index(a, b, c))] = acc / std::pow(2.0 * L, 3);
      }
  const Eigen::ArrayXd rho = f.values.abs2();
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(rho.size());
  const double h3 = g.cell_volume();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
              const int da = (i - a + n) % n, db = (j - b + n) % n, dc = (k - c + n) % n;
              acc += kernel[static_cast<Eigen::Index>(g.index(da, db, dc))] *
                     rho[static_cast<Eigen::Index>(g.index(a, b, c))];
            }
        v[static_cast<Eigen::Index>(g.index(i, j, k))] = acc * h3;
      }
  return v;
}

}  // namespace oracle
