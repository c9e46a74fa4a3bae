#include "hartree/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hartree {

double sine_integral(double x) {
  if (x < 0.0 || std::isnan(x)) throw Error(ErrorCode::NegativeArgument, "Si requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return std::numbers::pi / 2;

  if (x < 4.0) {
    // sum_k (-1)^k x^{2k+1} / ((2k+1) (2k+1)!)
    const double x2 = x * x;
    double term = x;  // x^{2k+1} / (2k+1)!
    double sum = x;
    for (int k = 1; k < 60; ++k) {
      term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
      const double contrib = term / (2.0 * k + 1.0);
      sum += contrib;
      if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }

  // E1(ix) by modified Lentz evaluation of its continued fraction; Si = pi/2 + Im(e^{-ix} CF).
  constexpr double tiny = 1e-300;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  Complex b(1.0, x);
  Complex c(1.0 / tiny, 0.0);
  Complex d = 1.0 / b;
  Complex h = d;
  for (int i = 2; i < 10000; ++i) {
    const double a = -static_cast<double>((i - 1) * (i - 1));
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const Complex del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
  }
  h *= Complex(std::cos(x), -std::sin(x));
  return std::numbers::pi / 2 + h.imag();
}

}  // namespace hartree
