#include "hartree/spectral.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <random>

using namespace hartree;

TEST_CASE("sine integral against quadrature") {
  using boost::math::quadrature::gauss_kronrod;
  for (double x : {0.1, 1.0, 3.9, 4.1, 10.0, 55.0, 300.0}) {
    const double ref = gauss_kronrod<double, 61>::integrate(
        [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; }, 0.0, x, 20, 1e-15);
    CHECK(sine_integral(x) == doctest::Approx(ref).epsilon(1e-13));
  }
  CHECK(sine_integral(0.0) == 0.0);
  CHECK_THROWS_AS(sine_integral(-1.0), Error);
}

TEST_CASE("DFT round trip") {
  const GridSpec g(16, 4.0);
  const SpectralEngine e(g);
  const Field f = band_limited_noise(e, 5);
  CHECK((e.idft(e.dft(f.values)) - f.values).abs().maxCoeff() < 1e-14);
  const Field back = inverse(forward(f, e), e);
  CHECK((back.values - f.values).abs().maxCoeff() < 1e-14);
}

TEST_CASE("spectral Laplacian and kinetic energy of a Gaussian") {
  const GridSpec g(64, 10.0);
  const SpectralEngine e(g);
  const double a = 0.7, s = 1.1;
  const Field f = make_gaussian(g, a, s);
  const Field lap = laplacian(f, e);
  double err = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.n(); ++k) {
        const double r2 = g.coord(i) * g.coord(i) + g.coord(j) * g.coord(j) + g.coord(k) * g.coord(k);
        const auto idx = static_cast<Eigen::Index>(g.index(i, j, k));
        err = std::max(err, std::abs(lap.values[idx] - oracle::gaussian_laplacian(a, s, r2)));
      }
  CHECK(err < 1e-9);
  CHECK(kinetic_energy(f, e) == doctest::Approx(oracle::gaussian_kinetic(a, s)).epsilon(1e-10));
  const auto grad = gradient(f, e);
  double sum = 0.0;
  for (const auto& d : grad) sum += d.values.abs2().sum() * g.cell_volume();
  CHECK(sum == doctest::Approx(oracle::gaussian_kinetic(a, s)).epsilon(1e-10));
}

TEST_CASE("periodic Hartree potential matches direct summation") {
  const GridSpec g(8, 3.0);
  const SpectralEngine e(g);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  Field f(g);
  for (auto& v : f.values) v = Complex(normal(rng), normal(rng));
  const Eigen::ArrayXd ref = oracle::periodic_hartree_direct(f);
  const Field fft = hartree_potential(f, HartreeMode::Periodic, e);
  const Field lib_direct = hartree_potential_direct(f, e);
  const double scale = ref.abs().maxCoeff();
  CHECK((fft.values.real() - ref).abs().maxCoeff() / scale < 1e-10);
  CHECK((lib_direct.values.real() - ref).abs().maxCoeff() / scale < 1e-10);
  CHECK(fft.values.imag().abs().maxCoeff() == 0.0);
}

TEST_CASE("truncated Hartree potential matches the radial oracle") {
  const GridSpec g(64, 10.0);
  const SpectralEngine e(g);
  const double s = 1.0;
  const Field f = make_gaussian(g, 1.0, s);
  const Field v = hartree_potential(f, HartreeMode::Truncated, e);
  const auto rho = [s](double r) { return std::exp(-r * r / (s * s)); };
  double err = 0.0, scale = 0.0;
  const int n = g.n();
  for (int i = 0; i < n; i += 3) {
    const double r = std::abs(g.coord(i));
    const double ref = oracle::radial_hartree(rho, r, 12.0);
    err = std::max(err, std::abs(v.values[static_cast<Eigen::Index>(g.index(i, n / 2, n / 2))].real() - ref));
    scale = std::max(scale, std::abs(ref));
  }
  CHECK(err / scale < 1e-6);
  CHECK_THROWS_AS(hartree_potential(make_gaussian(g, 1.0, 1.8), HartreeMode::Truncated, e), Error);
}

TEST_CASE("band-limited noise is real, normalised and deterministic") {
  const GridSpec g(32, 6.0);
  const SpectralEngine e(g);
  const Field a = band_limited_noise(e, 9), b = band_limited_noise(e, 9), c = band_limited_noise(e, 10);
  CHECK(mass(a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.values.imag().abs().maxCoeff() == 0.0);
  CHECK((a.values - b.values).abs().maxCoeff() == 0.0);
  CHECK((a.values - c.values).abs().maxCoeff() > 1e-3);
  const Eigen::ArrayXcd spec = e.dft(a.values);
  const double kmax = g.n() * oracle::pi / (4.0 * g.half_length());
  double outside = 0.0;
  for (Eigen::Index i = 0; i < spec.size(); ++i)
    if (-e.laplacian_symbol()[i] > kmax * kmax * (1 + 1e-12)) outside = std::max(outside, std::abs(spec[i]));
  CHECK(outside < 1e-10 * spec.abs().maxCoeff());
}
