#include "hartree/functionals.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace hartree;

namespace {

FunctionalReport random_report(std::mt19937_64& rng, const ModelParams& params) {
  std::uniform_real_distribution<double> u(0.1, 5.0);
  return assemble_report(u(rng), u(rng), u(rng), u(rng), params);
}

}  // namespace

TEST_CASE("derived functionals from the four integrals") {
  const ModelParams m{3, 3.0, 2.0};
  const FunctionalReport r = assemble_report(1.0, 2.0, 3.0, 4.0, m);
  CHECK(r.energy == doctest::Approx(2.0 / 2 - 4.0 / 4 - 3.0 / 4));
  CHECK(r.bigK == doctest::Approx(2.0 + 2.0 * 1.0));
  CHECK(r.lagrange == doctest::Approx(4.0 / 2 - 3.0 / 4 - 4.0 / 4));
  CHECK(r.nehari == doctest::Approx(4.0 - 3.0 - 4.0));
  CHECK(r.vfunc == doctest::Approx(2.0 - 0.75 * 3.0 - 2.0));
  CHECK(aux_L1(r, m) == doctest::Approx(r.lagrange - r.nehari / 4));
  CHECK(aux_L2(r, m) == doctest::Approx(r.lagrange - r.nehari / 4));
  CHECK(pohozaev_residual(r, m) == doctest::Approx(r.nehari - 2.0 / 3.0 * r.vfunc));
}

TEST_CASE("auxiliary functionals split the Lagrange functional") {
  std::mt19937_64 rng(3);
  for (double p : {2.0, 2.5, 3.0, 4.0}) {
    const ModelParams m{3, p, 1.3};
    const FunctionalReport r = random_report(rng, m);
    CHECK(aux_L1(r, m) == doctest::Approx(r.lagrange - r.nehari / 4));
    CHECK(aux_L2(r, m) == doctest::Approx(r.lagrange - r.nehari / (p + 1)));
  }
}

TEST_CASE("field functionals of a Gaussian") {
  const GridSpec g(64, 10.0);
  const SpectralEngine e(g);
  const ModelParams m{3, 3.0, 1.0};
  const double a = 0.9, s = 1.0;
  const Field f = make_gaussian(g, a, s);
  const FunctionalReport r = report(f, m, e);
  CHECK(r.mass == doctest::Approx(oracle::gaussian_mass(a, s)).epsilon(1e-12));
  CHECK(r.kinetic == doctest::Approx(oracle::gaussian_kinetic(a, s)).epsilon(1e-10));
  CHECK(r.lp == doctest::Approx(oracle::gaussian_lq(a, s, 4.0)).epsilon(1e-12));
  CHECK(lp_integral(f, 3.0) == doctest::Approx(oracle::gaussian_lq(a, s, 3.0)).epsilon(1e-12));
  // Hartree energy of a Gaussian density by the radial oracle: \int V rho = 4 pi \int V(r) rho(r) r^2 dr.
  using boost::math::quadrature::gauss_kronrod;
  const auto rho = [&](double r) { return a * a * std::exp(-r * r / (s * s)); };
  const double h_ref = gauss_kronrod<double, 31>::integrate(
      [&](double r) { return 4.0 * oracle::pi * r * r * rho(r) * oracle::radial_hartree(rho, r, 12.0); }, 0.0, 9.0,
      8, 1e-12);
  CHECK(r.hartree == doctest::Approx(h_ref).epsilon(1e-6));
}

TEST_CASE("virial algebra on random integrals") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const ModelParams m{3, std::uniform_real_distribution<double>(1.2, 4.9)(rng), 1.0};
    const FunctionalReport r = random_report(rng, m);
    const double lhs = 16 * r.energy + (16 - 4.0 * 3 * (m.p - 1)) / (m.p + 1) * r.lp;
    CHECK(lhs == doctest::Approx(8 * r.vfunc).epsilon(1e-12));
  }
}

TEST_CASE("scaling powers and resampled functionals agree") {
  const GridSpec g(64, 10.0);
  const SpectralEngine e(g);
  const ModelParams m{3, 3.0, 1.0};
  const Field f = make_gaussian(g, 1.0, 1.0);
  const FunctionalReport base = report(f, m, e);
  for (ScalingKind kind : {ScalingKind::Amplitude, ScalingKind::MassDilation, ScalingKind::LpDilation,
                           ScalingKind::H1Dilation}) {
    for (double lam : {0.8, 1.25}) {
      const Field scaled = apply_scaling(f, kind, lam, m, e, SupportCheck::Skip);
      const FunctionalReport direct = report(scaled, m, e, {HartreeMode::Truncated, SupportCheck::Skip});
      const FunctionalReport closed = scaled_functionals(base, kind, lam, m);
      CAPTURE(to_string(kind));
      CAPTURE(lam);
      CHECK(direct.mass == doctest::Approx(closed.mass).epsilon(1e-7));
      CHECK(direct.kinetic == doctest::Approx(closed.kinetic).epsilon(1e-7));
      CHECK(direct.lp == doctest::Approx(closed.lp).epsilon(1e-7));
      CHECK(direct.hartree == doctest::Approx(closed.hartree).epsilon(1e-6));
    }
  }
  const ScalingPowers mp = scaling_powers(ScalingKind::MassDilation, m);
  CHECK(mp.mass == doctest::Approx(0.0));
  CHECK(mp.kinetic == doctest::Approx(2.0));
  CHECK(mp.hartree == doctest::Approx(2.0));
  CHECK(mp.lp == doctest::Approx(3.0));
  CHECK(dilation_exponent(ScalingKind::H1Dilation, m) == doctest::Approx(1.0));
}

TEST_CASE("Nehari root and V-zero dilation") {
  const ModelParams m{3, 3.0, 1.0};
  const FunctionalReport r = assemble_report(1.0, 2.0, 3.0, 0.5, m);
  const double lam = nehari_lambda(r, m);
  CHECK(scaled_functionals(r, ScalingKind::Amplitude, lam, m).nehari == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(r.bigK == doctest::Approx(lam * lam * r.lp + lam * lam * r.hartree).epsilon(1e-10));
  const auto mu = v_zero_lambda(r, m);
  REQUIRE(mu.has_value());
  CHECK(std::abs(scaled_functionals(r, ScalingKind::MassDilation, *mu, m).vfunc) < 1e-9);
  CHECK_THROWS_AS(nehari_root(1.0, 0.0, 0.0, 3.0), Error);
}

TEST_CASE("region classification") {
  const ModelParams m{3, 3.0, 1.0};
  const double d_N = 10.0;
  FunctionalReport r = assemble_report(0.1, 0.2, 0.01, 0.01, m);
  CHECK(classify(r, d_N) == Region::RPlus);
  r = assemble_report(1.0, 1.0, 20.0, 1.0, m);
  CHECK(classify(r, d_N) == Region::K);
  r = assemble_report(0.1, 10.0, 11.0, 0.0, m);
  CHECK(classify(r, d_N) == Region::KPlus);
  r = assemble_report(50.0, 50.0, 1.0, 1.0, m);
  CHECK(classify(r, d_N) == Region::OutsideSublevel);
  CHECK(std::string(to_string(Region::KPlus)) == "K_PLUS");
}

TEST_CASE("lambda derivatives match centred differences") {
  std::mt19937_64 rng(5);
  const ModelParams m{3, 3.0, 1.0};
  for (int i = 0; i < 50; ++i) {
    const FunctionalReport r = random_report(rng, m);
    const double lam = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    for (ScalingKind kind : {ScalingKind::Amplitude, ScalingKind::MassDilation}) {
      const auto [fd, exact] = lambda_derivative_check(r, kind, lam, m);
      CHECK(fd == doctest::Approx(exact).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(lambda_derivative_check(random_report(rng, m), ScalingKind::LpDilation, 1.0, m), Error);
}

TEST_CASE("GN ratios are scale invariant") {
  const GridSpec g(64, 10.0);
  const SpectralEngine e(g);
  const ModelParams m{3, 3.0, 1.0};
  const GNConstants k = make_gn_constants(1.0, 50.0, 3.0);
  const Field f = make_gaussian(g, 1.0, 1.0);
  const double rp = gn_ratio_power(f, 1.0, k, e), rh = gn_ratio_hartree(f, k, e);
  const Field amp = apply_scaling(f, ScalingKind::Amplitude, 1.7, m, e);
  const Field dil = apply_scaling(f, ScalingKind::MassDilation, 1.2, m, e);
  CHECK(gn_ratio_power(amp, 1.0, k, e) == doctest::Approx(rp).epsilon(1e-12));
  CHECK(gn_ratio_hartree(amp, k, e) == doctest::Approx(rh).epsilon(1e-12));
  CHECK(gn_ratio_power(dil, 1.0, k, e) == doctest::Approx(rp).epsilon(1e-7));
  CHECK(gn_ratio_hartree(dil, k, e) == doctest::Approx(rh).epsilon(1e-6));
  CHECK_THROWS_AS(gn_ratio_power(f, 3.0, k, e), Error);
  CHECK_THROWS_AS(gn_ratio_power(Field(g), 1.0, k, e), Error);
}
