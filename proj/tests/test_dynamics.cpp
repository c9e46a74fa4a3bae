#include "hartree/dynamics.hpp"
#include "hartree/groundstate.hpp"
#include "hartree/orbit.hpp"

#include <doctest.h>

#include <sstream>

using namespace hartree;

TEST_CASE("linear step is the exact free propagator") {
  const GridSpec g(32, 8.0);
  const SpectralEngine e(g);
  const Field f = band_limited_noise(e, 2);
  const double dt = 0.37;
  const Field stepped = step_strang(f, dt, {3, 3.0, 1.0}, e, {HartreeMode::Truncated, true});
  Eigen::ArrayXcd spec = e.dft(f.values);
  for (Eigen::Index i = 0; i < spec.size(); ++i) spec[i] *= std::exp(Complex(0.0, e.laplacian_symbol()[i] * dt));
  CHECK((e.idft(spec) - stepped.values).abs().maxCoeff() < 1e-13);
}

TEST_CASE("Strang splitting is second order") {
  const GridSpec g(32, 8.0);
  const SpectralEngine e(g);
  const ModelParams m{3, 3.0, 1.0};
  const Field f0 = make_gaussian(g, 0.8, 1.0);
  const auto run = [&](int steps) {
    Field f = f0;
    for (int i = 0; i < steps; ++i) f = step_strang(f, 0.2 / steps, m, e);
    return f;
  };
  const Field ref = run(256);
  const double e1 = std::sqrt(mass(Field(g, run(8).values - ref.values)));
  const double e2 = std::sqrt(mass(Field(g, run(16).values - ref.values)));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("standing wave rotates in phase only") {
  const GridSpec g(32, 10.0);
  const SpectralEngine e(g);
  const ModelParams m{3, 3.0, 1.0};
  const GroundState u = solve_ground_eq15(m, g, e);
  EvolveConfig c;
  c.dt = 1e-3;
  c.t_end = 0.2;
  c.support_check = SupportCheck::Skip;
  Field last(g);
  const TrajectoryRecord rec =
      evolve(u.field, m, c, e, [&](const TrajectoryRow&, const Field& psi, const FunctionalReport&) { last = psi; });
  CHECK(rec.outcome == Outcome::GlobalUntilT);
  CHECK(rec.rows.back().t == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(rec.mass_drift < 1e-12);
  const OrbitDistanceResult d = orbit_distance(last, u.field, e);
  CHECK(d.distance_h1 < 1e-5);
  CHECK(d.best_phase == doctest::Approx(m.omega * 0.2).epsilon(1e-5));
}

TEST_CASE("evolution configuration validation and CSV output") {
  EvolveConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = EvolveConfig{};
  c.blowup_factor = 1.0;
  CHECK_THROWS_AS(validate(c), Error);

  TrajectoryRecord rec;
  rec.rows.push_back({0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
  rec.outcome = Outcome::Blowup;
  rec.t_star = 1.5;
  std::ostringstream os;
  write_trajectory_csv(os, rec);
  CHECK(os.str() == "t,mass,energy,grad_norm_sq,G,G_prime,eightV\n0,1,2,3,4,5,6\n# outcome=BLOWUP(1.5)\n");
  CHECK(outcome_label(rec) == "BLOWUP(1.5)");
}

TEST_CASE("virial monitors of a real Gaussian") {
  const GridSpec g(64, 10.0);
  const SpectralEngine e(g);
  const ModelParams m{3, 3.0, 1.0};
  const double s = 1.0;
  const VirialMonitors v = virial_monitors(make_gaussian(g, 1.0, s), m, e);
  // G = \int r^2 exp(-r^2/s^2) = 1.5 pi^{3/2} s^5; a real field carries no current.
  CHECK(v.G == doctest::Approx(1.5 * std::pow(M_PI, 1.5) * std::pow(s, 5)).epsilon(1e-10));
  CHECK(std::abs(v.G_prime) < 1e-12);
}
