// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any criterion fails.

#include "hartree/dynamics.hpp"
#include "hartree/experiments.hpp"
#include "hartree/groundstate.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

using namespace hartree;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double summary_value(const ExperimentReport& r, const std::string& key) {
  for (const auto& [k, v] : r.summary)
    if (k == key) return std::stod(v);
  throw Error(ErrorCode::ConfigError, "summary lacks " + key);
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hartree_acceptance" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

// Shared state between criteria.
struct Shared {
  std::optional<GroundState> ground64;
  std::optional<SpectralEngine> engine64;
};

void convolution_oracle(Verdict& o, Shared&) {
  const GridSpec g8(8, 3.0);
  const SpectralEngine e8(g8);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  double worst_periodic = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    Field f(g8);
    for (auto& v : f.values) v = Complex(normal(rng), normal(rng));
    const Eigen::ArrayXd ref = oracle::periodic_hartree_direct(f);
    const Field fft = hartree_potential(f, HartreeMode::Periodic, e8);
    worst_periodic = std::max(worst_periodic, (fft.values.real() - ref).abs().maxCoeff() / ref.abs().maxCoeff());
  }
  o.require(worst_periodic < 1e-10, "periodic FFT vs direct summation");

  const GridSpec g(64, 10.0);
  const SpectralEngine e(g);
  const Field f = make_gaussian(g, 1.0, 1.0);
  const Field v = hartree_potential(f, HartreeMode::Truncated, e);
  const auto rho = [](double r) { return std::exp(-r * r); };
  const int n = g.n(), c = n / 2;
  double err = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    // Points along the x1 axis and along the main diagonal.
    for (const auto idx : {g.index(i, c, c), g.index(i, i, i)}) {
      const bool diagonal = idx == g.index(i, i, i);
      const double r = std::abs(g.coord(i)) * (diagonal ? std::sqrt(3.0) : 1.0);
      const double ref = oracle::radial_hartree(rho, r, 12.0 + r);
      err = std::max(err, std::abs(v.values[static_cast<Eigen::Index>(idx)].real() - ref));
      scale = std::max(scale, std::abs(ref));
    }
  }
  o.require(err / scale < 1e-6, "truncated vs radial quadrature");
  o.detail << "periodic rel err " << sci(worst_periodic) << ", truncated rel err " << sci(err / scale);
}

void virial_algebra(Verdict& o, Shared&) {
  const GridSpec g(16, 6.0);
  const SpectralEngine e(g);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ModelParams m{3, 7.0 / 3.0 + (5.0 - 7.0 / 3.0) * 0.999 * u01(rng), 0.2 + 2.0 * u01(rng)};
    // Random complex Gaussian sum with a random phase gradient.
    Field f(g);
    for (int b = 0; b < 3; ++b) {
      const Vec3 x0{2.0 * (u01(rng) - 0.5), 2.0 * (u01(rng) - 0.5), 2.0 * (u01(rng) - 0.5)};
      Field bump = make_gaussian(g, 0.2 + 2.0 * u01(rng), 0.6 + 0.5 * u01(rng), x0);
      bump.values *= std::polar(1.0, 2.0 * oracle::pi * u01(rng));
      f.values += bump.values;
    }
    const double kx = u01(rng) - 0.5;
    for (int a = 0; a < g.n(); ++a)
      for (int b = 0; b < g.n(); ++b)
        for (int k = 0; k < g.n(); ++k)
          f.values[static_cast<Eigen::Index>(g.index(a, b, k))] *= std::polar(1.0, kx * g.coord(a));
    const FunctionalReport r = report(f, m, e, {HartreeMode::Truncated, SupportCheck::Skip});
    const double lhs = 16.0 * r.energy + (16.0 - 4.0 * m.dim * (m.p - 1.0)) / (m.p + 1.0) * r.lp;
    const double scale = 8.0 * (r.kinetic + m.virial_weight() * r.lp + 0.5 * r.hartree);
    worst = std::max(worst, std::abs(lhs - 8.0 * r.vfunc) / scale);
  }
  o.require(worst < 1e-12, "identity residual");
  o.detail << "1000 fields, worst rel residual " << sci(worst);
}

void conservation_and_dynamic_virial(Verdict& c3, Verdict& c4) {
  const GridSpec g(64, 16.0);
  const SpectralEngine e(g);
  const ModelParams m{3, 3.0, 1.0};
  EvolveConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 5.0;
  cfg.sample_every = 10;
  cfg.support_check = SupportCheck::Skip;
  const Field psi0 = make_gaussian(g, 0.06, std::sqrt(10.0));
  const TrajectoryRecord rec = evolve(psi0, m, cfg, e);
  c3.require(rec.outcome == hartree::Outcome::GlobalUntilT, "run not global");
  c3.require(rec.mass_drift < 1e-10, "mass drift");
  c3.require(rec.energy_drift < 1e-6, "energy drift");
  c3.detail << "mass drift " << sci(rec.mass_drift) << ", energy drift " << sci(rec.energy_drift) << ", "
            << rec.rows.size() << " samples";

  double worst = 0.0;
  const auto& rows = rec.rows;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const double h0 = rows[i].t - rows[i - 1].t, h1 = rows[i + 1].t - rows[i].t;
    // Second divided difference on a possibly non-uniform stencil.
    const double dd = 2.0 * ((rows[i + 1].G - rows[i].G) / h1 - (rows[i].G - rows[i - 1].G) / h0) / (h0 + h1);
    worst = std::max(worst, std::abs(dd - rows[i].eightV) / std::abs(rows[i].eightV));
  }
  c4.require(rows.size() >= 3, "too few samples");
  c4.require(worst < 1e-3, "G'' vs 8V");
  c4.detail << rows.size() - 2 << " interior samples, worst rel err " << sci(worst);
}

void extremizers(Verdict& o, Shared&) {
  const auto dir = scratch("gn_verify");
  Config c = Config::parse("n = 64\nL = 10\nq = 1\nprobes = 100\nrng_seed = 7\n");
  c.set("output_dir", dir.string());
  const ExperimentReport r = run_gn_verify(c);
  const double rr = summary_value(r, "R_residual"), wr = summary_value(r, "W_residual");
  const double ratio_r = summary_value(r, "ratio_at_R"), ratio_w = summary_value(r, "ratio_at_W");
  const double max_p = summary_value(r, "max_probe_ratio_power"), max_h = summary_value(r, "max_probe_ratio_hartree");
  o.require(rr < 1e-6 && wr < 1e-6, "extremizer residuals");
  o.require(std::abs(ratio_r - 1.0) <= 1e-3 && std::abs(ratio_w - 1.0) <= 1e-3, "extremizer ratios");
  o.require(max_p <= 1.0 + 1e-6 && max_h <= 1.0 + 1e-6, "probe ratios");
  o.require(r.passed, "gn-verify report");
  o.detail << "residuals R " << sci(rr) << " W " << sci(wr) << "; ratios R " << ratio_r << " W " << ratio_w
           << "; max probe ratios " << max_p << ", " << max_h;
}

void ground_state(Verdict& o, Shared& s) {
  const ModelParams m{3, 3.0, 1.0};
  const GridSpec g64(64, 10.0), g32(32, 10.0);
  s.engine64.emplace(g64);
  const SpectralEngine e32(g32);
  s.ground64 = solve_ground_eq15(m, g64, *s.engine64);
  const GroundState u32 = solve_ground_eq15(m, g32, e32);
  const FunctionalReport& f = s.ground64->functionals;
  const double poh = pohozaev_residual(f, m);
  const double refine = std::abs(f.lagrange - u32.functionals.lagrange) / f.lagrange;
  o.require(s.ground64->residual < 1e-6, "residual");
  o.require(std::abs(f.nehari) <= 1e-8 * f.bigK, "Nehari");
  o.require(std::abs(poh) <= 1e-3 * f.bigK, "Pohozaev");
  o.require(f.lagrange > 0.0, "d_N positive");
  o.require(refine <= 1e-3, "refinement");
  o.detail << "d_N " << f.lagrange << ", residual " << sci(s.ground64->residual) << ", |N|/K "
           << sci(std::abs(f.nehari) / f.bigK) << ", |P|/K " << sci(std::abs(poh) / f.bigK) << ", 32->64 rel change "
           << sci(refine);
}

void variational_comparison(Verdict& o, Shared& s) {
  const ModelParams m{3, 3.0, 1.0};
  if (!s.ground64) ground_state(o, s);
  const VariationalEstimates est = sample_dM(m, s.ground64->field.grid, *s.engine64, *s.ground64, 50, 11);
  o.require(est.d_M_samples.size() >= 50, "sample count");
  o.require(est.d_M_min >= est.d_N - 1e-3, "min over samples");
  o.detail << est.d_M_samples.size() << " samples, min L " << est.d_M_min << " vs d_N " << est.d_N;
}

void dichotomy(Verdict& o, Shared&) {
  Config c = Config::parse(
      "p = 3\nn = 64\nL = 10\ndt = 4e-3\nt_end = 5\nF = 4\n"
      "lambdas = 0.5 0.8 0.9 0.95 1.02 1.05 1.1 1.2\ngaussian_amplitudes = 0.3 0.6 1 1.5\n");
  c.set("output_dir", scratch("dichotomy").string());
  const DichotomyReport r = run_dichotomy(c);
  int asserted = 0, concordant = 0;
  std::ostringstream regions;
  for (const auto& row : r.rows) {
    asserted += row.asserted;
    concordant += row.asserted && row.concordant;
    regions << (regions.tellp() ? " " : "") << to_string(row.region) << "->" << outcome_label(row.trajectory);
  }
  o.require(asserted >= 10, "fewer than 10 classified seeds");
  o.require(asserted == concordant, "concordance");
  o.require(r.passed, "dichotomy report");
  for (const auto& f : r.failures) o.detail << " {" << f << "}";
  o.detail << concordant << "/" << asserted << " concordant; " << regions.str();
}

void instability(Verdict& o, Shared&) {
  Config c = Config::parse(
      "p = 3\nn = 64\nL = 10\ndt = 4e-3\nt_end = 5\nF = 4\nlambdas = 1.02 1.05 1.1 1.2\ninclude_control = false\n");
  c.set("output_dir", scratch("instability").string());
  const InstabilityReport r = run_instability(c);
  double worst = 0.0;
  int blowups = 0;
  for (const auto& row : r.rows) {
    worst = std::max(worst, std::abs(row.h1_distance - row.expected) / row.expected);
    blowups += row.trajectory.outcome == hartree::Outcome::Blowup;
    o.detail << "lambda " << row.lambda << ": " << outcome_label(row.trajectory) << "; ";
  }
  o.require(r.rows.size() == 4 && blowups == 4, "every lambda > 1 blows up");
  o.require(worst < 1e-12, "H1 distance identity");
  o.require(r.passed, "instability report");
  o.detail << "max rel error of the H1 distance identity " << sci(worst);
}

void orbit_stability(Verdict& o, Shared&) {
  Config c = Config::parse(
      "p = 2\nn = 64\nL = 300\ntol = 1e-8\ndt = 0.05\nt_end = 10\nsample_every = 10\nm_fraction = 0.5\n"
      "deltas = 0 0.01\nepsilon_factor = 10\ncontrol_tol = 1e-6\nw_n = 64\nw_L = 10\nrng_seed = 3\n");
  c.set("output_dir", scratch("orbit").string());
  const OrbitReport r = run_orbit_stability(c);
  double control = -1.0, perturbed = -1.0;
  for (const auto& row : r.rows) (row.delta == 0.0 ? control : perturbed) = row.sup_distance;
  o.require(perturbed >= 0.0 && perturbed < 1e-1, "delta = 1e-2 orbit distance");
  o.require(control >= 0.0 && control < 1e-6, "delta = 0 control");
  o.require(r.passed, "orbit report");
  o.detail << "m " << r.mass << " (0.5 of " << r.w_grad_norm_sq << "), sup distance delta=1e-2 " << sci(perturbed)
           << ", control " << sci(control);
}

void derivative_identities(Verdict& o, Shared&) {
  const GridSpec g(32, 8.0);
  const SpectralEngine e(g);
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ModelParams m{3, 7.0 / 3.0 + 2.5 * u01(rng), 0.5 + u01(rng)};
    Field f = band_limited_noise(e, 1000 + static_cast<std::uint64_t>(i));
    f.values *= make_gaussian(g, 2.0 + 4.0 * u01(rng), 1.5).values;
    const FunctionalReport base = report(f, m, e, {HartreeMode::Truncated, SupportCheck::Skip});
    const double lam = 0.5 + 1.5 * u01(rng);
    for (ScalingKind kind : {ScalingKind::Amplitude, ScalingKind::MassDilation}) {
      const auto [fd, exact] = lambda_derivative_check(base, kind, lam, m);
      worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1e-300));
    }
  }
  o.require(worst < 1e-6, "centred difference vs closed form");
  o.detail << "100 pairs x 2 identities, worst rel err " << sci(worst);
}

}  // namespace

int main() {
  Shared shared;
  std::vector<std::pair<std::string, Verdict>> results(11);
  const char* names[] = {"convolution oracle",       "virial algebra",          "conservation",
                         "dynamic virial",           "GN extremizers",          "ground state",
                         "variational comparison",   "dichotomy concordance",   "strong instability",
                         "orbital stability",        "derivative identities"};
  for (int i = 0; i < 11; ++i) results[static_cast<std::size_t>(i)].first = names[i];

  const auto run = [&](int idx, const std::function<void(Verdict&)>& body) {
    Verdict& o = results[static_cast<std::size_t>(idx)].second;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(o);
    } catch (const std::exception& ex) {
      o.require(false, std::string("exception: ") + ex.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << idx + 1 << " (" << results[static_cast<std::size_t>(idx)].first
              << "): " << o.detail.str() << " [" << static_cast<int>(secs) << " s]" << std::endl;
  };

  run(0, [&](Verdict& o) { convolution_oracle(o, shared); });
  run(1, [&](Verdict& o) { virial_algebra(o, shared); });
  {
    // Criteria 3 and 4 share one trajectory.
    Verdict& c4 = results[3].second;
    run(2, [&](Verdict& o) {
      try {
        conservation_and_dynamic_virial(o, c4);
      } catch (const std::exception& ex) {
        c4.require(false, std::string("exception: ") + ex.what());
        throw;
      }
    });
    run(3, [](Verdict&) {});
  }
  run(4, [&](Verdict& o) { extremizers(o, shared); });
  run(5, [&](Verdict& o) { ground_state(o, shared); });
  run(6, [&](Verdict& o) { variational_comparison(o, shared); });
  run(7, [&](Verdict& o) { dichotomy(o, shared); });
  run(8, [&](Verdict& o) { instability(o, shared); });
  run(9, [&](Verdict& o) { orbit_stability(o, shared); });
  run(10, [&](Verdict& o) { derivative_identities(o, shared); });

  int failed = 0;
  for (const auto& [name, o] : results) failed += !o.pass;
  std::cout << (failed ? "FAIL" : "PASS") << " acceptance: " << 11 - failed << "/11 criteria passed" << std::endl;
  return failed ? 1 : 0;
}
