#include "hartree/experiments.hpp"

#include "hartree/report_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <functional>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace hartree {

void ExperimentReport::add(const std::string& key, double value) { summary.emplace_back(key, format_double(value)); }

void ExperimentReport::write_summary(const std::filesystem::path& dir) {
  CsvTable t({"key", "value"});
  t.row().cell("experiment").cell(name);
  t.row().cell("passed").cell(passed ? "true" : "false");
  for (const auto& [k, v] : summary) t.row().cell(k).cell(v);
  for (const auto& f : failures) t.row().cell("failure").cell("\"" + f + "\"");
  const auto path = dir / "summary.csv";
  t.write(path);
  files.push_back(path);
}

Field smooth_perturbation(const SpectralEngine& engine, std::uint64_t seed, double norm) {
  const GridSpec& g = engine.grid();
  Field out = band_limited_noise(engine, seed);
  out.values *= make_gaussian(g, 1.0, g.half_length() / 5.0).values;
  out.values *= norm / std::sqrt(mass(out));
  return out;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

using KeySet = std::set<std::string>;

const KeySet kModel = {"D", "p", "omega"};
const KeySet kGrid = {"n", "L"};
const KeySet kSolver = {"tol", "max_iter", "seed_width"};
const KeySet kDynamics = {"dt", "t_end", "F", "sample_every", "dt_min", "growth_threshold", "hartree_mode",
                          "support_check"};
const KeySet kIo = {"rng_seed", "output_dir"};

KeySet keys(std::initializer_list<const KeySet*> groups, std::initializer_list<const char*> extra = {}) {
  KeySet out;
  for (const KeySet* g : groups) out.insert(g->begin(), g->end());
  for (const char* e : extra) out.insert(e);
  return out;
}

ModelParams model_from(const Config& c) {
  ModelParams m{c.get_int("D", 3), c.get_double("p"), c.get_double("omega", 1.0)};
  validate_params(m);
  if (m.dim != 3) throw Error(ErrorCode::ConfigError, "gridded experiments use D = 3");
  return m;
}

GridSpec grid_from(const Config& c, const std::string& n_key = "n", const std::string& l_key = "L",
                   int n_default = 0, double l_default = 0.0) {
  const int n = n_default > 0 ? c.get_int(n_key, n_default) : c.get_int(n_key);
  const double L = l_default > 0.0 ? c.get_double(l_key, l_default) : c.get_double(l_key);
  try {
    return GridSpec(n, L);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

SolverOptions solver_from(const Config& c, const GridSpec& grid, double default_width = 1.0) {
  SolverOptions o;
  o.tol = c.get_double("tol", 1e-9);
  o.max_iter = c.get_int("max_iter", 2000);
  o.seed = make_gaussian(grid, 1.0, c.get_double("seed_width", default_width));
  return o;
}

EvolveConfig evolve_from(const Config& c) {
  EvolveConfig e;
  e.dt = c.get_double("dt", 1e-3);
  e.t_end = c.get_double("t_end");
  e.blowup_factor = c.get_double("F", 10.0);
  e.sample_every = c.get_int("sample_every", 10);
  e.dt_min = c.get_double("dt_min", 1e-8);
  e.growth_threshold = c.get_double("growth_threshold", 0.2);
  const std::string mode = c.get_string("hartree_mode", "truncated");
  if (mode == "truncated") {
    e.hartree_mode = HartreeMode::Truncated;
  } else if (mode == "periodic") {
    e.hartree_mode = HartreeMode::Periodic;
  } else {
    throw Error(ErrorCode::ConfigError, "hartree_mode must be truncated or periodic");
  }
  const std::string check = c.get_string("support_check", "skip");
  if (check != "skip" && check != "enforce") throw Error(ErrorCode::ConfigError, "support_check must be skip or enforce");
  e.support_check = check == "enforce" ? SupportCheck::Enforce : SupportCheck::Skip;
  validate(e);
  return e;
}

std::filesystem::path out_dir(const Config& c) { return c.get_string("output_dir", "out"); }

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

GroundState ground_state(const ModelParams& params, const GridSpec& grid, const SpectralEngine& engine,
                         const Config& c) {
  return solve_ground_eq15(params, grid, engine, solver_from(c, grid));
}

void add_functionals(ExperimentReport& r, const std::string& prefix, const FunctionalReport& f) {
  r.add(prefix + "mass", f.mass);
  r.add(prefix + "kinetic", f.kinetic);
  r.add(prefix + "lp", f.lp);
  r.add(prefix + "hartree", f.hartree);
  r.add(prefix + "L", f.lagrange);
  r.add(prefix + "N", f.nehari);
  r.add(prefix + "V", f.vfunc);
}

/// Values along the x1 axis through the grid centre.
PlotSeries axis_profile(const Field& f, const std::string& name) {
  const GridSpec& g = f.grid;
  const int n = g.n();
  PlotSeries s{name, {}, {}, false};
  for (int i = 0; i < n; ++i) {
    s.x.push_back(g.coord(i));
    s.y.push_back(f.values[static_cast<Eigen::Index>(g.index(i, n / 2, n / 2))].real());
  }
  return s;
}

void write_trajectory(const std::filesystem::path& path, const TrajectoryRecord& rec, ExperimentReport& r) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_trajectory_csv(os, rec);
  r.files.push_back(path);
}

}  // namespace

ExperimentReport run_groundstate(const Config& c, int /*threads*/) {
  c.require_known(keys({&kModel, &kGrid, &kSolver, &kIo}, {"equation", "q", "m_fraction", "w_n", "w_L"}));
  ExperimentReport r;
  r.name = "groundstate";
  const GridSpec grid = grid_from(c);
  const SpectralEngine engine(grid);
  const std::string eq = c.get_string("equation", "EQ_1_5");
  const auto dir = out_dir(c);
  std::vector<GroundState> states;
  if (eq == "EQ_1_5") {
    const ModelParams params = model_from(c);
    states.push_back(ground_state(params, grid, engine, c));
    const FunctionalReport& f = states.back().functionals;
    const double poh = pohozaev_residual(f, params);
    r.add("d_N", f.lagrange);
    r.add("pohozaev_over_K", poh / f.bigK);
    if (!(std::abs(f.nehari) <= 1e-8 * f.bigK)) r.fail("|N| exceeds 1e-8 K");
    if (!(std::abs(poh) <= 1e-3 * f.bigK)) r.fail("Pohozaev residual exceeds 1e-3 K");
    if (!(f.lagrange > 0.0)) r.fail("d_N not positive");
  } else if (eq == "EQ_2_4") {
    states.push_back(solve_W(grid, engine, solver_from(c, grid)));
  } else if (eq == "EQ_2_2") {
    states.push_back(solve_R(grid, engine, c.get_double("q", 1.0), solver_from(c, grid)));
  } else if (eq == "MASS_CONSTRAINED") {
    const ModelParams params = model_from(c);
    const GridSpec wg = grid_from(c, "w_n", "w_L", 64, 10.0);
    const SpectralEngine we(wg);
    const GroundState w = solve_W(wg, we, solver_from(c, wg));
    const double m = c.get_double("m_fraction", 0.5) * w.functionals.kinetic;
    r.add("w_grad_norm_sq", w.functionals.kinetic);
    r.add("m", m);
    states.push_back(solve_mass_constrained(m, params, grid, engine, w.functionals.kinetic,
                                            solver_from(c, grid, grid.half_length() / 6.0)));
    r.add("d_m", states.back().functionals.energy);
    if (!(states.back().functionals.energy < 0.0)) r.fail("d_m not negative");
  } else {
    throw Error(ErrorCode::ConfigError, "equation must be EQ_1_5, EQ_2_2, EQ_2_4 or MASS_CONSTRAINED");
  }
  const GroundState& gs = states.back();
  r.add("equation_tag", to_string(gs.equation_tag));
  r.add("residual", gs.residual);
  r.add("iterations", gs.iterations);
  add_functionals(r, "", gs.functionals);

  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "groundstate.csv", std::ios::trunc);
    write_diagnostics_header(os);
    for (const auto& s : states) write_diagnostics_row(os, s);
    r.files.push_back(dir / "groundstate.csv");
  }
  save_field(gs.field, dir / "groundstate.hartf");
  r.files.push_back(dir / "groundstate.hartf");
  write_svg_plot(dir / "groundstate_profile.svg",
                 {"Ground state profile along x1", "x1", "u", {axis_profile(gs.field, to_string(gs.equation_tag))}, false, {}});
  r.files.push_back(dir / "groundstate_profile.svg");
  r.write_summary(dir);
  return r;
}

ExperimentReport run_evolve(const Config& c, int /*threads*/) {
  c.require_known(keys({&kModel, &kGrid, &kSolver, &kDynamics, &kIo},
                       {"initial", "amplitude", "width", "lambda", "field_path"}));
  ExperimentReport r;
  r.name = "evolve";
  const ModelParams params = model_from(c);
  const GridSpec grid = grid_from(c);
  const SpectralEngine engine(grid);
  const EvolveConfig ec = evolve_from(c);
  const std::string initial = c.get_string("initial", "gaussian");
  Field psi0(grid);
  if (initial == "gaussian") {
    psi0 = make_gaussian(grid, c.get_double("amplitude", 1.0), c.get_double("width", 1.0));
  } else if (initial == "groundstate") {
    const GroundState gs = ground_state(params, grid, engine, c);
    psi0 = Field(grid, gs.field.values * c.get_double("lambda", 1.0));
    r.add("d_N", gs.functionals.lagrange);
  } else if (initial == "file") {
    psi0 = load_field(c.get_string("field_path"));
    require_same_grid(psi0.grid, grid);
  } else {
    throw Error(ErrorCode::ConfigError, "initial must be gaussian, groundstate or file");
  }
  const TrajectoryRecord rec = evolve(psi0, params, ec, engine);
  const auto dir = out_dir(c);
  write_trajectory(dir / "trajectory.csv", rec, r);
  PlotSpec plot{"Trajectory monitors", "t", "value", {}, false, {}};
  PlotSeries kin{"grad_norm_sq", {}, {}, false}, gv{"G", {}, {}, false}, v8{"eightV", {}, {}, false};
  for (const auto& row : rec.rows) {
    kin.x.push_back(row.t), kin.y.push_back(row.grad_norm_sq);
    gv.x.push_back(row.t), gv.y.push_back(row.G);
    v8.x.push_back(row.t), v8.y.push_back(row.eightV);
  }
  plot.series = {kin, gv, v8};
  write_svg_plot(dir / "trajectory.svg", plot);
  r.files.push_back(dir / "trajectory.svg");
  r.add("outcome", outcome_label(rec));
  r.add("mass_drift", rec.mass_drift);
  r.add("energy_drift", rec.energy_drift);
  r.add("final_dt", rec.final_dt);
  r.write_summary(dir);
  return r;
}

ExperimentReport run_classify(const Config& c, int /*threads*/) {
  c.require_known(keys({&kModel, &kGrid, &kSolver, &kIo}, {"amplitudes", "width", "classify_tol", "lambda_min",
                                                           "lambda_max", "lambda_points"}));
  ExperimentReport r;
  r.name = "classify";
  const ModelParams params = model_from(c);
  const GridSpec grid = grid_from(c);
  const SpectralEngine engine(grid);
  const GroundState gs = ground_state(params, grid, engine, c);
  const double d_N = gs.functionals.lagrange;
  const double tol = c.get_double("classify_tol", 1e-9);
  r.add("d_N", d_N);
  const auto dir = out_dir(c);
  const EvalOptions eval{HartreeMode::Truncated, SupportCheck::Skip};

  // Gaussian amplitude ray: the regions met in order of increasing amplitude.
  const double width = c.get_double("width", 1.0);
  std::vector<double> amps = c.get_list("amplitudes", {0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0});
  std::sort(amps.begin(), amps.end());
  const Field unit = make_gaussian(grid, 1.0, width);
  const FunctionalReport base = report(unit, params, engine, eval);
  CsvTable table({"seed_id", "amplitude", "L", "N", "V", "region"});
  std::string sequence;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const FunctionalReport f = scaled_functionals(base, ScalingKind::Amplitude, amps[i], params);
    const Region region = classify(f, d_N, tol);
    table.row().cell("gauss_" + std::to_string(i)).cell(amps[i]).cell(f.lagrange).cell(f.nehari).cell(f.vfunc).cell(
        to_string(region));
    sequence += (i ? " " : "") + std::string(to_string(region));
  }
  table.write(dir / "classify.csv");
  r.files.push_back(dir / "classify.csv");
  r.add("gaussian_ray_regions", sequence);

  // Amplitude scan of the ground state.
  const double lo = c.get_double("lambda_min", 0.5), hi = c.get_double("lambda_max", 1.5);
  const int pts = std::max(2, c.get_int("lambda_points", 101));
  CsvTable scan({"lambda", "L", "N", "V", "region"});
  PlotSeries sl{"L", {}, {}, false}, sn{"N", {}, {}, false}, sv{"V", {}, {}, false};
  for (int i = 0; i < pts; ++i) {
    const double lam = lo + (hi - lo) * i / (pts - 1);
    const FunctionalReport f = scaled_functionals(gs.functionals, ScalingKind::Amplitude, lam, params);
    scan.row().cell(lam).cell(f.lagrange).cell(f.nehari).cell(f.vfunc).cell(to_string(classify(f, d_N, tol)));
    sl.x.push_back(lam), sl.y.push_back(f.lagrange);
    sn.x.push_back(lam), sn.y.push_back(f.nehari);
    sv.x.push_back(lam), sv.y.push_back(f.vfunc);
  }
  scan.write(dir / "lambda_scan.csv");
  r.files.push_back(dir / "lambda_scan.csv");
  write_svg_plot(dir / "lambda_scan.svg",
                 {"Functionals along lambda u", "lambda", "value", {sl, sn, sv}, false, {{d_N, "d_N"}, {0.0, "0"}}});
  r.files.push_back(dir / "lambda_scan.svg");
  r.write_summary(dir);
  return r;
}

ExperimentReport run_gn_verify(const Config& c, int threads) {
  c.require_known(keys({&kGrid, &kSolver, &kIo}, {"q", "probes"}));
  ExperimentReport r;
  r.name = "gn-verify";
  const GridSpec grid = grid_from(c);
  const SpectralEngine engine(grid);
  const double q = c.get_double("q", 1.0);
  const int probes = c.get_int("probes", 100);
  const std::uint64_t seed = c.get_u64("rng_seed", 1);
  const auto dir = out_dir(c);

  const GroundState R = solve_R(grid, engine, q, solver_from(c, grid));
  const GroundState W = solve_W(grid, engine, solver_from(c, grid));
  const GNConstants k = make_gn_constants(q, R.functionals.mass, W.functionals.kinetic);
  const EvalOptions eval{HartreeMode::Truncated, SupportCheck::Skip};
  const double ratio_r = gn_ratio_power(R.field, q, k, engine);
  const double ratio_w = gn_ratio_hartree(W.field, k, engine, eval);
  r.add("c_power", k.c_power);
  r.add("c_hartree", k.c_hartree);
  r.add("R_residual", R.residual);
  r.add("W_residual", W.residual);
  r.add("ratio_at_R", ratio_r);
  r.add("ratio_at_W", ratio_w);
  CsvTable ext({"extremizer", "residual", "ratio"});
  ext.row().cell("R").cell(R.residual).cell(ratio_r);
  ext.row().cell("W").cell(W.residual).cell(ratio_w);
  ext.write(dir / "gn_extremizers.csv");
  r.files.push_back(dir / "gn_extremizers.csv");
  if (std::abs(ratio_r - 1.0) > 1e-3) r.fail("power ratio at R outside [0.999, 1.001]: " + format_double(ratio_r));
  if (std::abs(ratio_w - 1.0) > 1e-3) r.fail("Hartree ratio at W outside [0.999, 1.001]: " + format_double(ratio_w));

  // Sums of one to three random Gaussians kept inside the box.
  std::vector<double> rp(static_cast<std::size_t>(probes)), rh(static_cast<std::size_t>(probes));
  const double L = grid.half_length();
  parallel_for(probes, threads, [&](int i) {
    std::seed_seq ss{seed, static_cast<std::uint64_t>(i)};
    std::mt19937_64 rng(ss);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int bumps = 1 + static_cast<int>(u01(rng) * 3.0) % 3;
    Field f(grid);
    for (int b = 0; b < bumps; ++b) {
      const double width = 0.6 + 0.12 * L * u01(rng);
      const double reach = std::max(0.0, 0.45 * L - 4.0 * width);
      const Vec3 x0{reach * (2 * u01(rng) - 1) / std::sqrt(3.0), reach * (2 * u01(rng) - 1) / std::sqrt(3.0),
                    reach * (2 * u01(rng) - 1) / std::sqrt(3.0)};
      f.values += make_gaussian(grid, 0.2 + 1.8 * u01(rng), width, x0).values;
    }
    rp[static_cast<std::size_t>(i)] = gn_ratio_power(f, q, k, engine);
    rh[static_cast<std::size_t>(i)] = gn_ratio_hartree(f, k, engine, eval);
  });
  CsvTable pt({"probe_id", "ratio_power", "ratio_hartree"});
  for (int i = 0; i < probes; ++i) pt.row().cell(i).cell(rp[static_cast<std::size_t>(i)]).cell(rh[static_cast<std::size_t>(i)]);
  pt.write(dir / "gn_probes.csv");
  r.files.push_back(dir / "gn_probes.csv");
  const double max_p = probes ? *std::max_element(rp.begin(), rp.end()) : 0.0;
  const double max_h = probes ? *std::max_element(rh.begin(), rh.end()) : 0.0;
  r.add("max_probe_ratio_power", max_p);
  r.add("max_probe_ratio_hartree", max_h);
  if (max_p > 1.0 + 1e-6) r.fail("probe exceeds the power GN bound: " + format_double(max_p));
  if (max_h > 1.0 + 1e-6) r.fail("probe exceeds the Hartree GN bound: " + format_double(max_h));
  write_svg_histogram(dir / "gn_power_ratios.svg", "Power GN ratio over probes", "ratio", rp, 20);
  write_svg_histogram(dir / "gn_hartree_ratios.svg", "Hartree GN ratio over probes", "ratio", rh, 20);
  r.files.push_back(dir / "gn_power_ratios.svg");
  r.files.push_back(dir / "gn_hartree_ratios.svg");
  r.write_summary(dir);
  return r;
}

ExperimentReport run_compare_dnm(const Config& c, int /*threads*/) {
  c.require_known(keys({&kModel, &kGrid, &kSolver, &kIo}, {"samples"}));
  ExperimentReport r;
  r.name = "compare-dnm";
  const ModelParams params = model_from(c);
  const GridSpec grid = grid_from(c);
  const SpectralEngine engine(grid);
  const GroundState gs = ground_state(params, grid, engine, c);
  const int samples = c.get_int("samples", 50);
  const VariationalEstimates est = sample_dM(params, grid, engine, gs, samples, c.get_u64("rng_seed", 1));
  const auto dir = out_dir(c);
  CsvTable t({"sample_id", "L"});
  PlotSeries pts{"L on M samples", {}, {}, true};
  for (std::size_t i = 0; i < est.d_M_samples.size(); ++i) {
    t.row().cell(static_cast<long long>(i)).cell(est.d_M_samples[i]);
    pts.x.push_back(static_cast<double>(i));
    pts.y.push_back(est.d_M_samples[i]);
  }
  t.write(dir / "dm_samples.csv");
  r.files.push_back(dir / "dm_samples.csv");
  write_svg_plot(dir / "dm_samples.svg", {"Lagrange functional on M samples", "sample", "L", {pts}, false,
                                          {{est.d_N, "d_N"}}});
  r.files.push_back(dir / "dm_samples.svg");
  r.add("d_N", est.d_N);
  r.add("d_M_min", est.d_M_min);
  r.add("samples_valid", static_cast<double>(est.d_M_samples.size()));
  r.add("samples_attempted", static_cast<double>(est.attempted));
  if (static_cast<int>(est.d_M_samples.size()) < samples) {
    r.fail("only " + std::to_string(est.d_M_samples.size()) + " valid samples");
  }
  if (est.d_M_min < est.d_N - 1e-3) r.fail("sample below d_N - 1e-3: " + format_double(est.d_M_min));
  r.write_summary(dir);
  return r;
}

DichotomyReport run_dichotomy(const Config& c, int threads) {
  c.require_known(keys({&kModel, &kGrid, &kSolver, &kDynamics, &kIo},
                       {"lambdas", "gaussian_amplitudes", "gaussian_width", "classify_tol", "bound_factor"}));
  DichotomyReport r;
  r.name = "dichotomy";
  const ModelParams params = model_from(c);
  require_supercritical_band(params);
  const GridSpec grid = grid_from(c);
  const SpectralEngine engine(grid);
  const EvolveConfig ec = evolve_from(c);
  const double tol = c.get_double("classify_tol", 1e-9);
  const double bound = c.get_double("bound_factor", 2.0);
  const GroundState gs = ground_state(params, grid, engine, c);
  r.d_N = gs.functionals.lagrange;
  r.add("d_N", r.d_N);
  r.add("ground_residual", gs.residual);

  std::vector<std::pair<std::string, Field>> seeds;
  for (double lam : c.get_list("lambdas", {0.5, 0.8, 0.9, 0.95, 1.02, 1.05, 1.1, 1.2})) {
    seeds.emplace_back("gs_lambda_" + fixed(lam), Field(grid, gs.field.values * lam));
  }
  const double width = c.get_double("gaussian_width", 1.0);
  for (double a : c.get_list("gaussian_amplitudes", {0.3, 0.6, 1.0, 1.5})) {
    seeds.emplace_back("gauss_a_" + fixed(a), make_gaussian(grid, a, width));
  }
  // Report order is by seed_id, independent of scheduling.
  std::stable_sort(seeds.begin(), seeds.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  for (std::size_t i = 1; i < seeds.size(); ++i) {
    if (seeds[i].first == seeds[i - 1].first) throw Error(ErrorCode::ConfigError, "duplicate seed " + seeds[i].first);
  }

  const EvalOptions eval{ec.hartree_mode, SupportCheck::Skip};
  r.rows.resize(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), threads, [&](int i) {
    DichotomyRow& row = r.rows[static_cast<std::size_t>(i)];
    const Field& psi0 = seeds[static_cast<std::size_t>(i)].second;
    row.seed_id = seeds[static_cast<std::size_t>(i)].first;
    row.functionals = report(psi0, params, engine, eval);
    row.region = classify(row.functionals, r.d_N, tol);
    const double kin0 = row.functionals.kinetic;
    row.trajectory = evolve(psi0, params, ec, engine, [&](const TrajectoryRow& tr, const Field&, const FunctionalReport& f) {
      row.max_grad_ratio = std::max(row.max_grad_ratio, std::sqrt(tr.grad_norm_sq / kin0));
      const Region now = classify(f, r.d_N, tol);
      if (now != Region::Boundary && now != row.region) row.region_constant = false;
    });
  });

  const auto dir = out_dir(c);
  CsvTable table({"seed_id", "L", "N", "V", "region", "outcome", "t_star"});
  CsvTable detail({"seed_id", "max_grad_ratio", "region_constant", "mass_drift", "energy_drift", "final_dt"});
  PlotSpec plot{"Kinetic growth per seed", "t", "||grad psi||^2 / ||grad psi_0||^2", {}, true, {}};
  int asserted = 0;
  for (DichotomyRow& row : r.rows) {
    const TrajectoryRecord& tr = row.trajectory;
    const bool blow = tr.outcome == Outcome::Blowup;
    table.row().cell(row.seed_id).cell(row.functionals.lagrange).cell(row.functionals.nehari)
        .cell(row.functionals.vfunc).cell(to_string(row.region)).cell(to_string(tr.outcome))
        .cell(blow ? format_double(tr.t_star) : std::string());
    detail.row().cell(row.seed_id).cell(row.max_grad_ratio).cell(row.region_constant ? "true" : "false")
        .cell(tr.mass_drift).cell(tr.energy_drift).cell(tr.final_dt);
    write_trajectory(dir / ("trajectory_" + row.seed_id + ".csv"), tr, r);
    PlotSeries s{row.seed_id + " " + to_string(row.region), {}, {}, false};
    for (const auto& tr_row : tr.rows) {
      s.x.push_back(tr_row.t);
      s.y.push_back(tr_row.grad_norm_sq / row.functionals.kinetic);
    }
    plot.series.push_back(std::move(s));

    if (row.region == Region::K) {
      row.asserted = true;
      row.concordant = blow && row.region_constant;
    } else if (row.region == Region::KPlus || row.region == Region::RPlus) {
      row.asserted = true;
      row.concordant = tr.outcome == Outcome::GlobalUntilT && row.max_grad_ratio <= bound && row.region_constant;
    }
    if (row.asserted) ++asserted;
    if (row.asserted && !row.concordant) {
      r.fail(row.seed_id + ": region " + to_string(row.region) + ", outcome " + outcome_label(tr) +
             ", max grad ratio " + fixed(row.max_grad_ratio) + (row.region_constant ? "" : ", region changed"));
    }
  }
  table.write(dir / "dichotomy.csv");
  detail.write(dir / "dichotomy_monitors.csv");
  write_svg_plot(dir / "dichotomy.svg", plot);
  r.files.push_back(dir / "dichotomy.csv");
  r.files.push_back(dir / "dichotomy_monitors.csv");
  r.files.push_back(dir / "dichotomy.svg");
  r.add("seeds", static_cast<double>(r.rows.size()));
  r.add("asserted_seeds", asserted);
  r.write_summary(dir);
  return r;
}

InstabilityReport run_instability(const Config& c, int threads) {
  c.require_known(keys({&kModel, &kGrid, &kSolver, &kDynamics, &kIo}, {"lambdas", "include_control"}));
  InstabilityReport r;
  r.name = "instability";
  const ModelParams params = model_from(c);
  require_supercritical_band(params);
  const GridSpec grid = grid_from(c);
  const SpectralEngine engine(grid);
  const EvolveConfig ec = evolve_from(c);
  const GroundState gs = ground_state(params, grid, engine, c);
  const double u_h1 = std::sqrt(h1_norm_sq(gs.field, engine));
  r.add("d_N", gs.functionals.lagrange);
  r.add("u_h1_norm", u_h1);

  std::vector<double> lambdas = c.get_list("lambdas", {1.2, 1.1, 1.05, 1.02});
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  if (c.get_bool("include_control", true)) lambdas.push_back(1.0);
  r.rows.resize(lambdas.size());
  parallel_for(static_cast<int>(lambdas.size()), threads, [&](int i) {
    InstabilityRow& row = r.rows[static_cast<std::size_t>(i)];
    row.lambda = lambdas[static_cast<std::size_t>(i)];
    const Field psi0(grid, gs.field.values * row.lambda);
    row.h1_distance = std::sqrt(h1_norm_sq(Field(grid, psi0.values - gs.field.values), engine));
    row.expected = std::abs(row.lambda - 1.0) * u_h1;
    row.trajectory = evolve(psi0, params, ec, engine);
  });

  const auto dir = out_dir(c);
  CsvTable table({"lambda", "h1_distance", "expected_distance", "outcome", "t_star"});
  PlotSpec plot{"Kinetic growth for lambda u", "t", "||grad psi||^2", {}, true, {}};
  double prev_distance = std::numeric_limits<double>::infinity();
  double prev_tstar = 0.0;
  bool tstar_monotone = true;
  for (const InstabilityRow& row : r.rows) {
    const TrajectoryRecord& tr = row.trajectory;
    const bool blow = tr.outcome == Outcome::Blowup;
    table.row().cell(row.lambda).cell(row.h1_distance).cell(row.expected).cell(to_string(tr.outcome))
        .cell(blow ? format_double(tr.t_star) : std::string());
    write_trajectory(dir / ("trajectory_lambda_" + fixed(row.lambda) + ".csv"), tr, r);
    PlotSeries s{"lambda " + fixed(row.lambda), {}, {}, false};
    for (const auto& tr_row : tr.rows) s.x.push_back(tr_row.t), s.y.push_back(tr_row.grad_norm_sq);
    plot.series.push_back(std::move(s));
    if (row.lambda == 1.0) {
      r.add("control_outcome", outcome_label(tr));
      continue;
    }
    if (row.lambda <= 1.0) continue;
    if (!blow) r.fail("lambda " + fixed(row.lambda) + ": outcome " + outcome_label(tr));
    if (std::abs(row.h1_distance - row.expected) > 1e-10 * row.expected) {
      r.fail("lambda " + fixed(row.lambda) + ": H1 distance " + format_double(row.h1_distance) + " vs " +
             format_double(row.expected));
    }
    if (!(row.h1_distance < prev_distance)) r.fail("H1 distances do not decrease toward lambda = 1");
    prev_distance = row.h1_distance;
    if (blow) {
      if (tr.t_star < prev_tstar) tstar_monotone = false;
      prev_tstar = tr.t_star;
    }
  }
  r.add("blowup_time_nonincreasing_in_lambda", tstar_monotone ? "true" : "false");
  table.write(dir / "instability.csv");
  write_svg_plot(dir / "instability.svg", plot);
  r.files.push_back(dir / "instability.csv");
  r.files.push_back(dir / "instability.svg");
  r.write_summary(dir);
  return r;
}

OrbitReport run_orbit_stability(const Config& c, int threads) {
  c.require_known(keys({&kModel, &kGrid, &kSolver, &kDynamics, &kIo},
                       {"m_fraction", "deltas", "epsilon_factor", "control_tol", "w_n", "w_L"}));
  OrbitReport r;
  r.name = "orbit-stability";
  const ModelParams params = model_from(c);
  const GridSpec grid = grid_from(c);
  const SpectralEngine engine(grid);
  const EvolveConfig ec = evolve_from(c);
  const bool stable_regime = params.p < params.mass_critical_p();

  const GridSpec wg = grid_from(c, "w_n", "w_L", 64, 10.0);
  const SpectralEngine we(wg);
  const GroundState w = solve_W(wg, we, solver_from(c, wg));
  r.w_grad_norm_sq = w.functionals.kinetic;
  r.add("w_grad_norm_sq", r.w_grad_norm_sq);

  GroundState u = [&] {
    if (stable_regime) {
      const double m = c.get_double("m_fraction", 0.5) * r.w_grad_norm_sq;
      return solve_mass_constrained(m, params, grid, engine, r.w_grad_norm_sq,
                                    solver_from(c, grid, grid.half_length() / 6.0));
    }
    return ground_state(params, grid, engine, c);
  }();
  r.mass = u.functionals.mass;
  r.add("regime", stable_regime ? "orbitally_stable" : "contrast");
  r.add("mass", r.mass);
  r.add("minimizer_energy", u.functionals.energy);
  r.add("minimizer_residual", u.residual);

  const Field g = smooth_perturbation(engine, c.get_u64("rng_seed", 1), std::sqrt(r.mass));
  const std::vector<double> deltas = c.get_list("deltas", {0.0, 1e-2, 3e-2});
  const double eps_factor = c.get_double("epsilon_factor", 10.0);
  const double control_tol = c.get_double("control_tol", 1e-6);
  r.rows.resize(deltas.size());
  parallel_for(static_cast<int>(deltas.size()), threads, [&](int i) {
    OrbitRow& row = r.rows[static_cast<std::size_t>(i)];
    row.delta = deltas[static_cast<std::size_t>(i)];
    row.threshold = row.delta > 0.0 ? eps_factor * row.delta : control_tol;
    Field psi0(grid, u.field.values + row.delta * g.values);
    psi0.values *= std::sqrt(r.mass / mass(psi0));
    const TrajectoryRecord tr =
        evolve(psi0, params, ec, engine, [&](const TrajectoryRow& tr_row, const Field& psi, const FunctionalReport&) {
          const double d = orbit_distance(psi, u.field, engine).distance_h1;
          row.t.push_back(tr_row.t);
          row.distance.push_back(d);
          row.sup_distance = std::max(row.sup_distance, d);
        });
    row.outcome = tr.outcome;
  });

  const auto dir = out_dir(c);
  CsvTable table({"delta", "t", "distance"});
  PlotSpec plot{"Orbit distance to the minimizer", "t", "H1 distance", {}, true, {}};
  for (const OrbitRow& row : r.rows) {
    for (std::size_t k = 0; k < row.t.size(); ++k) table.row().cell(row.delta).cell(row.t[k]).cell(row.distance[k]);
    plot.series.push_back({"delta " + fixed(row.delta), row.t, row.distance, false});
    r.add("sup_distance_delta_" + fixed(row.delta), row.sup_distance);
    if (!stable_regime) continue;
    if (!(row.sup_distance < row.threshold)) {
      r.fail("delta " + fixed(row.delta) + ": sup distance " + format_double(row.sup_distance) + " >= " +
             format_double(row.threshold));
    }
    if (row.outcome == Outcome::Blowup) r.fail("delta " + fixed(row.delta) + ": blow-up detected");
  }
  table.write(dir / "orbit.csv");
  write_svg_plot(dir / "orbit.svg", plot);
  r.files.push_back(dir / "orbit.csv");
  r.files.push_back(dir / "orbit.svg");
  r.write_summary(dir);
  return r;
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"groundstate", "evolve",      "classify",    "gn-verify",
                                                 "compare-dnm", "dichotomy",   "instability", "orbit-stability"};
  return names;
}

ExperimentReport run_subcommand(const std::string& name, const Config& config, int threads) {
  if (name == "groundstate") return run_groundstate(config, threads);
  if (name == "evolve") return run_evolve(config, threads);
  if (name == "classify") return run_classify(config, threads);
  if (name == "gn-verify") return run_gn_verify(config, threads);
  if (name == "compare-dnm") return run_compare_dnm(config, threads);
  if (name == "dichotomy") return run_dichotomy(config, threads);
  if (name == "instability") return run_instability(config, threads);
  if (name == "orbit-stability") return run_orbit_stability(config, threads);
  throw Error(ErrorCode::ConfigError, "unknown subcommand " + name);
}

}  // namespace hartree
