#include "hartree/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace hartree {

const char* to_string(EquationTag tag) {
  switch (tag) {
    case EquationTag::Eq15: return "EQ_1_5";
    case EquationTag::Eq22: return "EQ_2_2";
    case EquationTag::Eq24: return "EQ_2_4";
    case EquationTag::MassConstrained: return "MASS_CONSTRAINED";
  }
  return "UNKNOWN";
}

namespace {

constexpr double kTiny = 1e-300;
constexpr double kMinStep = 1e-8;

/// a(-Delta) u + b u - c_h V_H u - c_p |u|^{s-1} u = 0, the Euler-Lagrange equation of
/// J = (a kin + b mass)/2 - c_h hartree/4 - c_p lp_s/(s+1).
struct FlowSpec {
  double a, b, c_h, c_p, s;
};

struct FlowState {
  Field u;
  Eigen::ArrayXcd coeff;  // DFT of u
  Eigen::ArrayXd vh;
  double kin = 0.0, mass = 0.0, hart = 0.0, lps = 0.0;
};

double norm_sq_from_dft(const Eigen::ArrayXcd& coeff, const Eigen::ArrayXd& weight, const GridSpec& g) {
  return (coeff.abs2() * weight.square()).sum() * g.cell_volume() / static_cast<double>(g.size());
}

FlowState evaluate(Field u, const FlowSpec& f, const SpectralEngine& engine) {
  const GridSpec& g = u.grid;
  const double h3 = g.cell_volume();
  FlowState st{std::move(u), {}, {}};
  st.coeff = engine.dft(st.u.values);
  st.kin = -(st.coeff.abs2() * engine.laplacian_symbol()).sum() * h3 / static_cast<double>(g.size());
  const Eigen::ArrayXd rho = st.u.values.abs2();
  st.mass = rho.sum() * h3;
  if (f.c_h != 0.0) {
    st.vh = engine.convolve_riesz(rho, HartreeMode::Truncated);
    st.hart = (st.vh * rho).sum() * h3;
  } else {
    st.vh = Eigen::ArrayXd::Zero(rho.size());
  }
  st.lps = f.c_p != 0.0 ? rho.pow(0.5 * (f.s + 1.0)).sum() * h3 : 0.0;
  return st;
}

double objective(const FlowState& st, const FlowSpec& f) {
  return 0.5 * (f.a * st.kin + f.b * st.mass) - 0.25 * f.c_h * st.hart - f.c_p * st.lps / (f.s + 1.0);
}

/// Rescales onto a kin + b mass = c_h hartree + c_p lp_s.
void project_nehari(FlowState& st, const FlowSpec& f) {
  const double quad = f.a * st.kin + f.b * st.mass;
  const double hh = f.c_h * st.hart;
  const double pp = f.c_p * st.lps;
  if (!(hh + pp > kTiny) || !(quad > kTiny)) throw Error(ErrorCode::Collapse, "field norm underflow");
  double lambda;
  if (pp == 0.0) {
    lambda = std::sqrt(quad / hh);
  } else if (hh == 0.0) {
    lambda = std::pow(quad / pp, 1.0 / (f.s - 1.0));
  } else {
    lambda = nehari_root(quad, pp, hh, f.s);
  }
  if (!std::isfinite(lambda) || !(lambda > 0.0)) throw Error(ErrorCode::Collapse, "Nehari rescale undefined");
  const double l2 = lambda * lambda;
  st.u.values *= lambda;
  st.coeff *= lambda;
  st.vh *= l2;
  st.kin *= l2;
  st.mass *= l2;
  st.hart *= l2 * l2;
  st.lps *= std::pow(lambda, f.s + 1.0);
}

Eigen::ArrayXd linear_symbol(const FlowSpec& f, const SpectralEngine& engine) {
  return -f.a * engine.laplacian_symbol() + f.b;
}

/// Equation residual F(u) in real space.
Eigen::ArrayXcd residual_field(const FlowState& st, const FlowSpec& f, const Eigen::ArrayXd& symbol,
                               const SpectralEngine& engine) {
  Eigen::ArrayXcd out = engine.idft(st.coeff * symbol);
  if (f.c_h != 0.0) out -= f.c_h * st.vh * st.u.values;
  if (f.c_p != 0.0) out -= f.c_p * st.u.values.abs2().pow(0.5 * (f.s - 1.0)) * st.u.values;
  return out;
}

double relative_residual(const Eigen::ArrayXcd& res, const FlowState& st, const Eigen::ArrayXd& symbol) {
  const GridSpec& g = st.u.grid;
  const double denom = norm_sq_from_dft(st.coeff, symbol, g);
  const double num = res.abs2().sum() * g.cell_volume();
  return denom > 0.0 ? std::sqrt(num / denom) : std::numeric_limits<double>::infinity();
}

Field real_part(Field f) {
  f.values = f.values.real().cast<Complex>();
  return f;
}

struct FlowResult {
  FlowState state;
  double residual;
  int iterations;
  std::vector<double> history;
};

/// Preconditioned gradient flow with Nehari projection after each step; the step halves
/// whenever the projected objective would increase.
FlowResult projected_flow(Field seed, const FlowSpec& f, const SpectralEngine& engine, const SolverOptions& opt) {
  require_same_grid(seed.grid, engine.grid());
  if (!seed.all_finite()) throw Error(ErrorCode::NonfiniteState, "seed has non-finite samples");
  const Eigen::ArrayXd symbol = linear_symbol(f, engine);
  FlowState st = evaluate(real_part(std::move(seed)), f, engine);
  project_nehari(st, f);
  double j = objective(st, f);
  std::vector<double> history{j};
  double tau = opt.step;
  for (int it = 0;; ++it) {
    const Eigen::ArrayXcd res = residual_field(st, f, symbol, engine);
    const double rel = relative_residual(res, st, symbol);
    if (rel <= opt.tol) return {std::move(st), rel, it, std::move(history)};
    if (it >= opt.max_iter) {
      throw Error(ErrorCode::NoConvergence,
                  "residual " + std::to_string(rel) + " after " + std::to_string(it) + " iterations");
    }
    const Eigen::ArrayXcd dir = engine.idft(engine.dft(res) / symbol).real().cast<Complex>();
    for (;;) {
      FlowState trial = evaluate(Field(st.u.grid, st.u.values - tau * dir), f, engine);
      project_nehari(trial, f);
      const double jt = objective(trial, f);
      if (jt <= j + 1e-12 * std::abs(j)) {
        st = std::move(trial);
        j = jt;
        history.push_back(j);
        tau = std::min(opt.step, 1.5 * tau);
        break;
      }
      tau *= 0.5;
      if (tau < kMinStep) {
        throw Error(ErrorCode::NoConvergence, "step size collapsed at residual " + std::to_string(rel));
      }
    }
  }
}

Field default_seed(const GridSpec& grid, const SolverOptions& opt) {
  if (opt.seed) return *opt.seed;
  return make_gaussian(grid, 1.0, 1.0);
}

GroundState finish(FlowResult r, EquationTag tag, const ModelParams& report_params, const SpectralEngine& engine) {
  const FunctionalReport rep =
      report(r.state.u, report_params, engine, {HartreeMode::Truncated, SupportCheck::Skip});
  GroundState gs{std::move(r.state.u), r.residual, rep, r.iterations, tag, std::move(r.history)};
  return gs;
}

}  // namespace

GroundState solve_W(const GridSpec& grid, const SpectralEngine& engine, const SolverOptions& options) {
  const FlowSpec f{1.0, 1.0, 1.0, 0.0, 3.0};
  return finish(projected_flow(default_seed(grid, options), f, engine, options), EquationTag::Eq24,
                ModelParams{3, 3.0, 1.0}, engine);
}

GroundState solve_R(const GridSpec& grid, const SpectralEngine& engine, double q, const SolverOptions& options) {
  constexpr double d = 3.0;
  if (!(q > 0.0 && q < 2.0 / (d - 2.0))) throw Error(ErrorCode::QOutOfRange, "q must lie in (0, 2/(D-2))");
  const FlowSpec f{0.5 * q * d, 1.0 + 0.5 * q * (2.0 - d), 0.0, 1.0, 2.0 * q + 1.0};
  return finish(projected_flow(default_seed(grid, options), f, engine, options), EquationTag::Eq22,
                ModelParams{3, 2.0 * q + 1.0, 1.0}, engine);
}

GroundState solve_ground_eq15(const ModelParams& params, const GridSpec& grid, const SpectralEngine& engine,
                              const SolverOptions& options) {
  require_supercritical_band(params);
  if (params.dim != 3) throw Error(ErrorCode::DimensionTooSmall, "gridded solvers require D = 3");
  if (!(params.omega > 0.0)) throw Error(ErrorCode::ConfigError, "omega must be positive");
  const FlowSpec f{1.0, params.omega, 1.0, 1.0, params.p};
  return finish(projected_flow(default_seed(grid, options), f, engine, options), EquationTag::Eq15, params, engine);
}

double estimate_dN(const ModelParams& params, const GridSpec& grid, const SpectralEngine& engine,
                   const std::vector<SeedSpec>& seeds, const SolverOptions& options, std::vector<GroundState>* runs) {
  if (seeds.empty()) throw Error(ErrorCode::AllSeedsFailed, "no seeds given");
  double best = std::numeric_limits<double>::infinity();
  std::string failures;
  for (const SeedSpec& s : seeds) {
    SolverOptions opt = options;
    opt.seed = make_gaussian(grid, s.amplitude, s.width);
    try {
      GroundState gs = solve_ground_eq15(params, grid, engine, opt);
      best = std::min(best, gs.functionals.lagrange);
      if (runs != nullptr) runs->push_back(std::move(gs));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::Collapse) throw;
      failures += std::string(" ") + e.what();
    }
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::AllSeedsFailed, failures);
  return best;
}

VariationalEstimates sample_dM(const ModelParams& params, const GridSpec& grid, const SpectralEngine& engine,
                               const GroundState& ground, int n_samples, std::uint64_t rng_seed) {
  require_supercritical_band(params);
  require_same_grid(grid, ground.field.grid);
  const EvalOptions eval{HartreeMode::Truncated, SupportCheck::Skip};
  const bool critical = std::abs(params.p - params.mass_critical_p()) <= 1e-12;
  std::mt19937_64 rng(rng_seed);
  // After the V = 0 dilation, N < 0 holds near the ground state only for amplitudes below 1.
  std::uniform_real_distribution<double> amp(0.5, 0.99);
  std::uniform_real_distribution<double> size(0.0, 0.3);

  const double u_norm = std::sqrt(ground.functionals.mass);
  const double s = 0.2 * grid.half_length();
  const Field envelope = make_gaussian(grid, 1.0, s);

  VariationalEstimates est;
  est.d_N = ground.functionals.lagrange;
  est.d_M_min = std::numeric_limits<double>::infinity();
  const int max_attempts = 4 * n_samples;
  while (static_cast<int>(est.d_M_samples.size()) < n_samples && est.attempted < max_attempts) {
    ++est.attempted;
    const double a = amp(rng);
    const double delta = size(rng);
    Field g = band_limited_noise(engine, rng());
    g.values *= envelope.values;
    g.values *= u_norm / std::sqrt(mass(g));
    const Field cand(grid, a * (ground.field.values + delta * g.values));
    const FunctionalReport base = report(cand, params, engine, eval);
    FunctionalReport on_m;
    if (critical) {
      if (!(std::abs(base.vfunc) <= 1e-6 * base.bigK)) continue;
      on_m = base;
    } else {
      const auto lambda = v_zero_lambda(base, params);
      if (!lambda) continue;
      on_m = scaled_functionals(base, ScalingKind::MassDilation, *lambda, params);
    }
    if (!(on_m.nehari < 0.0)) continue;
    est.d_M_samples.push_back(on_m.lagrange);
    est.d_M_min = std::min(est.d_M_min, on_m.lagrange);
  }
  if (est.d_M_samples.empty()) throw Error(ErrorCode::NoValidSamples, "no candidate reached {N < 0, V = 0}");
  return est;
}

GroundState solve_mass_constrained(double m, const ModelParams& params, const GridSpec& grid,
                                   const SpectralEngine& engine, double w_grad_norm_sq,
                                   const SolverOptions& options) {
  require_subcritical_band(params);
  if (!(m > 0.0) || !(m < w_grad_norm_sq)) {
    throw Error(ErrorCode::MassOutOfRange, "need 0 < m < ||grad W||^2 = " + std::to_string(w_grad_norm_sq));
  }
  const GridSpec& g = grid;
  const double h3 = g.cell_volume();
  const double p = params.p;
  const Eigen::ArrayXd& lap = engine.laplacian_symbol();

  struct State {
    Eigen::ArrayXcd u, coeff;
    Eigen::ArrayXd vh;
    double energy = 0.0;
  };
  const auto eval = [&](Eigen::ArrayXcd u) {
    u = u.real().cast<Complex>();
    u *= std::sqrt(m / (u.abs2().sum() * h3));
    State st;
    st.coeff = engine.dft(u);
    const Eigen::ArrayXd rho = u.abs2();
    st.vh = engine.convolve_riesz(rho, HartreeMode::Truncated);
    const double kin = -(st.coeff.abs2() * lap).sum() * h3 / static_cast<double>(g.size());
    st.energy = 0.5 * kin - 0.25 * (st.vh * rho).sum() * h3 - rho.pow(0.5 * (p + 1.0)).sum() * h3 / (p + 1.0);
    st.u = std::move(u);
    return st;
  };

  Field seed = options.seed ? *options.seed : make_gaussian(g, 1.0, g.half_length() / 6.0);
  require_same_grid(seed.grid, g);
  State st = eval(seed.values);
  std::vector<double> history{st.energy};
  double tau = options.step;
  double rel = std::numeric_limits<double>::infinity();
  int it = 0;
  for (;; ++it) {
    // Constrained gradient r = E'(u) - mu u with mu the multiplier that makes r tangent.
    const Eigen::ArrayXcd lap_u = engine.idft(st.coeff * (-lap));
    const Eigen::ArrayXcd grad = lap_u - st.vh * st.u - st.u.abs2().pow(0.5 * (p - 1.0)) * st.u;
    const double mu = (grad * st.u.conjugate()).real().sum() / st.u.abs2().sum();
    const Eigen::ArrayXcd r = grad - mu * st.u;
    const double scale = std::sqrt(lap_u.abs2().sum()) + std::abs(mu) * std::sqrt(st.u.abs2().sum());
    rel = std::sqrt(r.abs2().sum()) / scale;
    if (rel <= options.tol) break;
    if (it >= options.max_iter) {
      throw Error(ErrorCode::NoConvergence,
                  "residual " + std::to_string(rel) + " after " + std::to_string(it) + " iterations");
    }
    const double shift = std::max(-mu, 1e-3);
    Eigen::ArrayXcd dir = engine.idft(engine.dft(r) / (-lap + shift)).real().cast<Complex>();
    dir -= ((dir * st.u.conjugate()).real().sum() / st.u.abs2().sum()) * st.u;
    for (;;) {
      State trial = eval(st.u - tau * dir);
      if (trial.energy <= st.energy + 1e-12 * std::abs(st.energy)) {
        st = std::move(trial);
        history.push_back(st.energy);
        tau = std::min(options.step, 1.5 * tau);
        break;
      }
      tau *= 0.5;
      if (tau < kMinStep) {
        throw Error(ErrorCode::NoConvergence, "step size collapsed at residual " + std::to_string(rel));
      }
    }
  }
  Field out(g, std::move(st.u));
  const FunctionalReport rep = report(out, params, engine, {HartreeMode::Truncated, SupportCheck::Skip});
  return GroundState{std::move(out), rel, rep, it, EquationTag::MassConstrained, std::move(history)};
}

void write_diagnostics_header(std::ostream& os) {
  os << "equation_tag,residual,mass,kinetic,lp,hartree,L,N,V,iterations\n";
}

void write_diagnostics_row(std::ostream& os, const GroundState& s) {
  const FunctionalReport& r = s.functionals;
  const auto old = os.precision(17);
  os << to_string(s.equation_tag) << ',' << s.residual << ',' << r.mass << ',' << r.kinetic << ',' << r.lp << ','
     << r.hartree << ',' << r.lagrange << ',' << r.nehari << ',' << r.vfunc << ',' << s.iterations << '\n';
  os.precision(old);
}

}  // namespace hartree
