#include "hartree/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace hartree {

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::GlobalUntilT: return "GLOBAL_UNTIL_T";
    case Outcome::Blowup: return "BLOWUP";
    case Outcome::Inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

namespace {

Eigen::ArrayXcd linear_propagator(const SpectralEngine& engine, double dt) {
  const Eigen::ArrayXd phase = engine.laplacian_symbol() * dt;  // -|k|^2 dt
  Eigen::ArrayXcd out(phase.size());
  for (Eigen::Index i = 0; i < phase.size(); ++i) out[i] = std::polar(1.0, phase[i]);
  return out;
}

// psi <- psi exp(i dt (V_H + |psi|^{p-1})); |psi| is invariant, so the rotation is exact.
void nonlinear_substep(Eigen::ArrayXcd& psi, double dt, const ModelParams& params, const SpectralEngine& engine,
                       HartreeMode mode) {
  const Eigen::ArrayXd rho = psi.abs2();
  const double half_power = 0.5 * (params.p - 1.0);
  Eigen::ArrayXd pot = engine.convolve_riesz(rho, mode);
  if (half_power == 1.0) {
    pot += rho;
  } else if (half_power == 0.5) {
    pot += rho.sqrt();
  } else {
    pot += rho.pow(half_power);
  }
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, dt * pot[i]);
}

struct Coordinates {
  Eigen::ArrayXd x[3];
  Eigen::ArrayXd r2;
};

Coordinates coordinates(const GridSpec& g) {
  const int n = g.n();
  Coordinates c;
  for (auto& a : c.x) a.resize(static_cast<Eigen::Index>(g.size()));
  c.r2.resize(static_cast<Eigen::Index>(g.size()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const auto idx = static_cast<Eigen::Index>(g.index(i, j, k));
        c.x[0][idx] = g.coord(i);
        c.x[1][idx] = g.coord(j);
        c.x[2][idx] = g.coord(k);
        c.r2[idx] = g.coord(i) * g.coord(i) + g.coord(j) * g.coord(j) + g.coord(k) * g.coord(k);
      }
  return c;
}

VirialMonitors monitors_from(const Field& field, const FunctionalReport& rep, const Coordinates& xs,
                             const SpectralEngine& engine) {
  const double h3 = field.grid.cell_volume();
  VirialMonitors m;
  m.G = (xs.r2 * field.values.abs2()).sum() * h3;
  const std::array<Field, 3> grad = gradient(field, engine);
  double acc = 0.0;
  for (int a = 0; a < 3; ++a) acc += (xs.x[a] * (field.values.conjugate() * grad[a].values).imag()).sum();
  m.G_prime = 4.0 * acc * h3;
  m.eightV = 8.0 * rep.vfunc;
  return m;
}

}  // namespace

Field step_strang(const Field& field, double dt, const ModelParams& params, const SpectralEngine& engine,
                  StepOptions options) {
  require_same_grid(field.grid, engine.grid());
  const Eigen::ArrayXcd half = linear_propagator(engine, 0.5 * dt);
  Eigen::ArrayXcd psi = engine.idft(engine.dft(field.values) * half);
  if (!options.linear_only) nonlinear_substep(psi, dt, params, engine, options.mode);
  Field out(field.grid, engine.idft(engine.dft(psi) * half));
  if (!out.all_finite()) throw Error(ErrorCode::NonfiniteState, "non-finite state after Strang step");
  return out;
}

VirialMonitors virial_monitors(const Field& field, const ModelParams& params, const SpectralEngine& engine,
                               EvalOptions options) {
  require_same_grid(field.grid, engine.grid());
  if (options.check == SupportCheck::Enforce) require_support_margin(field);
  const FunctionalReport rep = report(field, params, engine, {options.mode, SupportCheck::Skip});
  return monitors_from(field, rep, coordinates(field.grid), engine);
}

void validate(const EvolveConfig& c) {
  if (!(c.dt_min > 0.0) || !(c.dt > c.dt_min)) throw Error(ErrorCode::ConfigError, "need dt > dt_min > 0");
  if (!(c.t_end > 0.0)) throw Error(ErrorCode::ConfigError, "need t_end > 0");
  if (!(c.blowup_factor > 1.0)) throw Error(ErrorCode::ConfigError, "need blowup_factor > 1");
  if (c.sample_every < 1) throw Error(ErrorCode::ConfigError, "need sample_every >= 1");
  if (!(c.growth_threshold > 0.0)) throw Error(ErrorCode::ConfigError, "need growth_threshold > 0");
}

TrajectoryRecord evolve(const Field& initial, const ModelParams& params, const EvolveConfig& config,
                        const SpectralEngine& engine, const SampleObserver& observer) {
  validate(config);
  require_same_grid(initial.grid, engine.grid());
  if (!initial.all_finite()) throw Error(ErrorCode::NonfiniteState, "initial data has non-finite samples");
  if (config.hartree_mode == HartreeMode::Truncated && config.support_check == SupportCheck::Enforce) {
    require_support_margin(initial);
  }
  const EvalOptions eval{config.hartree_mode, SupportCheck::Skip};
  const Coordinates xs = coordinates(initial.grid);

  TrajectoryRecord rec;
  const auto sample = [&](double t, const Field& psi) {
    const FunctionalReport rep = report(psi, params, engine, eval);
    const VirialMonitors vm = monitors_from(psi, rep, xs, engine);
    const TrajectoryRow row{t, rep.mass, rep.energy, rep.kinetic, vm.G, vm.G_prime, vm.eightV};
    rec.rows.push_back(row);
    if (observer) observer(row, psi, rep);
  };

  Field psi = initial;
  double t = 0.0;
  double dt = config.dt;
  sample(t, psi);
  const double kin0 = rec.rows.front().grad_norm_sq;
  const double tol_t = 1e-9 * config.dt;

  while (t < config.t_end - tol_t) {
    // A block of Strang steps with adjacent linear half steps fused.
    int steps = 0;
    double block_t = t;
    while (steps < config.sample_every && block_t < config.t_end - tol_t) {
      ++steps;
      block_t += dt;
    }
    const double last_dt = dt - std::max(0.0, block_t - config.t_end);
    const Eigen::ArrayXcd half = linear_propagator(engine, 0.5 * dt);
    const Eigen::ArrayXcd full = linear_propagator(engine, dt);
    Eigen::ArrayXcd c = engine.dft(psi.values) * half;
    for (int s = 0; s < steps; ++s) {
      const bool last = s + 1 == steps;
      const double h = last ? last_dt : dt;
      if (last && h != dt) c *= linear_propagator(engine, 0.5 * (h - dt));
      Eigen::ArrayXcd v = engine.idft(c);
      nonlinear_substep(v, h, params, engine, config.hartree_mode);
      c = engine.dft(v);
      c *= last ? linear_propagator(engine, 0.5 * h) : full;
    }
    t = std::min(block_t, config.t_end);
    psi.values = engine.idft(c);
    if (!psi.all_finite()) {
      rec.outcome = Outcome::Blowup;
      rec.nonfinite = true;
      rec.t_star = rec.rows.back().t;
      break;
    }
    const double kin_prev = rec.rows.back().grad_norm_sq;
    sample(t, psi);
    const TrajectoryRow& row = rec.rows.back();

    const std::size_t k = rec.rows.size();
    const bool concave = k >= 3 && rec.rows[k - 1].eightV < 0.0 && rec.rows[k - 2].eightV < 0.0 &&
                         rec.rows[k - 3].eightV < 0.0;
    if (std::sqrt(row.grad_norm_sq) >= config.blowup_factor * std::sqrt(kin0) && concave) {
      rec.outcome = Outcome::Blowup;
      rec.t_star = t;
      break;
    }
    if (row.grad_norm_sq > (1.0 + config.growth_threshold) * kin_prev) {
      dt *= 0.5;
      if (dt < config.dt_min) {
        rec.outcome = Outcome::Blowup;
        rec.t_star = t;
        break;
      }
    }
  }
  if (rec.outcome != Outcome::Blowup) rec.outcome = dt < config.dt ? Outcome::Inconclusive : Outcome::GlobalUntilT;
  rec.final_dt = dt;

  const double m0 = rec.rows.front().mass;
  const double e0 = std::abs(rec.rows.front().energy);
  for (const TrajectoryRow& r : rec.rows) {
    if (m0 > 0.0) rec.mass_drift = std::max(rec.mass_drift, std::abs(r.mass - m0) / m0);
    if (e0 > 0.0) rec.energy_drift = std::max(rec.energy_drift, std::abs(r.energy - rec.rows.front().energy) / e0);
  }
  return rec;
}

std::string outcome_label(const TrajectoryRecord& record) {
  if (record.outcome != Outcome::Blowup) return to_string(record.outcome);
  std::ostringstream os;
  os.precision(10);
  os << "BLOWUP(" << record.t_star << ")";
  return os.str();
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& record) {
  const auto old = os.precision(17);
  os << "t,mass,energy,grad_norm_sq,G,G_prime,eightV\n";
  for (const TrajectoryRow& r : record.rows) {
    os << r.t << ',' << r.mass << ',' << r.energy << ',' << r.grad_norm_sq << ',' << r.G << ',' << r.G_prime << ','
       << r.eightV << '\n';
  }
  os << "# outcome=" << outcome_label(record) << '\n';
  os.precision(old);
}

}  // namespace hartree
