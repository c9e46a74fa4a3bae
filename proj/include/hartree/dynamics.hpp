#pragma once

#include "hartree/core.hpp"
#include "hartree/functionals.hpp"
#include "hartree/spectral.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace hartree {

struct StepOptions {
  HartreeMode mode = HartreeMode::Truncated;
  bool linear_only = false;  ///< drop both nonlinear terms
};

/// One Strang step: half linear, full nonlinear phase rotation, half linear.
Field step_strang(const Field& field, double dt, const ModelParams& params, const SpectralEngine& engine,
                  StepOptions options = {});

struct VirialMonitors {
  double G = 0.0;        ///< \int |x|^2 |psi|^2
  double G_prime = 0.0;  ///< 4 Im \int x . conj(psi) grad psi
  double eightV = 0.0;   ///< 8 V[psi]
};

VirialMonitors virial_monitors(const Field& field, const ModelParams& params, const SpectralEngine& engine,
                               EvalOptions options = {});

struct EvolveConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  int sample_every = 10;
  double blowup_factor = 10.0;  ///< F: ||grad psi(t)|| >= F ||grad psi(0)||
  double dt_min = 1e-8;
  double growth_threshold = 0.2;  ///< relative growth of ||grad psi||^2 between samples that halves dt
  HartreeMode hartree_mode = HartreeMode::Truncated;
  SupportCheck support_check = SupportCheck::Enforce;  ///< applied to the initial data only
};

void validate(const EvolveConfig& config);

enum class Outcome { GlobalUntilT, Blowup, Inconclusive };

const char* to_string(Outcome outcome);

struct TrajectoryRow {
  double t, mass, energy, grad_norm_sq, G, G_prime, eightV;
};

struct TrajectoryRecord {
  std::vector<TrajectoryRow> rows;
  Outcome outcome = Outcome::Inconclusive;
  double t_star = 0.0;       ///< blow-up time for Blowup
  bool nonfinite = false;    ///< Blowup declared on a non-finite state
  double mass_drift = 0.0;   ///< max |M(t) - M(0)| / M(0)
  double energy_drift = 0.0; ///< max |E(t) - E(0)| / |E(0)|
  double final_dt = 0.0;
};

/// Called at every sample with the state and its functionals.
using SampleObserver = std::function<void(const TrajectoryRow&, const Field&, const FunctionalReport&)>;

TrajectoryRecord evolve(const Field& initial, const ModelParams& params, const EvolveConfig& config,
                        const SpectralEngine& engine, const SampleObserver& observer = {});

/// Header `t,mass,energy,grad_norm_sq,G,G_prime,eightV`, rows, then `# outcome=<label>`.
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& record);

/// BLOWUP(t*) or the plain label.
std::string outcome_label(const TrajectoryRecord& record);

}  // namespace hartree
