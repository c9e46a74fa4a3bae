#pragma once

#include "hartree/config.hpp"
#include "hartree/dynamics.hpp"
#include "hartree/functionals.hpp"
#include "hartree/groundstate.hpp"
#include "hartree/orbit.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hartree {

/// Outcome of one subcommand: pass/fail, failure list and a key/value summary.
struct ExperimentReport {
  std::string name;
  bool passed = true;
  std::vector<std::string> failures;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::filesystem::path> files;

  void add(const std::string& key, const std::string& value) { summary.emplace_back(key, value); }
  void add(const std::string& key, double value);
  void fail(const std::string& what) {
    passed = false;
    failures.push_back(what);
  }
  /// Writes `summary.csv` (key,value plus one `failure` row per failure) into `dir`.
  void write_summary(const std::filesystem::path& dir);
};

/// Seed perturbation: band-limited noise times a Gaussian envelope of width L/5, scaled to L2 norm `norm`.
Field smooth_perturbation(const SpectralEngine& engine, std::uint64_t seed, double norm);

/// Runs `body(i)` for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

struct DichotomyRow {
  std::string seed_id;
  FunctionalReport functionals;
  Region region = Region::Unclassified;
  TrajectoryRecord trajectory;
  double max_grad_ratio = 0.0;  ///< max_t ||grad psi(t)|| / ||grad psi(0)||
  bool region_constant = true;  ///< classification unchanged at every sample (BOUNDARY hits excluded)
  bool asserted = false;
  bool concordant = true;
};

struct DichotomyReport : ExperimentReport {
  double d_N = 0.0;
  std::vector<DichotomyRow> rows;
};

struct InstabilityRow {
  double lambda = 1.0;
  double h1_distance = 0.0;  ///< ||lambda u - u||_{H^1}
  double expected = 0.0;     ///< (lambda - 1) ||u||_{H^1}
  TrajectoryRecord trajectory;
};

struct InstabilityReport : ExperimentReport {
  std::vector<InstabilityRow> rows;
};

struct OrbitRow {
  double delta = 0.0;
  std::vector<double> t, distance;
  double sup_distance = 0.0;
  double threshold = 0.0;
  Outcome outcome = Outcome::Inconclusive;
};

struct OrbitReport : ExperimentReport {
  double w_grad_norm_sq = 0.0;
  double mass = 0.0;
  std::vector<OrbitRow> rows;
};

ExperimentReport run_groundstate(const Config& config, int threads = 1);
ExperimentReport run_evolve(const Config& config, int threads = 1);
ExperimentReport run_classify(const Config& config, int threads = 1);
ExperimentReport run_gn_verify(const Config& config, int threads = 1);
ExperimentReport run_compare_dnm(const Config& config, int threads = 1);
DichotomyReport run_dichotomy(const Config& config, int threads = 1);
InstabilityReport run_instability(const Config& config, int threads = 1);
OrbitReport run_orbit_stability(const Config& config, int threads = 1);

/// Names accepted by run_subcommand.
const std::vector<std::string>& subcommand_names();

/// Dispatches by CLI name; returns the base report.
ExperimentReport run_subcommand(const std::string& name, const Config& config, int threads = 1);

}  // namespace hartree
