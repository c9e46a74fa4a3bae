#include "hartree/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitConcordance = 2;
constexpr int kExitSolver = 3;
constexpr int kExitConfig = 4;

int exit_code_for(hartree::ErrorCode code) {
  using hartree::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::DimensionTooSmall:
    case ErrorCode::ExponentOutOfRange:
    case ErrorCode::InvalidGrid:
    case ErrorCode::QOutOfRange:
    case ErrorCode::MassOutOfRange:
    case ErrorCode::NegativeArgument:
    case ErrorCode::NonpositiveLambda:
    case ErrorCode::GridTooLarge:
    case ErrorCode::GridMismatch:
    case ErrorCode::BadMagic:
    case ErrorCode::TruncatedPayload:
    case ErrorCode::IoFailure:
      return kExitConfig;
    case ErrorCode::ConcordanceFailure:
    case ErrorCode::StabilityFailure:
      return kExitConcordance;
    default:
      return kExitSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for the focusing NLS with inverse-square Hartree term"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  for (const auto& name : hartree::subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key = value configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "RNG seed (overrides rng_seed)");
    sub->add_option("--threads", threads, "parallel workers for sweeps")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitConfig;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    hartree::Config config = hartree::Config::load(config_path);
    if (!out_dir.empty()) config.set("output_dir", out_dir);
    if (app.get_subcommands().front()->count("--seed")) config.set("rng_seed", std::to_string(seed));
    const hartree::ExperimentReport report = hartree::run_subcommand(name, config, threads);
    for (const auto& [k, v] : report.summary) std::cout << k << " = " << v << '\n';
    if (!report.passed) {
      for (const auto& f : report.failures) std::cerr << "FAILURE: " << f << '\n';
      return kExitConcordance;
    }
    return kExitPass;
  } catch (const hartree::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}
