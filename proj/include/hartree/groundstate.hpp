#pragma once

#include "hartree/core.hpp"
#include "hartree/functionals.hpp"
#include "hartree/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hartree {

enum class EquationTag { Eq15, Eq22, Eq24, MassConstrained };

const char* to_string(EquationTag tag);

struct GroundState {
  Field field;
  double residual = 0.0;  ///< ||F(u)||_2 / ||A u||_2 for the equation's linear part A
  FunctionalReport functionals;
  int iterations = 0;
  EquationTag equation_tag = EquationTag::Eq15;
  /// Objective after every accepted step (projected; non-increasing).
  std::vector<double> objective_history;
};

struct SolverOptions {
  double tol = 1e-9;
  int max_iter = 2000;
  double step = 1.0;  ///< initial preconditioned step; halved on objective increase
  /// Seed; a unit Gaussian of width 1 when absent.
  std::optional<Field> seed;
};

/// -Delta W + W - (|x|^{-2} * W^2) W = 0.
GroundState solve_W(const GridSpec& grid, const SpectralEngine& engine, const SolverOptions& options = {});

/// (qD/2) Delta R - (1 + q(2-D)/2) R + R^{2q+1} = 0, D = 3.
GroundState solve_R(const GridSpec& grid, const SpectralEngine& engine, double q, const SolverOptions& options = {});

/// -omega u + Delta u + V_H u + |u|^{p-1} u = 0 on the Nehari manifold; L[u] estimates d_N.
GroundState solve_ground_eq15(const ModelParams& params, const GridSpec& grid, const SpectralEngine& engine,
                              const SolverOptions& options = {});

/// Gaussian seed description for multi-start runs.
struct SeedSpec {
  double amplitude = 1.0;
  double width = 1.0;
};

/// Minimum of L over converged runs from each seed.
double estimate_dN(const ModelParams& params, const GridSpec& grid, const SpectralEngine& engine,
                   const std::vector<SeedSpec>& seeds, const SolverOptions& options = {},
                   std::vector<GroundState>* runs = nullptr);

struct VariationalEstimates {
  double d_N = 0.0;
  std::vector<double> d_M_samples;
  double d_M_min = 0.0;
  std::optional<double> d_m;
  int attempted = 0;
};

/// L over random elements of {N < 0, V = 0} built from the ground state.
VariationalEstimates sample_dM(const ModelParams& params, const GridSpec& grid, const SpectralEngine& engine,
                               const GroundState& ground, int n_samples, std::uint64_t rng_seed);

/// inf E at fixed mass m (1 < p < 1 + 4/D, 0 < m < ||grad W||^2).
GroundState solve_mass_constrained(double m, const ModelParams& params, const GridSpec& grid,
                                   const SpectralEngine& engine, double w_grad_norm_sq,
                                   const SolverOptions& options = {});

/// Header `equation_tag,residual,mass,kinetic,lp,hartree,L,N,V,iterations`.
void write_diagnostics_header(std::ostream& os);
void write_diagnostics_row(std::ostream& os, const GroundState& state);

}  // namespace hartree
