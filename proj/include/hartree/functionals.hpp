#pragma once

#include "hartree/core.hpp"
#include "hartree/spectral.hpp"

#include <optional>
#include <utility>

namespace hartree {

enum class Region { K, KPlus, RPlus, Boundary, OutsideSublevel, Unclassified };

const char* to_string(Region region);

/// Functional values of one field. Derived entries are fixed by the four integrals
/// (mass, kinetic, lp, hartree) and the model; see assemble_report.
struct FunctionalReport {
  double mass = 0.0;
  double kinetic = 0.0;  ///< \int |grad psi|^2
  double lp = 0.0;       ///< \int |psi|^{p+1}
  double hartree = 0.0;  ///< \int (|x|^{-2} * |psi|^2) |psi|^2
  double energy = 0.0;
  double bigK = 0.0;
  double lagrange = 0.0;
  double nehari = 0.0;
  double vfunc = 0.0;
  Region region = Region::Unclassified;
};

/// Builds every derived functional from the four integrals.
FunctionalReport assemble_report(double mass, double kinetic, double lp, double hartree, const ModelParams& params);

struct EvalOptions {
  HartreeMode mode = HartreeMode::Truncated;
  SupportCheck check = SupportCheck::Enforce;
};

FunctionalReport report(const Field& field, const ModelParams& params, const SpectralEngine& engine,
                        EvalOptions options = {});

/// \int |psi|^{exponent}
double lp_integral(const Field& field, double exponent);

/// K/4 + (1/4 - 1/(p+1)) lp. Not sign-definite for p < 3.
double aux_L1(const FunctionalReport& r, const ModelParams& params);
/// (1/2 - 1/(p+1)) K + (1/(p+1) - 1/4) hartree. Not sign-definite for p > 3.
double aux_L2(const FunctionalReport& r, const ModelParams& params);
double aux_L1(const Field& field, const ModelParams& params, const SpectralEngine& engine);
double aux_L2(const Field& field, const ModelParams& params, const SpectralEngine& engine);

enum class ScalingKind {
  Amplitude,     ///< lambda psi
  MassDilation,  ///< lambda^{D/2} u(lambda x)
  LpDilation,    ///< lambda^{D/(p+1)} psi(lambda x)
  H1Dilation,    ///< lambda^{2/(p-1)} v(lambda x)
};

const char* to_string(ScalingKind kind);

/// Prefactor exponent alpha of a dilation lambda^alpha psi(lambda x). Amplitude scaling is not a
/// dilation and returns 1.
double dilation_exponent(ScalingKind kind, const ModelParams& params);

/// lambda-powers carried by (kinetic, mass, lp, hartree) under the given scaling.
struct ScalingPowers {
  double kinetic, mass, lp, hartree;
};
ScalingPowers scaling_powers(ScalingKind kind, const ModelParams& params);

/// Resamples the field; dilations use trigonometric interpolation at the points lambda x.
/// Enforce checks the L/2 margin of the output.
Field apply_scaling(const Field& field, ScalingKind kind, double lambda, const ModelParams& params,
                    const SpectralEngine& engine, SupportCheck check = SupportCheck::Enforce);

/// Closed-form functionals of the scaled field from the base integrals in `base`.
FunctionalReport scaled_functionals(const FunctionalReport& base, ScalingKind kind, double lambda,
                                    const ModelParams& params);

/// Unique lambda > 0 with K = lambda^{p-1} lp + lambda^2 hartree.
double nehari_root(double bigK, double lp, double hartree, double p);
double nehari_lambda(const FunctionalReport& r, const ModelParams& params);
double nehari_lambda(const Field& field, const ModelParams& params, const SpectralEngine& engine);

/// lambda with V[lambda^{D/2} u(lambda x)] = 0, if one exists.
std::optional<double> v_zero_lambda(const FunctionalReport& r, const ModelParams& params, double tol = 1e-9);
std::optional<double> v_zero_lambda(const Field& field, const ModelParams& params, const SpectralEngine& engine);

/// Sign-pattern region inside the sub-level set L < d_N.
Region classify(const FunctionalReport& r, double d_N, double tol = 1e-9);

struct GNConstants {
  double q = 1.0;
  double c_power = 0.0;    ///< (q+1) / ||R||_2^{2q}
  double c_hartree = 0.0;  ///< 2 / ||grad W||_2^2
  double r_norm_sq = 0.0;
  double w_grad_norm_sq = 0.0;
};

GNConstants make_gn_constants(double q, double r_norm_sq, double w_grad_norm_sq);

/// ||psi||_{2q+2}^{2q+2} / (C ||grad psi||_2^{qD} ||psi||_2^{2+q(2-D)}), D = 3.
double gn_ratio_power(const Field& field, double q, const GNConstants& constants, const SpectralEngine& engine);
/// hartree / (C mass kinetic).
double gn_ratio_hartree(const Field& field, const GNConstants& constants, const SpectralEngine& engine,
                        EvalOptions options = {});

/// N - (2/D) V; vanishes on solutions of the standing-wave equation.
double pohozaev_residual(const FunctionalReport& r, const ModelParams& params);
double pohozaev_residual(const Field& field, const ModelParams& params, const SpectralEngine& engine);

/// (centered difference of lambda -> L[scaled], closed-form derivative) at lambda.
/// Amplitude: N[lambda psi]/lambda. MassDilation: V[u_lambda]/lambda.
std::pair<double, double> lambda_derivative_check(const FunctionalReport& base, ScalingKind kind, double lambda,
                                                  const ModelParams& params);

}  // namespace hartree
