#include "hartree/functionals.hpp"

#include <cmath>
#include <numbers>

namespace hartree {

const char* to_string(Region region) {
  switch (region) {
    case Region::K: return "K";
    case Region::KPlus: return "K_PLUS";
    case Region::RPlus: return "R_PLUS";
    case Region::Boundary: return "BOUNDARY";
    case Region::OutsideSublevel: return "OUTSIDE_SUBLEVEL";
    case Region::Unclassified: return "UNCLASSIFIED";
  }
  return "UNKNOWN";
}

const char* to_string(ScalingKind kind) {
  switch (kind) {
    case ScalingKind::Amplitude: return "AMPLITUDE";
    case ScalingKind::MassDilation: return "MASS_DILATION";
    case ScalingKind::LpDilation: return "LP_DILATION";
    case ScalingKind::H1Dilation: return "H1_DILATION";
  }
  return "UNKNOWN";
}

FunctionalReport assemble_report(double mass, double kinetic, double lp, double hartree, const ModelParams& params) {
  const double p1 = params.p + 1.0;
  FunctionalReport r;
  r.mass = mass;
  r.kinetic = kinetic;
  r.lp = lp;
  r.hartree = hartree;
  r.energy = 0.5 * kinetic - 0.25 * hartree - lp / p1;
  r.bigK = kinetic + params.omega * mass;
  r.lagrange = 0.5 * r.bigK - lp / p1 - 0.25 * hartree;
  r.nehari = r.bigK - lp - hartree;
  r.vfunc = kinetic - params.virial_weight() * lp - 0.5 * hartree;
  return r;
}

double lp_integral(const Field& field, double exponent) {
  return field.values.abs2().pow(0.5 * exponent).sum() * field.grid.cell_volume();
}

FunctionalReport report(const Field& field, const ModelParams& params, const SpectralEngine& engine,
                        EvalOptions options) {
  require_same_grid(field.grid, engine.grid());
  const Eigen::ArrayXd rho = field.values.abs2();
  const double h3 = field.grid.cell_volume();
  if (options.mode == HartreeMode::Truncated && options.check == SupportCheck::Enforce) {
    require_support_margin(field);
  }
  const double m = rho.sum() * h3;
  const double kin = kinetic_energy(field, engine);
  const double lp = rho.pow(0.5 * (params.p + 1.0)).sum() * h3;
  const double hart = (engine.convolve_riesz(rho, options.mode) * rho).sum() * h3;
  return assemble_report(m, kin, lp, hart, params);
}

double aux_L1(const FunctionalReport& r, const ModelParams& params) {
  return 0.25 * r.bigK + (0.25 - 1.0 / (params.p + 1.0)) * r.lp;
}

double aux_L2(const FunctionalReport& r, const ModelParams& params) {
  const double inv = 1.0 / (params.p + 1.0);
  return (0.5 - inv) * r.bigK + (inv - 0.25) * r.hartree;
}

double aux_L1(const Field& field, const ModelParams& params, const SpectralEngine& engine) {
  return aux_L1(report(field, params, engine), params);
}

double aux_L2(const Field& field, const ModelParams& params, const SpectralEngine& engine) {
  return aux_L2(report(field, params, engine), params);
}

double dilation_exponent(ScalingKind kind, const ModelParams& params) {
  const double d = params.dim;
  switch (kind) {
    case ScalingKind::Amplitude: return 1.0;
    case ScalingKind::MassDilation: return 0.5 * d;
    case ScalingKind::LpDilation: return d / (params.p + 1.0);
    case ScalingKind::H1Dilation:
      if (!(params.p > 1.0)) throw Error(ErrorCode::ExponentOutOfRange, "H1 dilation requires p > 1");
      return 2.0 / (params.p - 1.0);
  }
  return 1.0;
}

ScalingPowers scaling_powers(ScalingKind kind, const ModelParams& params) {
  const double p1 = params.p + 1.0;
  if (kind == ScalingKind::Amplitude) return {2.0, 2.0, p1, 4.0};
  const double a = dilation_exponent(kind, params);
  const double d = params.dim;
  return {2.0 * a + 2.0 - d, 2.0 * a - d, p1 * a - d, 4.0 * a - 2.0 * d + 2.0};
}

namespace {

using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A(j, i): weight of DFT coefficient i in the trigonometric interpolant at the point lambda x_j.
// The Nyquist mode uses its real (cosine) form.
Eigen::MatrixXcd interpolation_matrix(const GridSpec& g, const Eigen::ArrayXd& k1, double lambda) {
  const int n = g.n();
  const double L = g.half_length();
  Eigen::MatrixXcd a(n, n);
  for (int j = 0; j < n; ++j) {
    const double s = lambda * g.coord(j) + L;
    for (int i = 0; i < n; ++i) {
      if (i == n / 2) {
        a(j, i) = Complex(std::cos(k1[i] * s) / n, 0.0);
      } else {
        a(j, i) = std::polar(1.0 / n, k1[i] * s);
      }
    }
  }
  return a;
}

}  // namespace

Field apply_scaling(const Field& field, ScalingKind kind, double lambda, const ModelParams& params,
                    const SpectralEngine& engine, SupportCheck check) {
  require_same_grid(field.grid, engine.grid());
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::NonpositiveLambda, "lambda must be > 0");
  if (kind == ScalingKind::Amplitude) return Field(field.grid, field.values * lambda);
  const double prefactor = std::pow(lambda, dilation_exponent(kind, params));
  if (lambda == 1.0) return field;

  const GridSpec& g = field.grid;
  const Eigen::Index n = g.n();
  const Eigen::MatrixXcd a = interpolation_matrix(g, engine.wavenumbers(), lambda);
  Eigen::ArrayXcd c = engine.dft(field.values);

  // Separable evaluation: contract the coefficient tensor with A along x3, x2, then x1.
  {
    Eigen::Map<RowMatrix> m(c.data(), n * n, n);
    RowMatrix t = m * a.transpose();
    m = t;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Map<RowMatrix> s(c.data() + i * n * n, n, n);
    RowMatrix t = a * s;
    s = t;
  }
  {
    Eigen::Map<RowMatrix> m(c.data(), n, n * n);
    RowMatrix t = a * m;
    m = t;
  }
  Field out(g, c * prefactor);
  if (check == SupportCheck::Enforce) require_support_margin(out);
  return out;
}

FunctionalReport scaled_functionals(const FunctionalReport& base, ScalingKind kind, double lambda,
                                    const ModelParams& params) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::NonpositiveLambda, "lambda must be > 0");
  const ScalingPowers e = scaling_powers(kind, params);
  return assemble_report(base.mass * std::pow(lambda, e.mass), base.kinetic * std::pow(lambda, e.kinetic),
                         base.lp * std::pow(lambda, e.lp), base.hartree * std::pow(lambda, e.hartree), params);
}

double nehari_root(double bigK, double lp, double hartree, double p) {
  if (!(lp + hartree > 0.0)) throw Error(ErrorCode::DegenerateField, "lp + hartree must be positive");
  if (!(bigK > 0.0)) throw Error(ErrorCode::DegenerateField, "K must be positive");
  // g is strictly increasing in lambda; its root balances K against both nonlinear terms.
  const auto g = [&](double x) { return std::pow(x, p - 1.0) * lp + x * x * hartree - bigK; };
  const auto dg = [&](double x) { return (p - 1.0) * std::pow(x, p - 2.0) * lp + 2.0 * x * hartree; };
  double lo = 1e-6;
  double hi = 1.0;
  while (g(lo) > 0.0) {
    lo *= 1e-3;
    if (lo < 1e-300) throw Error(ErrorCode::DegenerateField, "no Nehari bracket");
  }
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw Error(ErrorCode::DegenerateField, "no Nehari bracket");
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    const double d = dg(x);
    if (d > 0.0) x -= g(x) / d;
  }
  return x;
}

double nehari_lambda(const FunctionalReport& r, const ModelParams& params) {
  return nehari_root(r.bigK, r.lp, r.hartree, params.p);
}

double nehari_lambda(const Field& field, const ModelParams& params, const SpectralEngine& engine) {
  return nehari_lambda(report(field, params, engine), params);
}

std::optional<double> v_zero_lambda(const FunctionalReport& r, const ModelParams& params, double tol) {
  const double s = 0.5 * params.dim * (params.p - 1.0) - 2.0;
  if (std::abs(params.p - params.mass_critical_p()) <= 1e-12) {
    if (std::abs(r.vfunc) <= tol * r.bigK) return 1.0;
    return std::nullopt;
  }
  if (s < 0.0) return std::nullopt;
  const double a = r.kinetic - 0.5 * r.hartree;
  if (!(a > 0.0) || !(r.lp > 0.0)) return std::nullopt;
  return std::pow(a / (params.virial_weight() * r.lp), 1.0 / s);
}

std::optional<double> v_zero_lambda(const Field& field, const ModelParams& params, const SpectralEngine& engine) {
  return v_zero_lambda(report(field, params, engine), params);
}

Region classify(const FunctionalReport& r, double d_N, double tol) {
  if (r.lagrange >= d_N - tol) return Region::OutsideSublevel;
  const double scale = tol * r.bigK;
  if (std::abs(r.nehari) <= scale || (r.nehari < 0.0 && std::abs(r.vfunc) <= scale)) return Region::Boundary;
  if (r.nehari < 0.0) return r.vfunc < 0.0 ? Region::K : Region::KPlus;
  return Region::RPlus;
}

GNConstants make_gn_constants(double q, double r_norm_sq, double w_grad_norm_sq) {
  if (!(r_norm_sq > 0.0) || !(w_grad_norm_sq > 0.0)) {
    throw Error(ErrorCode::DegenerateField, "extremizer norms must be positive");
  }
  GNConstants c;
  c.q = q;
  c.r_norm_sq = r_norm_sq;
  c.w_grad_norm_sq = w_grad_norm_sq;
  c.c_power = (q + 1.0) / std::pow(r_norm_sq, q);
  c.c_hartree = 2.0 / w_grad_norm_sq;
  return c;
}

double gn_ratio_power(const Field& field, double q, const GNConstants& constants, const SpectralEngine& engine) {
  constexpr double d = 3.0;
  if (!(q > 0.0 && q < 2.0 / (d - 2.0))) throw Error(ErrorCode::QOutOfRange, "q must lie in (0, 2/(D-2))");
  const double m = mass(field);
  if (!(m > 0.0)) throw Error(ErrorCode::ZeroField, "GN ratio of the zero field");
  const double kin = kinetic_energy(field, engine);
  const double num = lp_integral(field, 2.0 * q + 2.0);
  return num / (constants.c_power * std::pow(kin, 0.5 * q * d) * std::pow(m, 0.5 * (2.0 + q * (2.0 - d))));
}

double gn_ratio_hartree(const Field& field, const GNConstants& constants, const SpectralEngine& engine,
                        EvalOptions options) {
  const double m = mass(field);
  if (!(m > 0.0)) throw Error(ErrorCode::ZeroField, "GN ratio of the zero field");
  const FunctionalReport r = report(field, ModelParams{}, engine, options);
  return r.hartree / (constants.c_hartree * r.mass * r.kinetic);
}

double pohozaev_residual(const FunctionalReport& r, const ModelParams& params) {
  return r.nehari - (2.0 / params.dim) * r.vfunc;
}

double pohozaev_residual(const Field& field, const ModelParams& params, const SpectralEngine& engine) {
  return pohozaev_residual(report(field, params, engine), params);
}

std::pair<double, double> lambda_derivative_check(const FunctionalReport& base, ScalingKind kind, double lambda,
                                                  const ModelParams& params) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::NonpositiveLambda, "lambda must be > 0");
  if (kind != ScalingKind::Amplitude && kind != ScalingKind::MassDilation) {
    throw Error(ErrorCode::ConfigError, "derivative identity defined for AMPLITUDE and MASS_DILATION only");
  }
  const double step = 1e-5 * lambda;
  const double up = scaled_functionals(base, kind, lambda + step, params).lagrange;
  const double down = scaled_functionals(base, kind, lambda - step, params).lagrange;
  const FunctionalReport at = scaled_functionals(base, kind, lambda, params);
  const double rhs = (kind == ScalingKind::Amplitude ? at.nehari : at.vfunc) / lambda;
  return {(up - down) / (2.0 * step), rhs};
}

}  // namespace hartree
