#include "hartree/core.hpp"

#include <cmath>
#include <numbers>

namespace hartree {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionTooSmall: return "DIMENSION_TOO_SMALL";
    case ErrorCode::ExponentOutOfRange: return "EXPONENT_OUT_OF_RANGE";
    case ErrorCode::InvalidGrid: return "INVALID_GRID";
    case ErrorCode::SupportViolation: return "SUPPORT_VIOLATION";
    case ErrorCode::BadMagic: return "BAD_MAGIC";
    case ErrorCode::GridMismatch: return "GRID_MISMATCH";
    case ErrorCode::TruncatedPayload: return "TRUNCATED_PAYLOAD";
    case ErrorCode::IoFailure: return "IO_FAILURE";
    case ErrorCode::NegativeArgument: return "NEGATIVE_ARGUMENT";
    case ErrorCode::GridTooLarge: return "GRID_TOO_LARGE";
    case ErrorCode::DegenerateField: return "DEGENERATE_FIELD";
    case ErrorCode::ZeroField: return "ZERO_FIELD";
    case ErrorCode::NonpositiveLambda: return "NONPOSITIVE_LAMBDA";
    case ErrorCode::QOutOfRange: return "Q_OUT_OF_RANGE";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::Collapse: return "COLLAPSE";
    case ErrorCode::AllSeedsFailed: return "ALL_SEEDS_FAILED";
    case ErrorCode::NoValidSamples: return "NO_VALID_SAMPLES";
    case ErrorCode::MassOutOfRange: return "MASS_OUT_OF_RANGE";
    case ErrorCode::NonfiniteState: return "NONFINITE_STATE";
    case ErrorCode::ConcordanceFailure: return "CONCORDANCE_FAILURE";
    case ErrorCode::StabilityFailure: return "STABILITY_FAILURE";
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
  }
  return "UNKNOWN";
}

void validate_params(const ModelParams& params) {
  if (params.dim < 3) {
    throw Error(ErrorCode::DimensionTooSmall, "D = " + std::to_string(params.dim) + " < 3");
  }
  if (!(params.p > 1.0 && params.p < params.energy_critical_p())) {
    throw Error(ErrorCode::ExponentOutOfRange,
                "p = " + std::to_string(params.p) + " outside (1, " + std::to_string(params.energy_critical_p()) + ")");
  }
}

void require_supercritical_band(const ModelParams& params) {
  validate_params(params);
  // exact rational boundary 1 + 4/D is admitted; allow for its floating representation
  if (params.p < params.mass_critical_p() - 1e-14) {
    throw Error(ErrorCode::ExponentOutOfRange, "requires p >= 1 + 4/D");
  }
}

void require_subcritical_band(const ModelParams& params) {
  validate_params(params);
  if (params.p >= params.mass_critical_p()) {
    throw Error(ErrorCode::ExponentOutOfRange, "requires p < 1 + 4/D");
  }
}

GridSpec::GridSpec(int n, double half_length) : n_(n), half_length_(half_length) {
  if (n < 8 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::InvalidGrid, "n must be a power of two >= 8, got " + std::to_string(n));
  }
  if (!(half_length > 0.0) || !std::isfinite(half_length)) {
    throw Error(ErrorCode::InvalidGrid, "half_length must be positive");
  }
}

double GridSpec::dk() const { return std::numbers::pi / half_length_; }

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) {
    throw Error(ErrorCode::GridMismatch, "grids differ (n " + std::to_string(a.n()) + " vs " + std::to_string(b.n()) + ")");
  }
}

Field::Field(const GridSpec& g, Eigen::ArrayXcd v) : grid(g), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw Error(ErrorCode::GridMismatch, "value count does not match n^3");
  }
}

Field make_gaussian(const GridSpec& grid, double amplitude, double width, const Vec3& center) {
  if (!(width > 0.0)) {
    throw Error(ErrorCode::SupportViolation, "gaussian width must be positive");
  }
  const double offset = std::sqrt(center[0] * center[0] + center[1] * center[1] + center[2] * center[2]);
  if (!(offset + 4.0 * width < grid.half_length())) {
    throw Error(ErrorCode::SupportViolation, "|x0| + 4 sigma must be below L");
  }
  const double inv = 1.0 / (2.0 * width * width);
  return sample_real(grid, [&](double x, double y, double z) {
    const double dx = x - center[0], dy = y - center[1], dz = z - center[2];
    return amplitude * std::exp(-(dx * dx + dy * dy + dz * dz) * inv);
  });
}

double mass(const Field& field) { return field.values.abs2().sum() * field.grid.cell_volume(); }

double tail_mass_fraction(const Field& field, double radius) {
  const GridSpec& g = field.grid;
  const int n = g.n();
  const double r2max = radius * radius;
  double outside = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.coord(i);
    for (int j = 0; j < n; ++j) {
      const double y = g.coord(j);
      for (int k = 0; k < n; ++k) {
        const double z = g.coord(k);
        const double w = std::norm(field.values[static_cast<Eigen::Index>(g.index(i, j, k))]);
        total += w;
        if (x * x + y * y + z * z >= r2max) outside += w;
      }
    }
  }
  return total > 0.0 ? outside / total : 0.0;
}

void require_support_margin(const Field& field, double tolerance) {
  const double frac = tail_mass_fraction(field, 0.5 * field.grid.half_length());
  if (frac > tolerance) {
    throw Error(ErrorCode::SupportViolation,
                "mass fraction " + std::to_string(frac) + " beyond L/2 exceeds " + std::to_string(tolerance));
  }
}

}  // namespace hartree
