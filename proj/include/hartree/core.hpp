#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace hartree {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;

enum class ErrorCode {
  DimensionTooSmall,
  ExponentOutOfRange,
  InvalidGrid,
  SupportViolation,
  BadMagic,
  GridMismatch,
  TruncatedPayload,
  IoFailure,
  NegativeArgument,
  GridTooLarge,
  DegenerateField,
  ZeroField,
  NonpositiveLambda,
  QOutOfRange,
  NoConvergence,
  Collapse,
  AllSeedsFailed,
  NoValidSamples,
  MassOutOfRange,
  NonfiniteState,
  ConcordanceFailure,
  StabilityFailure,
  ConfigError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Dimension D, perturbation exponent p and standing-wave frequency omega.
struct ModelParams {
  int dim = 3;
  double p = 3.0;
  double omega = 1.0;

  /// 1 + 4/D: the exponent at which the power term becomes mass-critical.
  double mass_critical_p() const { return 1.0 + 4.0 / dim; }
  /// 1 + 4/(D-2): energy-critical exponent, excluded.
  double energy_critical_p() const { return 1.0 + 4.0 / (dim - 2); }
  /// D(p-1)/(2(p+1)), the weight of the power term in the virial functional.
  double virial_weight() const { return dim * (p - 1.0) / (2.0 * (p + 1.0)); }
};

/// Throws DimensionTooSmall or ExponentOutOfRange.
void validate_params(const ModelParams& params);

/// Checks 1 + 4/D <= p < 1 + 4/(D-2) on top of validate_params.
void require_supercritical_band(const ModelParams& params);

/// Checks 1 < p < 1 + 4/D on top of validate_params.
void require_subcritical_band(const ModelParams& params);

/// Uniform periodic grid on [-L, L)^3 with n points per axis.
class GridSpec {
 public:
  GridSpec(int n, double half_length);

  int n() const { return n_; }
  double half_length() const { return half_length_; }
  double spacing() const { return 2.0 * half_length_ / n_; }
  double cell_volume() const {
    const double h = spacing();
    return h * h * h;
  }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  double coord(int j) const { return -half_length_ + j * spacing(); }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  /// Fundamental wavenumber pi / L.
  double dk() const;
  /// Signed mode number of FFT index i, in [-n/2, n/2).
  int mode(int i) const { return i < n_ / 2 ? i : i - n_; }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.n_ == b.n_ && a.half_length_ == b.half_length_;
  }

 private:
  int n_;
  double half_length_;
};

void require_same_grid(const GridSpec& a, const GridSpec& b);

/// Complex samples on a GridSpec, row-major over (x1, x2, x3).
struct Field {
  GridSpec grid;
  Eigen::ArrayXcd values;

  explicit Field(const GridSpec& g) : grid(g), values(Eigen::ArrayXcd::Zero(static_cast<Eigen::Index>(g.size()))) {}
  Field(const GridSpec& g, Eigen::ArrayXcd v);

  bool all_finite() const { return values.allFinite(); }
};

/// Samples a real profile f(x1, x2, x3) on the grid.
template <typename Profile>
Field sample_real(const GridSpec& grid, Profile&& profile) {
  Field out(grid);
  const int n = grid.n();
  for (int i = 0; i < n; ++i) {
    const double x = grid.coord(i);
    for (int j = 0; j < n; ++j) {
      const double y = grid.coord(j);
      for (int k = 0; k < n; ++k) {
        const double z = grid.coord(k);
        out.values[static_cast<Eigen::Index>(grid.index(i, j, k))] = Complex(profile(x, y, z), 0.0);
      }
    }
  }
  return out;
}

/// a * exp(-|x - x0|^2 / (2 sigma^2)). Requires |x0| + 4 sigma < L.
Field make_gaussian(const GridSpec& grid, double amplitude, double width, const Vec3& center = {0.0, 0.0, 0.0});

/// Trapezoid-rule integral of |psi|^2.
double mass(const Field& field);

/// Fraction of the mass lying outside the ball |x| < radius.
double tail_mass_fraction(const Field& field, double radius);

/// Throws SupportViolation if more than `tolerance` of the mass lies beyond |x| = L/2.
void require_support_margin(const Field& field, double tolerance = 1e-8);

void save_field(const Field& field, const std::filesystem::path& path);
Field load_field(const std::filesystem::path& path);

}  // namespace hartree
