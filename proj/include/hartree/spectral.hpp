#pragma once

#include "hartree/core.hpp"

#include <cstdint>
#include <memory>

namespace hartree {

enum class HartreeMode { Periodic, Truncated };

enum class SupportCheck { Enforce, Skip };

/// Fourier coefficients under f^(k) = \int f(x) e^{-i k.x} dx, discretised as h^3 times the DFT
/// with the phase referenced to the physical origin.
struct Spectrum {
  GridSpec grid;
  Eigen::ArrayXcd coefficients;
};

/// Fourier multiplier constant of |x|^{-2} in D dimensions: the transform is c_D |k|^{2-D}.
double riesz_constant(int dim);

/// Si(x) = \int_0^x sin(t)/t dt, x >= 0.
double sine_integral(double x);

/// FFT plans and precomputed symbols for one grid. Immutable after construction; transform
/// scratch is thread-local, so a const engine may be shared across threads.
class SpectralEngine {
 public:
  explicit SpectralEngine(const GridSpec& grid);
  ~SpectralEngine();
  SpectralEngine(SpectralEngine&&) noexcept;
  SpectralEngine& operator=(SpectralEngine&&) noexcept;
  SpectralEngine(const SpectralEngine&) = delete;
  SpectralEngine& operator=(const SpectralEngine&) = delete;

  const GridSpec& grid() const;

  /// k_i = (pi/L) m_i for FFT index i, m_i in [-n/2, n/2).
  const Eigen::ArrayXd& wavenumbers() const;
  /// -|k|^2 over the n^3 FFT layout.
  const Eigen::ArrayXd& laplacian_symbol() const;
  /// c_3 |k|^{-1} over the n^3 FFT layout, zero at k = 0.
  const Eigen::ArrayXd& riesz_symbol_periodic() const;
  /// 4 pi Si(|k| L_t) / |k| over the (2n)^3 padded FFT layout, 4 pi L_t at k = 0.
  const Eigen::ArrayXd& riesz_symbol_truncated() const;
  /// Transfer function actually applied on the padded grid (r2c half layout), derived from
  /// the truncated kernel sampled on a 4x oversampled box.
  const Eigen::ArrayXd& padded_transfer() const;
  /// L_t = 2 sqrt(3) L.
  double truncation_radius() const;

  /// Unnormalised forward DFT over the n^3 grid.
  Eigen::ArrayXcd dft(const Eigen::ArrayXcd& values) const;
  /// Inverse DFT including the 1/n^3 factor.
  Eigen::ArrayXcd idft(const Eigen::ArrayXcd& coefficients) const;

  /// V = |x|^{-2} * rho on the grid for a real density rho (no support check).
  Eigen::ArrayXd convolve_riesz(const Eigen::ArrayXd& density, HartreeMode mode) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Spectrum forward(const Field& field, const SpectralEngine& engine);
Field inverse(const Spectrum& spectrum, const SpectralEngine& engine);

/// Spectral Laplacian.
Field laplacian(const Field& field, const SpectralEngine& engine);

/// Spectral gradient; Nyquist modes are dropped.
std::array<Field, 3> gradient(const Field& field, const SpectralEngine& engine);

/// \int |grad psi|^2 by Parseval.
double kinetic_energy(const Field& field, const SpectralEngine& engine);

/// V_H = |x|^{-2} * |psi|^2, real-valued. Truncated mode enforces the L/2 support margin
/// unless `check` is Skip.
Field hartree_potential(const Field& field, HartreeMode mode, const SpectralEngine& engine,
                        SupportCheck check = SupportCheck::Enforce);

/// Same discrete operator as the periodic mode, evaluated by O(n^6) direct summation (n <= 16).
Field hartree_potential_direct(const Field& field, const SpectralEngine& engine);

/// Real-space samples of the periodic kernel, K(x_d) for offsets d in the n^3 FFT layout.
Eigen::ArrayXd periodic_kernel_samples(const SpectralEngine& engine);

/// Real random field with Fourier support |k| <= k_max (default n pi / (4L)), unit L2 norm.
/// Deterministic in `seed`.
Field band_limited_noise(const SpectralEngine& engine, std::uint64_t seed, double k_max = -1.0);

}  // namespace hartree
