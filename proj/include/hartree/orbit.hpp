#pragma once

#include "hartree/core.hpp"
#include "hartree/spectral.hpp"

#include <array>

namespace hartree {

struct OrbitDistanceResult {
  double distance_h1 = 0.0;
  std::array<int, 3> best_shift{0, 0, 0};  ///< grid offsets in [-n/2, n/2)
  double best_phase = 0.0;
};

/// ||f||_{H^1}^2 = mass + kinetic.
double h1_norm_sq(const Field& f, const SpectralEngine& engine);

/// u(x - y) for y = shift * h, periodic and exact.
Field roll(const Field& u, const std::array<int, 3>& shift);

/// min over grid shifts y and phases theta of ||f - e^{i theta} u(. - y)||_{H^1}.
OrbitDistanceResult orbit_distance(const Field& f, const Field& u, const SpectralEngine& engine);

}  // namespace hartree
