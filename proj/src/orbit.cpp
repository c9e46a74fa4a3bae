#include "hartree/orbit.hpp"

#include <cmath>

namespace hartree {

double h1_norm_sq(const Field& f, const SpectralEngine& engine) { return mass(f) + kinetic_energy(f, engine); }

Field roll(const Field& u, const std::array<int, 3>& shift) {
  const GridSpec& g = u.grid;
  const int n = g.n();
  Field out(g);
  const auto wrap = [n](int i) { return ((i % n) + n) % n; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const auto src = g.index(wrap(i - shift[0]), wrap(j - shift[1]), wrap(k - shift[2]));
        out.values[static_cast<Eigen::Index>(g.index(i, j, k))] = u.values[static_cast<Eigen::Index>(src)];
      }
  return out;
}

OrbitDistanceResult orbit_distance(const Field& f, const Field& u, const SpectralEngine& engine) {
  require_same_grid(f.grid, u.grid);
  require_same_grid(f.grid, engine.grid());
  const GridSpec& g = f.grid;
  const int n = g.n();

  // C(y) = <f, u(. - y)>_{H^1} for every grid shift y, as one inverse DFT of the weighted cross spectrum.
  const Eigen::ArrayXd weight = 1.0 - engine.laplacian_symbol();
  const Eigen::ArrayXcd cross = engine.dft(f.values) * engine.dft(u.values).conjugate() * weight;
  const Eigen::ArrayXcd corr = engine.idft(cross);
  Eigen::Index best = 0;
  corr.abs2().maxCoeff(&best);

  OrbitDistanceResult res;
  const auto b = static_cast<int>(best);
  res.best_shift = {g.mode(b / (n * n)), g.mode((b / n) % n), g.mode(b % n)};
  res.best_phase = std::arg(corr[best]);
  Field aligned = roll(u, res.best_shift);
  aligned.values *= std::polar(1.0, res.best_phase);
  const Field diff(g, f.values - aligned.values);
  res.distance_h1 = std::sqrt(std::max(0.0, h1_norm_sq(diff, engine)));
  return res;
}

}  // namespace hartree
