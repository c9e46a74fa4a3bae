#include "hartree/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <random>
#include <numbers>
#include <vector>

namespace hartree {
namespace {

// FFTW's planner is not re-entrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t count) : size_(count), data_(static_cast<T*>(fftw_malloc(sizeof(T) * count))) {
    if (data_ == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  T* data() { return data_; }
  std::size_t size() const { return size_; }
  fftw_complex* as_fftw() { return reinterpret_cast<fftw_complex*>(data_); }

 private:
  std::size_t size_;
  T* data_;
};

struct Plan {
  fftw_plan handle = nullptr;
  Plan() = default;
  explicit Plan(fftw_plan p) : handle(p) {}
  Plan(Plan&& o) noexcept : handle(o.handle) { o.handle = nullptr; }
  Plan& operator=(Plan&& o) noexcept {
    std::swap(handle, o.handle);
    return *this;
  }
  ~Plan() {
    if (handle != nullptr) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(handle);
    }
  }
};

// Per-thread scratch, reused across calls; `slot` separates buffers that are live together.
template <typename T>
T* scratch(int slot, std::size_t count) {
  thread_local std::unique_ptr<FftwBuffer<T>> buffers[4];
  auto& b = buffers[slot];
  if (!b || b->size() != count) b = std::make_unique<FftwBuffer<T>>(count);
  return b->data();
}

// Evaluates a radial symbol on an integer lattice, caching by m1^2 + m2^2 + m3^2.
template <typename F>
std::vector<double> radial_table(int max_abs_mode, F&& symbol_of_sq) {
  std::vector<double> table(3 * max_abs_mode * max_abs_mode + 1);
  for (std::size_t s = 0; s < table.size(); ++s) table[s] = symbol_of_sq(static_cast<double>(s));
  return table;
}

}  // namespace

double riesz_constant(int dim) {
  if (dim < 3) throw Error(ErrorCode::DimensionTooSmall, "Riesz constant needs D >= 3");
  const double d = dim;
  return std::pow(2.0, d - 2.0) * std::pow(std::numbers::pi, d / 2.0) * std::tgamma((d - 2.0) / 2.0) / std::tgamma(1.0);
}

struct SpectralEngine::Impl {
  GridSpec grid;
  int n;
  int half;  // n/2 + 1
  Eigen::ArrayXd k1d;
  Eigen::ArrayXd lap;
  Eigen::ArrayXd riesz_periodic;
  Eigen::ArrayXd riesz_truncated;
  Eigen::ArrayXd periodic_transfer;  // n * n * (n/2+1), includes 1/n^3
  Eigen::ArrayXd padded_transfer;    // 2n * 2n * (n+1), includes h^3 / (2n)^3
  double lt;
  Plan c2c_fwd, c2c_bwd, r2c_n, c2r_n, r2c_2n;
  // Pruned padded transforms over a complex [2n][2n][n+1] buffer: only the n^3 corner
  // carries data going in, and only that corner is read coming out.
  Plan pad_r2c_z, pad_fwd_y, pad_fwd_x, pad_bwd_x, pad_bwd_y, pad_c2r_z;

  explicit Impl(const GridSpec& g) : grid(g), n(g.n()), half(g.n() / 2 + 1), lt(2.0 * std::sqrt(3.0) * g.half_length()) {
    const double dk = g.dk();
    k1d.resize(n);
    for (int i = 0; i < n; ++i) k1d[i] = dk * g.mode(i);

    make_plans();

    const std::size_t total = g.size();
    lap.resize(static_cast<Eigen::Index>(total));
    riesz_periodic.resize(static_cast<Eigen::Index>(total));
    const double c3 = riesz_constant(3);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double ksq = k1d[i] * k1d[i] + k1d[j] * k1d[j] + k1d[k] * k1d[k];
          const auto idx = static_cast<Eigen::Index>(g.index(i, j, k));
          lap[idx] = -ksq;
          riesz_periodic[idx] = ksq > 0.0 ? c3 / std::sqrt(ksq) : 0.0;
        }

    periodic_transfer.resize(static_cast<Eigen::Index>(n) * n * half);
    const double inv_n3 = 1.0 / static_cast<double>(total);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < half; ++k)
          periodic_transfer[(static_cast<Eigen::Index>(i) * n + j) * half + k] =
              riesz_periodic[static_cast<Eigen::Index>(g.index(i, j, k))] * inv_n3;

    build_truncated_symbols();
  }

  void make_plans() {
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE;
    {
      FftwBuffer<Complex> a(grid.size()), b(grid.size());
      c2c_fwd = Plan(fftw_plan_dft_3d(n, n, n, a.as_fftw(), b.as_fftw(), FFTW_FORWARD, flags));
      c2c_bwd = Plan(fftw_plan_dft_3d(n, n, n, a.as_fftw(), b.as_fftw(), FFTW_BACKWARD, flags));
    }
    {
      FftwBuffer<double> r(grid.size());
      FftwBuffer<Complex> c(static_cast<std::size_t>(n) * n * half);
      r2c_n = Plan(fftw_plan_dft_r2c_3d(n, n, n, r.data(), c.as_fftw(), flags));
      c2r_n = Plan(fftw_plan_dft_c2r_3d(n, n, n, c.as_fftw(), r.data(), flags));
    }
    {
      const int m = 2 * n;
      FftwBuffer<double> r(static_cast<std::size_t>(m) * m * m);
      FftwBuffer<Complex> c(static_cast<std::size_t>(m) * m * (n + 1));
      r2c_2n = Plan(fftw_plan_dft_r2c_3d(m, m, m, r.data(), c.as_fftw(), flags));
    }
    {
      const int m = 2 * n;
      const int hz = n + 1;
      FftwBuffer<Complex> c(static_cast<std::size_t>(m) * m * hz);
      double* re = reinterpret_cast<double*>(c.data());
      const int plane = m * hz;
      {
        fftw_iodim dim{m, 1, 1};
        fftw_iodim many[2] = {{n, 2 * plane, plane}, {n, 2 * hz, hz}};
        pad_r2c_z = Plan(fftw_plan_guru_dft_r2c(1, &dim, 2, many, re, c.as_fftw(), flags));
        fftw_iodim dim_inv{m, 1, 1};
        fftw_iodim many_inv[2] = {{n, plane, 2 * plane}, {n, hz, 2 * hz}};
        pad_c2r_z = Plan(fftw_plan_guru_dft_c2r(1, &dim_inv, 2, many_inv, c.as_fftw(), re, flags));
      }
      {
        fftw_iodim dim{m, hz, hz};
        fftw_iodim many[2] = {{n, plane, plane}, {hz, 1, 1}};
        pad_fwd_y = Plan(fftw_plan_guru_dft(1, &dim, 2, many, c.as_fftw(), c.as_fftw(), FFTW_FORWARD, flags));
        pad_bwd_y = Plan(fftw_plan_guru_dft(1, &dim, 2, many, c.as_fftw(), c.as_fftw(), FFTW_BACKWARD, flags));
      }
      {
        fftw_iodim dim{m, plane, plane};
        fftw_iodim many[2] = {{m, hz, hz}, {hz, 1, 1}};
        pad_fwd_x = Plan(fftw_plan_guru_dft(1, &dim, 2, many, c.as_fftw(), c.as_fftw(), FFTW_FORWARD, flags));
        pad_bwd_x = Plan(fftw_plan_guru_dft(1, &dim, 2, many, c.as_fftw(), c.as_fftw(), FFTW_BACKWARD, flags));
      }
    }
  }

  double truncated_symbol(double kappa) const {
    return kappa > 0.0 ? 4.0 * std::numbers::pi * sine_integral(kappa * lt) / kappa : 4.0 * std::numbers::pi * lt;
  }

  void build_truncated_symbols() {
    const double L = grid.half_length();
    const double h = grid.spacing();
    const int m = 2 * n;

    // Analytic truncated-kernel transform sampled on the 2x padded lattice (dk = pi / 2L).
    {
      const double dk2 = std::numbers::pi / (2.0 * L);
      const auto table = radial_table(n, [&](double s) { return truncated_symbol(dk2 * std::sqrt(s)); });
      riesz_truncated.resize(static_cast<Eigen::Index>(m) * m * m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k) {
            const int a = i < n ? i : i - m, b = j < n ? j : j - m, c = k < n ? k : k - m;
            riesz_truncated[(static_cast<Eigen::Index>(i) * m + j) * m + k] = table[a * a + b * b + c * c];
          }
    }

    // Real-space kernel band-limited on a 4x box (period 8L exceeds L_t plus the source
    // diameter, so no image of the truncated kernel reaches the evaluation box). The symbol
    // is even per axis, so the 4n-point inverse DFT reduces to a DCT-I of length 2n + 1.
    const int nc = 2 * n + 1;
    FftwBuffer<double> sym(static_cast<std::size_t>(nc) * nc * nc), ker(static_cast<std::size_t>(nc) * nc * nc);
    {
      const double dk4 = std::numbers::pi / (4.0 * L);
      const auto table = radial_table(2 * n, [&](double s) { return truncated_symbol(dk4 * std::sqrt(s)); });
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j)
          for (int k = 0; k < nc; ++k)
            sym.data()[(static_cast<std::size_t>(i) * nc + j) * nc + k] = table[i * i + j * j + k * k];
      Plan dct;
      {
        std::lock_guard lock(planner_mutex());
        dct = Plan(fftw_plan_r2r_3d(nc, nc, nc, sym.data(), ker.data(), FFTW_REDFT00, FFTW_REDFT00, FFTW_REDFT00,
                                    FFTW_ESTIMATE));
      }
      fftw_execute(dct.handle);
    }
    const double box4 = 8.0 * L;
    const double ker_scale = h * h * h / (box4 * box4 * box4);

    FftwBuffer<double> padded(static_cast<std::size_t>(m) * m * m);
    FftwBuffer<Complex> spec(static_cast<std::size_t>(m) * m * (n + 1));
    for (int i = 0; i < m; ++i) {
      const int a = i <= n ? i : m - i;
      for (int j = 0; j < m; ++j) {
        const int b = j <= n ? j : m - j;
        for (int k = 0; k < m; ++k) {
          const int c = k <= n ? k : m - k;
          padded.data()[(static_cast<std::size_t>(i) * m + j) * m + k] =
              ker_scale * ker.data()[(static_cast<std::size_t>(a) * nc + b) * nc + c];
        }
      }
    }
    fftw_execute_dft_r2c(r2c_2n.handle, padded.data(), spec.as_fftw());
    const double inv = 1.0 / (static_cast<double>(m) * m * m);
    padded_transfer.resize(static_cast<Eigen::Index>(m) * m * (n + 1));
    for (Eigen::Index i = 0; i < padded_transfer.size(); ++i) padded_transfer[i] = spec.data()[i].real() * inv;
  }
};

SpectralEngine::SpectralEngine(const GridSpec& grid) : impl_(std::make_unique<Impl>(grid)) {}
SpectralEngine::~SpectralEngine() = default;
SpectralEngine::SpectralEngine(SpectralEngine&&) noexcept = default;
SpectralEngine& SpectralEngine::operator=(SpectralEngine&&) noexcept = default;

const GridSpec& SpectralEngine::grid() const { return impl_->grid; }
const Eigen::ArrayXd& SpectralEngine::wavenumbers() const { return impl_->k1d; }
const Eigen::ArrayXd& SpectralEngine::laplacian_symbol() const { return impl_->lap; }
const Eigen::ArrayXd& SpectralEngine::riesz_symbol_periodic() const { return impl_->riesz_periodic; }
const Eigen::ArrayXd& SpectralEngine::riesz_symbol_truncated() const { return impl_->riesz_truncated; }
const Eigen::ArrayXd& SpectralEngine::padded_transfer() const { return impl_->padded_transfer; }
double SpectralEngine::truncation_radius() const { return impl_->lt; }

Eigen::ArrayXcd SpectralEngine::dft(const Eigen::ArrayXcd& values) const {
  const std::size_t total = impl_->grid.size();
  Complex* in = scratch<Complex>(1, total);
  std::copy(values.data(), values.data() + values.size(), in);
  Eigen::ArrayXcd out(values.size());
  Complex* o = scratch<Complex>(2, total);
  fftw_execute_dft(impl_->c2c_fwd.handle, reinterpret_cast<fftw_complex*>(in), reinterpret_cast<fftw_complex*>(o));
  std::copy(o, o + total, out.data());
  return out;
}

Eigen::ArrayXcd SpectralEngine::idft(const Eigen::ArrayXcd& coefficients) const {
  const std::size_t total = impl_->grid.size();
  Complex* in = scratch<Complex>(1, total);
  std::copy(coefficients.data(), coefficients.data() + coefficients.size(), in);
  Complex* o = scratch<Complex>(2, total);
  fftw_execute_dft(impl_->c2c_bwd.handle, reinterpret_cast<fftw_complex*>(in), reinterpret_cast<fftw_complex*>(o));
  return Eigen::Map<const Eigen::ArrayXcd>(o, static_cast<Eigen::Index>(total)) / static_cast<double>(total);
}

Eigen::ArrayXd SpectralEngine::convolve_riesz(const Eigen::ArrayXd& density, HartreeMode mode) const {
  const Impl& im = *impl_;
  const int n = im.n;
  if (static_cast<std::size_t>(density.size()) != im.grid.size()) {
    throw Error(ErrorCode::GridMismatch, "density size does not match engine grid");
  }
  if (mode == HartreeMode::Periodic) {
    const std::size_t nc = static_cast<std::size_t>(n) * n * im.half;
    double* r = scratch<double>(3, im.grid.size());
    Complex* c = scratch<Complex>(0, nc);
    std::copy(density.data(), density.data() + density.size(), r);
    fftw_execute_dft_r2c(im.r2c_n.handle, r, reinterpret_cast<fftw_complex*>(c));
    for (std::size_t i = 0; i < nc; ++i) c[i] *= im.periodic_transfer[static_cast<Eigen::Index>(i)];
    fftw_execute_dft_c2r(im.c2r_n.handle, reinterpret_cast<fftw_complex*>(c), r);
    return Eigen::Map<const Eigen::ArrayXd>(r, density.size());
  }

  const int m = 2 * n;
  const int hz = n + 1;
  const std::size_t plane = static_cast<std::size_t>(m) * hz;
  Complex* c = scratch<Complex>(0, plane * m);
  auto* cf = reinterpret_cast<fftw_complex*>(c);
  double* re = reinterpret_cast<double*>(c);
  std::fill(c, c + plane * n, Complex(0.0, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      std::copy_n(density.data() + (static_cast<std::size_t>(i) * n + j) * n, n, re + 2 * (i * plane + j * hz));
  fftw_execute_dft_r2c(im.pad_r2c_z.handle, re, cf);
  fftw_execute_dft(im.pad_fwd_y.handle, cf, cf);
  std::fill(c + plane * n, c + plane * m, Complex(0.0, 0.0));
  fftw_execute_dft(im.pad_fwd_x.handle, cf, cf);
  for (std::size_t i = 0; i < plane * m; ++i) c[i] *= im.padded_transfer[static_cast<Eigen::Index>(i)];
  fftw_execute_dft(im.pad_bwd_x.handle, cf, cf);
  fftw_execute_dft(im.pad_bwd_y.handle, cf, cf);
  fftw_execute_dft_c2r(im.pad_c2r_z.handle, cf, re);
  Eigen::ArrayXd out(density.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      std::copy_n(re + 2 * (i * plane + j * hz), n, out.data() + (static_cast<std::size_t>(i) * n + j) * n);
  return out;
}

namespace {

// (-1)^{m1+m2+m3}: shifts the DFT phase reference from the box corner -L to the origin.
Eigen::ArrayXd origin_phase(const GridSpec& g) {
  const int n = g.n();
  Eigen::ArrayXd s(static_cast<Eigen::Index>(g.size()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s[static_cast<Eigen::Index>(g.index(i, j, k))] = ((i + j + k) & 1) ? -1.0 : 1.0;
  return s;
}

}  // namespace

Spectrum forward(const Field& field, const SpectralEngine& engine) {
  require_same_grid(field.grid, engine.grid());
  const double h3 = field.grid.cell_volume();
  Eigen::ArrayXcd coeff = engine.dft(field.values) * (origin_phase(field.grid) * h3);
  return Spectrum{field.grid, std::move(coeff)};
}

Field inverse(const Spectrum& spectrum, const SpectralEngine& engine) {
  require_same_grid(spectrum.grid, engine.grid());
  const double h3 = spectrum.grid.cell_volume();
  Eigen::ArrayXcd shifted = spectrum.coefficients * (origin_phase(spectrum.grid) / h3);
  return Field(spectrum.grid, engine.idft(shifted));
}

Field laplacian(const Field& field, const SpectralEngine& engine) {
  require_same_grid(field.grid, engine.grid());
  Eigen::ArrayXcd c = engine.dft(field.values);
  c *= engine.laplacian_symbol();
  return Field(field.grid, engine.idft(c));
}

std::array<Field, 3> gradient(const Field& field, const SpectralEngine& engine) {
  require_same_grid(field.grid, engine.grid());
  const GridSpec& g = field.grid;
  const int n = g.n();
  const Eigen::ArrayXd& k1 = engine.wavenumbers();
  const Eigen::ArrayXcd c = engine.dft(field.values);
  std::array<Field, 3> out{Field(g), Field(g), Field(g)};
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::ArrayXcd d(c.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const int idx_axis = axis == 0 ? i : (axis == 1 ? j : k);
          const double kk = idx_axis == n / 2 ? 0.0 : k1[idx_axis];
          const auto idx = static_cast<Eigen::Index>(g.index(i, j, k));
          d[idx] = Complex(0.0, kk) * c[idx];
        }
    out[axis].values = engine.idft(d);
  }
  return out;
}

double kinetic_energy(const Field& field, const SpectralEngine& engine) {
  require_same_grid(field.grid, engine.grid());
  const Eigen::ArrayXcd c = engine.dft(field.values);
  const double n3 = static_cast<double>(field.grid.size());
  return -(c.abs2() * engine.laplacian_symbol()).sum() * field.grid.cell_volume() / n3;
}

Field hartree_potential(const Field& field, HartreeMode mode, const SpectralEngine& engine, SupportCheck check) {
  require_same_grid(field.grid, engine.grid());
  if (mode == HartreeMode::Truncated && check == SupportCheck::Enforce) require_support_margin(field);
  const Eigen::ArrayXd v = engine.convolve_riesz(field.values.abs2(), mode);
  return Field(field.grid, v.cast<Complex>());
}

Eigen::ArrayXd periodic_kernel_samples(const SpectralEngine& engine) {
  const GridSpec& g = engine.grid();
  const Eigen::ArrayXcd k = engine.idft(engine.riesz_symbol_periodic().cast<Complex>());
  return k.real() / g.cell_volume();
}

Field hartree_potential_direct(const Field& field, const SpectralEngine& engine) {
  require_same_grid(field.grid, engine.grid());
  const GridSpec& g = field.grid;
  const int n = g.n();
  if (n > 16) throw Error(ErrorCode::GridTooLarge, "direct summation limited to n <= 16");
  const Eigen::ArrayXd kernel = periodic_kernel_samples(engine) * g.cell_volume();
  const Eigen::ArrayXd rho = field.values.abs2();
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(rho.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
              const int da = (i - a + n) % n, db = (j - b + n) % n, dc = (k - c + n) % n;
              acc += kernel[static_cast<Eigen::Index>(g.index(da, db, dc))] *
                     rho[static_cast<Eigen::Index>(g.index(a, b, c))];
            }
        v[static_cast<Eigen::Index>(g.index(i, j, k))] = acc;
      }
  return Field(g, v.cast<Complex>());
}

Field band_limited_noise(const SpectralEngine& engine, std::uint64_t seed, double k_max) {
  const GridSpec& g = engine.grid();
  const int n = g.n();
  if (k_max < 0.0) k_max = n * std::numbers::pi / (4.0 * g.half_length());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::ArrayXcd white(static_cast<Eigen::Index>(g.size()));
  for (Eigen::Index i = 0; i < white.size(); ++i) white[i] = Complex(normal(rng), 0.0);
  // A real sample has a Hermitian spectrum; a radial mask keeps it Hermitian.
  Eigen::ArrayXcd c = engine.dft(white);
  c = (-engine.laplacian_symbol() <= k_max * k_max).select(c, Complex(0.0, 0.0));
  Field out(g, engine.idft(c).real().cast<Complex>());
  const double norm = std::sqrt(mass(out));
  if (norm > 0.0) out.values /= norm;
  return out;
}

}  // namespace hartree
