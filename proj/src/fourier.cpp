#include "fraclab/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct FourierPlan::Impl {
  GridSpec grid;
  std::size_t spectrum = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<double> magnitudes;

  explicit Impl(const GridSpec& g) : grid(g) {
    const int n = g.dimension();
    const auto N = g.points_per_axis();
    int dims[3];
    for (int a = 0; a < n; ++a) dims[a] = static_cast<int>(N);
    spectrum = g.size() / N * (N / 2 + 1);
    real = fftw_alloc_real(g.size());
    spec = fftw_alloc_complex(spectrum);
    if (real == nullptr || spec == nullptr) throw NumericError("FFT buffer allocation failed");
    {
      std::lock_guard lock(planner_mutex());
      fwd = fftw_plan_dft_r2c(n, dims, real, spec, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r(n, dims, spec, real, FFTW_ESTIMATE);
    }
    magnitudes.resize(spectrum);
    const std::size_t last = N / 2 + 1;
    for (std::size_t s = 0; s < spectrum; ++s) {
      std::size_t rest = s / last;
      const double k_last = M_PI * static_cast<double>(s % last) / g.half_width();
      double r2 = k_last * k_last;
      for (int a = 0; a < n - 1; ++a) {
        const double k = g.frequency(rest % N);
        r2 += k * k;
        rest /= N;
      }
      magnitudes[s] = std::sqrt(r2);
    }
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(spec);
  }
};

FourierPlan::FourierPlan(const GridSpec& grid) : impl_(std::make_unique<Impl>(grid)) {}
FourierPlan::~FourierPlan() = default;
FourierPlan::FourierPlan(FourierPlan&&) noexcept = default;
FourierPlan& FourierPlan::operator=(FourierPlan&&) noexcept = default;

const GridSpec& FourierPlan::grid() const noexcept { return impl_->grid; }
std::size_t FourierPlan::spectrum_size() const noexcept { return impl_->spectrum; }
const std::vector<double>& FourierPlan::frequency_magnitudes() const noexcept {
  return impl_->magnitudes;
}

void FourierPlan::forward(std::span<const double> in, std::vector<std::complex<double>>& out) {
  std::memcpy(impl_->real, in.data(), sizeof(double) * impl_->grid.size());
  fftw_execute(impl_->fwd);
  out.resize(impl_->spectrum);
  std::memcpy(static_cast<void*>(out.data()), impl_->spec, sizeof(fftw_complex) * impl_->spectrum);
}

void FourierPlan::inverse(std::span<const std::complex<double>> in, std::vector<double>& out) {
  std::memcpy(impl_->spec, in.data(), sizeof(fftw_complex) * impl_->spectrum);
  fftw_execute(impl_->bwd);
  const std::size_t total = impl_->grid.size();
  const double scale = 1.0 / static_cast<double>(total);
  out.resize(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = impl_->real[i] * scale;
}

std::vector<double> tabulate_multiplier(const FourierPlan& plan,
                                        const std::function<double(double)>& m) {
  const auto& mag = plan.frequency_magnitudes();
  std::vector<double> table(mag.size());
  for (std::size_t s = 0; s < mag.size(); ++s) {
    table[s] = m(mag[s]);
    if (!std::isfinite(table[s])) {
      throw NumericError("multiplier is not finite at |xi| = " + std::to_string(mag[s]));
    }
  }
  return table;
}

Field apply_multiplier(FourierPlan& plan, const Field& u, std::span<const double> table) {
  if (!(plan.grid() == u.grid())) throw ConfigError("plan and field grids differ");
  std::vector<std::complex<double>> spec;
  plan.forward(u.values(), spec);
  for (std::size_t s = 0; s < spec.size(); ++s) spec[s] *= table[s];
  std::vector<double> out;
  plan.inverse(spec, out);
  return Field(u.grid(), std::move(out));
}

Field apply_multiplier(const Field& u, const std::function<double(double)>& m) {
  FourierPlan plan(u.grid());
  const auto table = tabulate_multiplier(plan, m);
  return apply_multiplier(plan, u, table);
}

Field convolve(const Field& u, const Field& v) {
  if (!(u.grid() == v.grid())) throw ConfigError("convolution operands live on different grids");
  const GridSpec& g = u.grid();
  FourierPlan plan(g);
  std::vector<std::complex<double>> su, sv;
  plan.forward(u.values(), su);
  plan.forward(v.values(), sv);
  for (std::size_t s = 0; s < su.size(); ++s) su[s] *= sv[s];
  std::vector<double> circ;
  plan.inverse(su, circ);

  // Node i of the result pairs with circular index i + N/2 on every axis,
  // because the origin sits at node N/2.
  const std::size_t N = g.points_per_axis();
  const double h_n = g.cell_volume();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.unflatten(i);
    for (int a = 0; a < g.dimension(); ++a) idx[a] = (idx[a] + N / 2) % N;
    out[i] = h_n * circ[g.flatten(idx)];
  }
  return Field(g, std::move(out));
}

Field discrete_delta(const GridSpec& grid) {
  std::vector<double> v(grid.size(), 0.0);
  v[grid.origin_index()] = 1.0 / grid.cell_volume();
  return Field(grid, std::move(v));
}

}  // namespace fraclab
