#include "fraclab/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

namespace fraclab::kernels {

namespace {

inline double convolution_entry(std::span<const double> a, std::span<const double> b, double h,
                                std::size_t i) {
  const std::size_t n = a.size();
  const std::size_t shift = (i + n / 2) % n;
  double s = 0.0;
  // index (i - j + N/2) mod N, walked downward from `shift`
  std::size_t k = shift;
  for (std::size_t j = 0; j < n; ++j) {
    s += a[k] * b[j];
    k = (k == 0) ? n - 1 : k - 1;
  }
  return h * s;
}

double pair_entry(const GridSpec& g, std::span<const double> f, std::size_t target,
                  const std::function<double(double)>& k) {
  const auto xt = g.point(target);
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (f[j] == 0.0) continue;
    const auto xj = g.point(j);
    double r2 = 0.0;
    for (int a = 0; a < g.dimension(); ++a) r2 += (xt[a] - xj[a]) * (xt[a] - xj[a]);
    s += k(std::sqrt(r2)) * f[j];
  }
  return s * g.cell_volume();
}

void check_field(const GridSpec& g, std::span<const double> f) {
  if (f.size() != g.size()) throw std::invalid_argument("radial_pair_sum: size mismatch");
}

void check_sizes(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("circular_convolution: operands must have equal nonzero length");
  }
}

}  // namespace

namespace serial {

std::vector<double> circular_convolution(std::span<const double> a, std::span<const double> b,
                                         double h) {
  check_sizes(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = convolution_entry(a, b, h, i);
  return out;
}

std::vector<double> radial_pair_sum(const GridSpec& grid, std::span<const double> f,
                                    std::span<const std::size_t> targets,
                                    const std::function<double(double)>& k) {
  check_field(grid, f);
  std::vector<double> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) out[t] = pair_entry(grid, f, targets[t], k);
  return out;
}

}  // namespace serial

namespace omp {

std::vector<double> circular_convolution(std::span<const double> a, std::span<const double> b,
                                         double h) {
  check_sizes(a, b);
  std::vector<double> out(a.size());
  const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = convolution_entry(a, b, h, static_cast<std::size_t>(i));
  }
  return out;
}

std::vector<double> radial_pair_sum(const GridSpec& grid, std::span<const double> f,
                                    std::span<const std::size_t> targets,
                                    const std::function<double(double)>& k) {
  check_field(grid, f);
  std::vector<double> out(targets.size());
  const auto n = static_cast<std::ptrdiff_t>(targets.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t t = 0; t < n; ++t) out[t] = pair_entry(grid, f, targets[t], k);
  return out;
}

}  // namespace omp

int thread_count() { return omp_get_max_threads(); }

void set_thread_count(int threads) {
  static const int initial = omp_get_max_threads();
  omp_set_num_threads(threads < 1 ? initial : threads);
}

}  // namespace fraclab::kernels
