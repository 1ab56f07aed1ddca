#include "fraclab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fraclab/errors.hpp"

namespace fraclab {

GridSpec make_grid(int n, double half_width, std::size_t points_per_axis) {
  if (n < 1 || n > 3) {
    throw ConfigError("grid dimension must be 1, 2 or 3, got " + std::to_string(n));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw ConfigError("grid half-width must be positive and finite");
  }
  if (points_per_axis < 8 || (points_per_axis & (points_per_axis - 1)) != 0) {
    throw ConfigError("points per axis must be a power of two >= 8, got " +
                      std::to_string(points_per_axis));
  }
  GridSpec g;
  g.n_ = n;
  g.half_width_ = half_width;
  g.points_ = points_per_axis;
  g.spacing_ = 2.0 * half_width / static_cast<double>(points_per_axis);
  g.size_ = 1;
  for (int a = 0; a < n; ++a) g.size_ *= points_per_axis;
  return g;
}

double GridSpec::cell_volume() const noexcept { return std::pow(spacing_, n_); }

double GridSpec::frequency(std::size_t bin) const noexcept {
  const auto half = static_cast<long long>(points_ / 2);
  auto k = static_cast<long long>(bin);
  if (k >= half) k -= static_cast<long long>(points_);
  return M_PI * static_cast<double>(k) / half_width_;
}

std::array<std::size_t, 3> GridSpec::unflatten(std::size_t flat) const noexcept {
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (int a = n_ - 1; a >= 0; --a) {
    idx[a] = flat % points_;
    flat /= points_;
  }
  return idx;
}

std::size_t GridSpec::flatten(const std::array<std::size_t, 3>& idx) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < n_; ++a) flat = flat * points_ + idx[a];
  return flat;
}

std::array<double, 3> GridSpec::point(std::size_t flat) const noexcept {
  const auto idx = unflatten(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < n_; ++a) x[a] = coordinate(idx[a]);
  return x;
}

double GridSpec::radius(std::size_t flat) const noexcept {
  const auto x = point(flat);
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

std::size_t GridSpec::origin_index() const noexcept {
  return flatten({points_ / 2, points_ / 2, points_ / 2});
}

Field::Field(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ConfigError("field has " + std::to_string(values_.size()) + " samples, grid expects " +
                      std::to_string(grid_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw NumericError("field sample is not finite");
  }
}

Field::Field(GridSpec grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field Field::sample(const GridSpec& grid,
                    const std::function<double(const std::array<double, 3>&)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.point(i));
  return Field(grid, std::move(v));
}

Field Field::sample_radial(const GridSpec& grid, const std::function<double(double)>& g) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = g(grid.radius(i));
  return Field(grid, std::move(v));
}

double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }
double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Field::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double Field::l1_norm() const {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return s * grid_.cell_volume();
}

double Field::integral() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) * grid_.cell_volume();
}

double Field::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) /
         static_cast<double>(values_.size());
}

Field Field::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return Field(grid_, std::move(v));
}

Field Field::plus(const Field& other, double other_factor) const {
  if (!(other.grid_ == grid_)) throw ConfigError("field grids differ");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other_factor * other.values_[i];
  return Field(grid_, std::move(v));
}

double max_abs_difference(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("field grids differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

}  // namespace fraclab
