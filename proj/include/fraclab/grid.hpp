#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fraclab {

/// Uniform periodic grid on the box [-X, X)^n with N points per axis.
///
/// Node j on an axis sits at x_j = -X + j h with h = 2X / N, so the origin is
/// node N/2.  Samples are stored row-major with the last axis fastest.
class GridSpec {
public:
  GridSpec() = default;

  [[nodiscard]] int dimension() const noexcept { return n_; }
  [[nodiscard]] double half_width() const noexcept { return half_width_; }
  [[nodiscard]] std::size_t points_per_axis() const noexcept { return points_; }
  [[nodiscard]] double spacing() const noexcept { return spacing_; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  /// h^n, the volume attached to one node.
  [[nodiscard]] double cell_volume() const noexcept;

  [[nodiscard]] double coordinate(std::size_t axis_index) const noexcept {
    return -half_width_ + spacing_ * static_cast<double>(axis_index);
  }
  /// Angular frequency pi k / X of FFT bin j (k = j for j < N/2, j - N otherwise).
  [[nodiscard]] double frequency(std::size_t bin) const noexcept;

  /// Per-axis indices of a flat sample index.
  [[nodiscard]] std::array<std::size_t, 3> unflatten(std::size_t flat) const noexcept;
  [[nodiscard]] std::size_t flatten(const std::array<std::size_t, 3>& idx) const noexcept;
  /// Physical position of a flat sample index (unused components are zero).
  [[nodiscard]] std::array<double, 3> point(std::size_t flat) const noexcept;
  [[nodiscard]] double radius(std::size_t flat) const noexcept;
  /// Flat index of the node at the origin.
  [[nodiscard]] std::size_t origin_index() const noexcept;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
  friend GridSpec make_grid(int n, double half_width, std::size_t points_per_axis);

  int n_ = 0;
  double half_width_ = 0.0;
  std::size_t points_ = 0;
  double spacing_ = 0.0;
  std::size_t size_ = 0;
};

/// Validates (n in {1,2,3}, X > 0, N a power of two >= 8) and builds a grid.
GridSpec make_grid(int n, double half_width, std::size_t points_per_axis);

/// Real samples on a GridSpec.  Every sample is finite.
class Field {
public:
  Field() = default;
  /// Throws ConfigError on a size mismatch and NumericError on non-finite samples.
  Field(GridSpec grid, std::vector<double> values);
  /// Zero field.
  explicit Field(GridSpec grid);

  /// Samples f(x) at every node; f receives the node position.
  static Field sample(const GridSpec& grid,
                      const std::function<double(const std::array<double, 3>&)>& f);
  /// Samples a radial profile g(|x|).
  static Field sample_radial(const GridSpec& grid, const std::function<double(double)>& g);

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  [[nodiscard]] double max() const;
  [[nodiscard]] double min() const;
  [[nodiscard]] double sup_norm() const;
  /// Riemann sum h^n * sum |u|.
  [[nodiscard]] double l1_norm() const;
  /// Riemann sum h^n * sum u.
  [[nodiscard]] double integral() const;
  [[nodiscard]] double mean() const;

  [[nodiscard]] Field scaled(double factor) const;
  [[nodiscard]] Field plus(const Field& other, double other_factor = 1.0) const;

  /// Moves the samples out, leaving the field empty.
  [[nodiscard]] std::vector<double> release() && { return std::move(values_); }

private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// sup |a - b| over the nodes; the fields must share a grid.
double max_abs_difference(const Field& a, const Field& b);

}  // namespace fraclab
