#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sphereproc/geometry.hpp"

namespace sphereproc {

/// Axis-aligned box window W in R^d with |W| > 0. Boundary points count as
/// inside (closed-box convention).
struct BoxWindow {
  std::vector<double> lower;
  std::vector<double> upper;

  BoxWindow(std::vector<double> lo, std::vector<double> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.empty() || lower.size() != upper.size())
      throw std::invalid_argument("BoxWindow: lower/upper must be non-empty and equal length");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
        throw std::invalid_argument("BoxWindow: need lower[i] < upper[i] at axis " +
                                    std::to_string(i));
    }
  }

  int dim() const { return static_cast<int>(lower.size()); }

  double side(std::size_t i) const { return upper[i] - lower[i]; }

  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lower.size(); ++i) v *= side(i);
    return v;
  }

  double min_side() const {
    double m = side(0);
    for (std::size_t i = 1; i < lower.size(); ++i) m = std::min(m, side(i));
    return m;
  }

  double diameter() const {
    double sq = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) sq += side(i) * side(i);
    return std::sqrt(sq);
  }

  bool contains(const SpatialPoint& y) const {
    if (y.dim() != dim()) return false;
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (y[i] < lower[i] || y[i] > upper[i]) return false;
    return true;
  }

  bool operator==(const BoxWindow& other) const {
    return lower == other.lower && upper == other.upper;
  }
};

/// Projected spatial component list with its window.
struct SpatialPattern {
  BoxWindow window;
  std::vector<SpatialPoint> points;

  std::size_t size() const { return points.size(); }
};

/// Projected spherical component list.
struct SpherePattern {
  int sphere_dim;
  std::vector<SpherePoint> points;

  std::size_t size() const { return points.size(); }
};

/// Simple locally finite point pattern on W x S^k: parallel lists of spatial
/// locations and unit directions. Immutable after construction.
class SpaceSpherePattern {
 public:
  SpaceSpherePattern(BoxWindow window, int sphere_dim, std::vector<SpatialPoint> spatial,
                     std::vector<SpherePoint> directions)
      : window_(std::move(window)),
        sphere_dim_(sphere_dim),
        spatial_(std::move(spatial)),
        directions_(std::move(directions)) {
    if (sphere_dim_ < 1) throw std::invalid_argument("SpaceSpherePattern: k must be >= 1");
    if (spatial_.size() != directions_.size())
      throw std::invalid_argument("SpaceSpherePattern: component lists differ in length");
    for (std::size_t i = 0; i < spatial_.size(); ++i) {
      if (spatial_[i].dim() != window_.dim())
        throw std::invalid_argument("SpaceSpherePattern: spatial dimension mismatch at point " +
                                    std::to_string(i));
      if (directions_[i].sphere_dim() != sphere_dim_)
        throw std::invalid_argument("SpaceSpherePattern: sphere dimension mismatch at point " +
                                    std::to_string(i));
      if (!window_.contains(spatial_[i]))
        throw std::invalid_argument("SpaceSpherePattern: point " + std::to_string(i) +
                                    " lies outside the window");
    }
    check_distinct();
  }

  const BoxWindow& window() const { return window_; }
  int sphere_dim() const { return sphere_dim_; }
  std::size_t size() const { return spatial_.size(); }
  const std::vector<SpatialPoint>& spatial() const { return spatial_; }
  const std::vector<SpherePoint>& directions() const { return directions_; }
  const SpatialPoint& spatial_at(std::size_t i) const { return spatial_[i]; }
  const SpherePoint& direction_at(std::size_t i) const { return directions_[i]; }

 private:
  // The process is simple: (y, u) pairs must be pairwise distinct. Sort-based
  // check keeps construction O(n log n).
  void check_distinct() const {
    const std::size_t n = spatial_.size();
    if (n < 2) return;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
      if (spatial_[a].coords != spatial_[b].coords) return spatial_[a].coords < spatial_[b].coords;
      return directions_[a].coords() < directions_[b].coords();
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < n; ++i) {
      const std::size_t a = order[i - 1], b = order[i];
      if (spatial_[a] == spatial_[b] && directions_[a] == directions_[b])
        throw std::invalid_argument("SpaceSpherePattern: duplicate point at indices " +
                                    std::to_string(a) + " and " + std::to_string(b));
    }
  }

  BoxWindow window_;
  int sphere_dim_;
  std::vector<SpatialPoint> spatial_;
  std::vector<SpherePoint> directions_;
};

inline SpatialPattern project_spatial(const SpaceSpherePattern& x) {
  return SpatialPattern{x.window(), x.spatial()};
}

inline SpherePattern project_spherical(const SpaceSpherePattern& x) {
  return SpherePattern{x.sphere_dim(), x.directions()};
}

enum class PairAlgorithm { Auto, Naive, Grid };

namespace detail {

inline std::size_t close_pair_count_naive(const SpaceSpherePattern& x, double r, double s) {
  const double cos_s = std::cos(s);
  const std::size_t n = x.size();
  std::size_t unordered = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (x.spatial_at(i).distance(x.spatial_at(j)) > r) continue;
      // d(u_i, u_j) <= s  <=>  <u_i, u_j> >= cos s.
      if (x.direction_at(i).dot(x.direction_at(j)) >= cos_s) ++unordered;
    }
  }
  return 2 * unordered;
}

// Cell-list accelerator: spatial cells of side >= r so candidate pairs live in
// neighbouring cells only. Counts are exactly those of the naive loop.
inline std::size_t close_pair_count_grid(const SpaceSpherePattern& x, double r, double s) {
  const int d = x.window().dim();
  const std::size_t n = x.size();
  const double cos_s = std::cos(s);

  std::vector<int> cells_per_axis(d);
  std::vector<double> cell_size(d);
  std::size_t total_cells = 1;
  for (int a = 0; a < d; ++a) {
    const int m = std::max(1, static_cast<int>(std::floor(x.window().side(a) / std::max(r, 1e-300))));
    cells_per_axis[a] = m;
    cell_size[a] = x.window().side(a) / m;
    total_cells *= static_cast<std::size_t>(m);
    if (total_cells > 1u << 24) return close_pair_count_naive(x, r, s);
  }

  auto cell_index = [&](const SpatialPoint& y) {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a) {
      int c = static_cast<int>((y[a] - x.window().lower[a]) / cell_size[a]);
      c = std::clamp(c, 0, cells_per_axis[a] - 1);
      idx = idx * cells_per_axis[a] + static_cast<std::size_t>(c);
    }
    return idx;
  };

  std::vector<std::vector<std::size_t>> buckets(total_cells);
  for (std::size_t i = 0; i < n; ++i) buckets[cell_index(x.spatial_at(i))].push_back(i);

  std::size_t unordered = 0;
  std::vector<int> coord(d), neighbour(d);
  for (std::size_t c = 0; c < total_cells; ++c) {
    if (buckets[c].empty()) continue;
    std::size_t rem = c;
    for (int a = d - 1; a >= 0; --a) {
      coord[a] = static_cast<int>(rem % cells_per_axis[a]);
      rem /= cells_per_axis[a];
    }
    // Enumerate neighbour cells with index >= c to visit each cell pair once.
    std::vector<std::size_t> neighbour_cells;
    std::function<void(int)> walk = [&](int axis) {
      if (axis == d) {
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a) idx = idx * cells_per_axis[a] + static_cast<std::size_t>(neighbour[a]);
        if (idx >= c) neighbour_cells.push_back(idx);
        return;
      }
      for (int off = -1; off <= 1; ++off) {
        const int v = coord[axis] + off;
        if (v < 0 || v >= cells_per_axis[axis]) continue;
        neighbour[axis] = v;
        walk(axis + 1);
      }
    };
    walk(0);
    for (std::size_t nc : neighbour_cells) {
      for (std::size_t ii = 0; ii < buckets[c].size(); ++ii) {
        const std::size_t i = buckets[c][ii];
        const std::size_t j_start = (nc == c) ? ii + 1 : 0;
        for (std::size_t jj = j_start; jj < buckets[nc].size(); ++jj) {
          const std::size_t j = buckets[nc][jj];
          if (x.spatial_at(i).distance(x.spatial_at(j)) > r) continue;
          if (x.direction_at(i).dot(x.direction_at(j)) >= cos_s) ++unordered;
        }
      }
    }
  }
  return 2 * unordered;
}

}  // namespace detail

/// Number of ordered distinct pairs with ||y_i - y_j|| <= r and
/// d(u_i, u_j) <= s. Always even.
inline std::size_t close_pair_count(const SpaceSpherePattern& x, double r, double s,
                                    PairAlgorithm algo = PairAlgorithm::Auto) {
  if (r < 0.0) throw std::invalid_argument("close_pair_count: r must be >= 0");
  if (!(s >= 0.0 && s <= kPi)) throw std::invalid_argument("close_pair_count: s must be in [0, pi]");
  switch (algo) {
    case PairAlgorithm::Naive:
      return detail::close_pair_count_naive(x, r, s);
    case PairAlgorithm::Grid:
      return detail::close_pair_count_grid(x, r, s);
    case PairAlgorithm::Auto:
    default:
      if (x.size() >= 512 && r > 0.0 && r < 0.5 * x.window().min_side())
        return detail::close_pair_count_grid(x, r, s);
      return detail::close_pair_count_naive(x, r, s);
  }
}

}  // namespace sphereproc
