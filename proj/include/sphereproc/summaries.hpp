#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sphereproc {

/// Evenly spaced grid of n+1 values from a to b inclusive.
inline std::vector<double> uniform_grid(double a, double b, int steps) {
  if (steps < 1) throw std::invalid_argument("uniform_grid: steps must be >= 1");
  if (!(a < b)) throw std::invalid_argument("uniform_grid: need a < b");
  std::vector<double> g(steps + 1);
  for (int i = 0; i <= steps; ++i) g[i] = a + (b - a) * i / steps;
  return g;
}

/// K-function restricted to one argument, tabulated on an increasing grid.
struct KCurve {
  std::vector<double> grid;
  std::vector<double> values;

  KCurve() = default;
  KCurve(std::vector<double> g, std::vector<double> v)
      : grid(std::move(g)), values(std::move(v)) {
    if (grid.size() != values.size())
      throw std::invalid_argument("KCurve: grid/values length mismatch");
  }
  std::size_t size() const { return grid.size(); }
};

/// Space-sphere K-function tabulated on an (r, s) grid, row-major in r.
struct KSurface {
  std::vector<double> r_grid;
  std::vector<double> s_grid;
  std::vector<double> values;

  KSurface() = default;
  KSurface(std::vector<double> r, std::vector<double> s)
      : r_grid(std::move(r)), s_grid(std::move(s)),
        values(r_grid.size() * s_grid.size(), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return values[i * s_grid.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * s_grid.size() + j]; }
  std::size_t rows() const { return r_grid.size(); }
  std::size_t cols() const { return s_grid.size(); }
};

}  // namespace sphereproc
