#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "sphereproc/rng.hpp"

namespace sphereproc {

/// Raised when an iterative statistical procedure exhausts its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool boundary_hit = false;
  std::vector<double> trace;  ///< best objective value per restart
};

namespace detail {

// Nelder-Mead simplex descent (minimization) with standard coefficients.
inline OptimResult nelder_mead_min(const std::function<double(const std::vector<double>&)>& f,
                                   std::vector<double> x0, const std::vector<double>& step,
                                   int max_iter, double tol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

  int iter = 0;
  bool converged = false;
  while (iter < max_iter) {
    ++iter;
    std::vector<std::size_t> order(n + 1);
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

    double value_spread = std::abs(values[worst] - values[best]);
    double param_spread = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      param_spread = std::max(param_spread, std::abs(simplex[worst][i] - simplex[best][i]));
    if (value_spread < tol && param_spread < tol) {
      converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
      return p;
    };

    const auto reflected = blend(-1.0);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const auto expanded = blend(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const auto contracted = blend(fr < values[worst] ? -0.5 : 0.5);
      const double fc = f(contracted);
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j)
            simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
          values[i] = f(simplex[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (values[i] < values[best]) best = i;
  OptimResult out;
  out.x = simplex[best];
  out.value = values[best];
  out.iterations = iter;
  out.converged = converged;
  return out;
}

}  // namespace detail

/// Maximizes f over the box [lower, upper] with Nelder-Mead restarted from
/// n_restarts random interior points (plus the box midpoint). Values outside
/// the box are evaluated at the clamped point with a quadratic penalty.
inline OptimResult maximize_box(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& lower,
                                const std::vector<double>& upper, const RngSeed& seed,
                                int n_restarts = 5, int max_iter = 2000, double tol = 1e-8) {
  const std::size_t n = lower.size();
  if (n == 0 || upper.size() != n)
    throw std::invalid_argument("maximize_box: bad bounds");
  for (std::size_t i = 0; i < n; ++i)
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("maximize_box: lower > upper");

  auto penalized = [&](const std::vector<double>& x) {
    std::vector<double> clamped(n);
    double penalty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      clamped[i] = std::clamp(x[i], lower[i], upper[i]);
      const double excess = x[i] - clamped[i];
      const double scale = std::max(1.0, upper[i] - lower[i]);
      penalty += (excess / scale) * (excess / scale);
    }
    return -(f(clamped) - 1e8 * penalty);  // minimize the negative
  };

  auto eng = make_engine(seed);
  std::uniform_real_distribution<double> unif(0.05, 0.95);

  OptimResult best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int restart = 0; restart <= n_restarts; ++restart) {
    std::vector<double> x0(n), step(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double width = upper[i] - lower[i];
      const double frac = restart == 0 ? 0.5 : unif(eng);
      x0[i] = lower[i] + frac * width;
      step[i] = width > 0.0 ? 0.2 * width : 0.1;
    }
    auto res = detail::nelder_mead_min(penalized, x0, step, max_iter, tol);
    res.value = -res.value;
    for (std::size_t i = 0; i < n; ++i) res.x[i] = std::clamp(res.x[i], lower[i], upper[i]);
    best.trace.push_back(res.value);
    if (res.value > best.value) {
      const auto trace = best.trace;
      best = res;
      best.trace = trace;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double width = std::max(upper[i] - lower[i], 1e-12);
    if (upper[i] > lower[i] &&
        (best.x[i] - lower[i] < 1e-6 * width || upper[i] - best.x[i] < 1e-6 * width))
      best.boundary_hit = true;
  }
  return best;
}

}  // namespace sphereproc
