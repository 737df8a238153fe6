#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace sphereproc {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

namespace detail {

// Gauss7/Kronrod15 nodes and weights on [-1, 1] (QUADPACK dqk15 constants).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kGk15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGauss7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(const F& f, double a, double b, double& kronrod, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double result_g = fc * kGauss7Weights[3];
  double result_k = fc * kGk15Weights[7];
  for (int i = 0; i < 7; ++i) {
    const double x = h * kGk15Nodes[i];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    result_k += kGk15Weights[i] * (f1 + f2);
    if (i % 2 == 1) result_g += kGauss7Weights[i / 2] * (f1 + f2);
  }
  kronrod = result_k * h;
  err = std::abs((result_k - result_g) * h);
}

}  // namespace detail

/// Adaptive 1-D quadrature (Gauss-Kronrod 15 with interval bisection).
/// Stops when the local error estimate satisfies the tolerance; throws on
/// non-finite integrand values.
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-10,
                              double abs_tol = 0.0, int max_depth = 48) {
  if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: requires a <= b");
  QuadResult out;
  if (a == b) return out;

  struct Frame {
    double a, b;
    int depth;
  };
  // Explicit stack; intervals that fail the local tolerance get bisected.
  std::size_t evals = 0;
  double total = 0.0, total_err = 0.0;
  bool converged = true;

  auto eval = [&](double x) {
    ++evals;
    const double v = f(x);
    if (!std::isfinite(v)) throw std::domain_error("integrate_adaptive: non-finite integrand");
    return v;
  };

  // First estimate of the magnitude, used for the relative-tolerance scale.
  double whole, whole_err;
  detail::gk15(eval, a, b, whole, whole_err);
  const double scale_init = std::abs(whole);

  std::function<void(double, double, double, double, int)> recurse =
      [&](double lo, double hi, double val, double err, int depth) {
        const double tol = std::max(abs_tol, rel_tol * std::max(scale_init, std::abs(total) + std::abs(val)));
        // Tolerance prorated by interval share of the domain.
        const double local_tol = tol * (hi - lo) / (b - a);
        if (err <= local_tol || depth >= max_depth) {
          if (depth >= max_depth && err > local_tol) converged = false;
          total += val;
          total_err += err;
          return;
        }
        const double mid = 0.5 * (lo + hi);
        double vl, el, vr, er;
        detail::gk15(eval, lo, mid, vl, el);
        detail::gk15(eval, mid, hi, vr, er);
        recurse(lo, mid, vl, el, depth + 1);
        recurse(mid, hi, vr, er, depth + 1);
      };
  recurse(a, b, whole, whole_err, 0);

  out.value = total;
  out.error = total_err;
  out.evaluations = evals;
  out.converged = converged;
  return out;
}

struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b]. Nodes by Newton iteration on the
/// Legendre recurrence.
inline GaussLegendreRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  const double xm = 0.5 * (b + a);
  const double xl = 0.5 * (b - a);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(3.141592653589793 * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    rule.nodes[i] = xm - xl * z;
    rule.nodes[n - 1 - i] = xm + xl * z;
    rule.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

}  // namespace sphereproc
