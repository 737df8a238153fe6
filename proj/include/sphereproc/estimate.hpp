#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphereproc/geometry.hpp"
#include "sphereproc/log.hpp"
#include "sphereproc/optimize.hpp"
#include "sphereproc/parallel.hpp"
#include "sphereproc/pattern.hpp"
#include "sphereproc/spherical_density.hpp"
#include "sphereproc/summaries.hpp"

namespace sphereproc {

enum class EdgeCorrection { Translation, Temporal, None };

// ---------------------------------------------------------------------------
// Intensities

struct HomIntensities {
  double rho1 = 0.0;  ///< n / |W|
  double rho2 = 0.0;  ///< n / sigma_k
  double rho = 0.0;   ///< n / (|W| sigma_k)
};

/// Plug-in intensity estimates under first order homogeneity.
inline HomIntensities intensity_hom(const SpaceSpherePattern& x) {
  if (x.size() == 0) throw std::invalid_argument("intensity_hom: empty pattern");
  const double n = static_cast<double>(x.size());
  const double vol = x.window().volume();
  const double sigma = sphere_surface_measure(x.sphere_dim());
  return HomIntensities{n / vol, n / sigma, n / (vol * sigma)};
}

// ---------------------------------------------------------------------------
// Edge corrections

/// Translation correction |W cap W_{y_i - y_j}| for a box window.
inline double translation_correction(const SpatialPoint& yi, const SpatialPoint& yj,
                                     const BoxWindow& w) {
  double v = 1.0;
  for (int a = 0; a < w.dim(); ++a) {
    const double overlap = w.side(a) - std::abs(yi[a] - yj[a]);
    if (overlap <= 0.0) return 0.0;
    v *= overlap;
  }
  return v;
}

/// Temporal correction for d = 1: |W| when the interval of half-width
/// |y_i - y_j| centered at y_i lies inside W, else |W|/2.
inline double temporal_correction(const SpatialPoint& yi, const SpatialPoint& yj,
                                  const BoxWindow& w) {
  if (w.dim() != 1) throw std::invalid_argument("temporal_correction: requires d = 1");
  const double lag = std::abs(yi[0] - yj[0]);
  const double vol = w.volume();
  return (yi[0] - lag >= w.lower[0] && yi[0] + lag <= w.upper[0]) ? vol : 0.5 * vol;
}

namespace detail {

inline double pair_weight(EdgeCorrection corr, const SpatialPoint& yi, const SpatialPoint& yj,
                          const BoxWindow& w) {
  switch (corr) {
    case EdgeCorrection::Translation:
      return translation_correction(yi, yj, w);
    case EdgeCorrection::Temporal:
      return temporal_correction(yi, yj, w);
    case EdgeCorrection::None:
      return w.volume();
  }
  return w.volume();
}

/// Index of the first grid entry >= value, or grid.size() when the value
/// exceeds the grid (the pair then contributes nowhere).
inline std::size_t cumulative_bin(const std::vector<double>& grid, double value) {
  return static_cast<std::size_t>(
      std::lower_bound(grid.begin(), grid.end(), value - 1e-15) - grid.begin());
}

inline void validate_grid(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw std::invalid_argument(std::string(name) + ": empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument(std::string(name) + ": grid must be increasing");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// K-function estimators

/// Inhomogeneous spatial K estimate: for each r on the grid,
///   sum_{i != j} 1{||y_i - y_j|| <= r} / (w1(y_i, y_j) rho1(y_i) rho1(y_j)).
/// Pairs with vanishing correction weight are skipped with a warning; points
/// with nonpositive intensity are excluded from all pairs.
inline KCurve k1_hat(const SpatialPattern& y,
                     const std::function<double(const SpatialPoint&)>& rho1,
                     const std::vector<double>& r_grid,
                     EdgeCorrection corr = EdgeCorrection::Translation) {
  detail::validate_grid(r_grid, "k1_hat");
  const std::size_t n = y.size();
  std::vector<double> intensity(n);
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < n; ++i) {
    intensity[i] = rho1(y.points[i]);
    if (!(intensity[i] > 0.0)) ++excluded;
  }
  if (excluded > 0)
    log_warning("k1_hat: " + std::to_string(excluded) + " points with nonpositive intensity excluded");

  const double r_max = r_grid.back();
  std::vector<double> hist(r_grid.size(), 0.0);
  std::size_t zero_weight_pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(intensity[i] > 0.0)) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(intensity[j] > 0.0)) continue;
      const double t = y.points[i].distance(y.points[j]);
      if (t > r_max) continue;
      const std::size_t bin = detail::cumulative_bin(r_grid, t);
      if (bin >= r_grid.size()) continue;
      const double w_ij = detail::pair_weight(corr, y.points[i], y.points[j], y.window);
      const double w_ji = detail::pair_weight(corr, y.points[j], y.points[i], y.window);
      const double denom = intensity[i] * intensity[j];
      if (w_ij <= 0.0 || w_ji <= 0.0) {
        ++zero_weight_pairs;
        continue;
      }
      hist[bin] += 1.0 / (w_ij * denom) + 1.0 / (w_ji * denom);
    }
  }
  if (zero_weight_pairs > 0)
    log_warning("k1_hat: skipped " + std::to_string(zero_weight_pairs) +
                " pairs with zero translation weight (lag exceeds a window side)");
  std::vector<double> values(r_grid.size());
  double acc = 0.0;
  for (std::size_t b = 0; b < hist.size(); ++b) {
    acc += hist[b];
    values[b] = acc;
  }
  return KCurve(r_grid, std::move(values));
}

inline KCurve k1_hat(const SpatialPattern& y, double rho1, const std::vector<double>& r_grid,
                     EdgeCorrection corr = EdgeCorrection::Translation) {
  return k1_hat(y, [rho1](const SpatialPoint&) { return rho1; }, r_grid, corr);
}

/// Spherical K estimate (no edge correction; the sphere has no boundary):
///   (1/sigma_k) sum_{i != j} 1{d(u_i, u_j) <= s} / (rho2(u_i) rho2(u_j)).
inline KCurve k2_hat(const SpherePattern& u,
                     const std::function<double(const SpherePoint&)>& rho2,
                     const std::vector<double>& s_grid) {
  detail::validate_grid(s_grid, "k2_hat");
  const std::size_t n = u.size();
  std::vector<double> intensity(n);
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < n; ++i) {
    intensity[i] = rho2(u.points[i]);
    if (!(intensity[i] > 0.0)) ++excluded;
  }
  if (excluded > 0)
    log_warning("k2_hat: " + std::to_string(excluded) + " points with nonpositive intensity excluded");

  const double sigma = sphere_surface_measure(u.sphere_dim);
  const double s_max = s_grid.back();
  std::vector<double> hist(s_grid.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(intensity[i] > 0.0)) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(intensity[j] > 0.0)) continue;
      const double w = geodesic_distance(u.points[i], u.points[j]);
      if (w > s_max) continue;
      const std::size_t bin = detail::cumulative_bin(s_grid, w);
      if (bin >= s_grid.size()) continue;
      hist[bin] += 2.0 / (intensity[i] * intensity[j]);
    }
  }
  std::vector<double> values(s_grid.size());
  double acc = 0.0;
  for (std::size_t b = 0; b < hist.size(); ++b) {
    acc += hist[b];
    values[b] = acc / sigma;
  }
  return KCurve(s_grid, std::move(values));
}

inline KCurve k2_hat(const SpherePattern& u, double rho2, const std::vector<double>& s_grid) {
  return k2_hat(u, [rho2](const SpherePoint&) { return rho2; }, s_grid);
}

/// Joint estimates from one pass over the pairs: the space-sphere surface
/// K(r, s) plus the marginal curves K1(r) and K2(s). The surface and K1 share
/// the edge-corrected pair weights; K2 uses all pairs without correction.
struct KStatistics {
  KSurface k;
  KCurve k1;
  KCurve k2;
};

inline KStatistics k_statistics(
    const SpaceSpherePattern& x,
    const std::function<double(const SpatialPoint&, const SpherePoint&)>& rho,
    const std::function<double(const SpatialPoint&)>& rho1,
    const std::function<double(const SpherePoint&)>& rho2, const std::vector<double>& r_grid,
    const std::vector<double>& s_grid, EdgeCorrection corr = EdgeCorrection::Translation) {
  detail::validate_grid(r_grid, "k_statistics");
  detail::validate_grid(s_grid, "k_statistics");
  const std::size_t n = x.size();
  const std::size_t nr = r_grid.size(), ns = s_grid.size();
  const double sigma = sphere_surface_measure(x.sphere_dim());

  std::vector<double> rho_i(n), rho1_i(n), rho2_i(n);
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rho_i[i] = rho(x.spatial_at(i), x.direction_at(i));
    rho1_i[i] = rho1(x.spatial_at(i));
    rho2_i[i] = rho2(x.direction_at(i));
    if (!(rho_i[i] > 0.0 && rho1_i[i] > 0.0 && rho2_i[i] > 0.0)) ++excluded;
  }
  if (excluded > 0)
    log_warning("k_statistics: " + std::to_string(excluded) +
                " points with nonpositive intensity excluded");

  const double r_max = r_grid.back();
  const double s_max = s_grid.back();

  // Fixed block partition of the row range keeps the reduction order
  // independent of the worker count.
  const std::size_t n_blocks = std::min<std::size_t>(64, std::max<std::size_t>(1, n));
  struct Block {
    std::vector<double> surface, h1, h2;
    std::size_t zero_weight = 0;
  };
  std::vector<Block> blocks(n_blocks);

  const auto& spatial = x.spatial();
  const auto& dirs = x.directions();
  const int d = x.window().dim();
  const int kc = x.sphere_dim() + 1;

  parallel_for(n_blocks, [&](std::size_t blk) {
    auto& out = blocks[blk];
    out.surface.assign(nr * ns, 0.0);
    out.h1.assign(nr, 0.0);
    out.h2.assign(ns, 0.0);
    const std::size_t lo = blk * n / n_blocks;
    const std::size_t hi = (blk + 1) * n / n_blocks;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!(rho_i[i] > 0.0 && rho1_i[i] > 0.0 && rho2_i[i] > 0.0)) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!(rho_i[j] > 0.0 && rho1_i[j] > 0.0 && rho2_i[j] > 0.0)) continue;
        double sq = 0.0;
        for (int a = 0; a < d; ++a) {
          const double diff = spatial[i][a] - spatial[j][a];
          sq += diff * diff;
        }
        const double t = std::sqrt(sq);
        double dot = 0.0;
        for (int a = 0; a < kc; ++a) dot += dirs[i][a] * dirs[j][a];
        dot = std::clamp(dot, -1.0, 1.0);

        const double w = std::acos(dot);
        // spherical marginal: all pairs, no edge correction
        if (w <= s_max) {
          const std::size_t sb = detail::cumulative_bin(s_grid, w);
          if (sb < ns) out.h2[sb] += 2.0 / (rho2_i[i] * rho2_i[j]);
        }

        if (t > r_max) continue;
        const std::size_t rb = detail::cumulative_bin(r_grid, t);
        if (rb >= nr) continue;
        const double w_ij = detail::pair_weight(corr, spatial[i], spatial[j], x.window());
        const double w_ji = detail::pair_weight(corr, spatial[j], spatial[i], x.window());
        if (w_ij <= 0.0 || w_ji <= 0.0) {
          ++out.zero_weight;
          continue;
        }
        out.h1[rb] += 1.0 / (w_ij * rho1_i[i] * rho1_i[j]) + 1.0 / (w_ji * rho1_i[i] * rho1_i[j]);
        if (w > s_max) continue;
        const std::size_t sb = detail::cumulative_bin(s_grid, w);
        if (sb >= ns) continue;
        out.surface[rb * ns + sb] +=
            1.0 / (w_ij * rho_i[i] * rho_i[j]) + 1.0 / (w_ji * rho_i[i] * rho_i[j]);
      }
    }
  });

  KStatistics stats;
  stats.k = KSurface(r_grid, s_grid);
  std::vector<double> h1(nr, 0.0), h2(ns, 0.0);
  std::size_t zero_weight = 0;
  for (const auto& blk : blocks) {
    for (std::size_t b = 0; b < nr; ++b) h1[b] += blk.h1[b];
    for (std::size_t b = 0; b < ns; ++b) h2[b] += blk.h2[b];
    for (std::size_t c = 0; c < nr * ns; ++c) stats.k.values[c] += blk.surface[c];
    zero_weight += blk.zero_weight;
  }
  if (zero_weight > 0)
    log_warning("k_statistics: skipped " + std::to_string(zero_weight) +
                " pairs with zero translation weight (lag exceeds a window side)");

  // cumulative sums
  std::vector<double> k1_vals(nr), k2_vals(ns);
  double acc = 0.0;
  for (std::size_t b = 0; b < nr; ++b) {
    acc += h1[b];
    k1_vals[b] = acc;
  }
  acc = 0.0;
  for (std::size_t b = 0; b < ns; ++b) {
    acc += h2[b];
    k2_vals[b] = acc / sigma;
  }
  stats.k1 = KCurve(r_grid, std::move(k1_vals));
  stats.k2 = KCurve(s_grid, std::move(k2_vals));

  // 2-D cumulative sum of the surface histogram, then normalize by sigma_k.
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 1; j < ns; ++j) stats.k.values[i * ns + j] += stats.k.values[i * ns + j - 1];
  for (std::size_t i = 1; i < nr; ++i)
    for (std::size_t j = 0; j < ns; ++j) stats.k.values[i * ns + j] += stats.k.values[(i - 1) * ns + j];
  for (double& v : stats.k.values) v /= sigma;
  return stats;
}

/// Space-sphere K estimate on an (r, s) grid.
inline KSurface k_hat(const SpaceSpherePattern& x,
                      const std::function<double(const SpatialPoint&, const SpherePoint&)>& rho,
                      const std::vector<double>& r_grid, const std::vector<double>& s_grid,
                      EdgeCorrection corr = EdgeCorrection::Translation) {
  auto one = [](const SpatialPoint&) { return 1.0; };
  auto one_u = [](const SpherePoint&) { return 1.0; };
  return k_statistics(x, rho, one, one_u, r_grid, s_grid, corr).k;
}

inline KSurface k_hat(const SpaceSpherePattern& x, double rho,
                      const std::vector<double>& r_grid, const std::vector<double>& s_grid,
                      EdgeCorrection corr = EdgeCorrection::Translation) {
  return k_hat(x, [rho](const SpatialPoint&, const SpherePoint&) { return rho; }, r_grid, s_grid,
               corr);
}

/// D(r, s) = K(r, s) - K1(r) K2(s), entrywise on matching grids.
inline KSurface d_hat(const KSurface& k, const KCurve& k1, const KCurve& k2) {
  if (k.r_grid != k1.grid || k.s_grid != k2.grid)
    throw std::invalid_argument("d_hat: grids of K, K1, K2 must match");
  KSurface out = k;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j)
      out.at(i, j) = k.at(i, j) - k1.values[i] * k2.values[j];
  return out;
}

// ---------------------------------------------------------------------------
// Kent-Watson mixture fit

struct MixtureFitOptions {
  std::size_t min_points = 10;
  double kappa_max = 500.0;
  double kappa_w_min = -500.0;
  int restarts = 5;
  int max_iter = 2000;
  double tol = 1e-8;
  bool joint_p = false;  ///< also maximize over the mixture weight
  RngSeed seed{987654321, 0};
};

struct MixtureFit {
  SphericalDensity density = SphericalDensity::uniform(2);
  double p_hat = 0.0;
  double kappa = 0.0;
  double beta_oval = 0.0;
  double kappa_w = 0.0;
  double log_likelihood = 0.0;
  bool boundary_hit = false;
};

/// Fits the Kent-Watson mixture of the orientation analysis: the mixture
/// weight comes from the hemisphere count, p = 1 - 2 n_s / n with n_s the
/// number of points on the southern hemisphere relative to the Kent mean;
/// the concentration parameters maximize the likelihood with the directions
/// held fixed.
inline MixtureFit fit_mixture(const SpherePattern& u, const SpherePoint& kent_mean,
                              const SpherePoint& kent_major, const SpherePoint& kent_minor,
                              const SpherePoint& watson_axis,
                              const MixtureFitOptions& opts = {}) {
  if (u.sphere_dim != 2) throw std::invalid_argument("fit_mixture: requires k = 2");
  const std::size_t n = u.size();
  if (n < opts.min_points)
    throw std::invalid_argument("fit_mixture: need at least " + std::to_string(opts.min_points) +
                                " points");

  std::size_t n_south = 0;
  for (const auto& p : u.points)
    if (p.dot(kent_mean) < 0.0) ++n_south;
  const double p_hat = 1.0 - 2.0 * static_cast<double>(n_south) / static_cast<double>(n);
  if (p_hat < 0.0)
    throw std::domain_error(
        "fit_mixture: more than half the points lie on the southern hemisphere; "
        "the Kent-plus-girdle model is inadequate (p would be negative)");

  // Per-point sufficient pieces of both exponents.
  std::vector<double> t1(n), quad(n), wsq(n);
  for (std::size_t i = 0; i < n; ++i) {
    t1[i] = u.points[i].dot(kent_mean);
    const double a = u.points[i].dot(kent_major);
    const double b = u.points[i].dot(kent_minor);
    quad[i] = a * a - b * b;
    const double w = u.points[i].dot(watson_axis);
    wsq[i] = w * w;
  }

  // Parameters: kappa in (0, kappa_max], ovalness fraction b in [0, 1) with
  // beta = b kappa / 2 (keeps the unimodality constraint rectangular), and
  // kappa_w < 0.
  auto log_lik = [&](double p, double kappa, double beta, double kappa_w) {
    const double log_ck = SphericalDensity::kent_log_norm_const(kappa, beta);
    const double log_cw = SphericalDensity::watson_log_norm_const(kappa_w);
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double kent_term = p * std::exp(log_ck + kappa * t1[i] + beta * quad[i]);
      const double watson_term = (1.0 - p) * std::exp(log_cw + kappa_w * wsq[i]);
      const double f = kent_term + watson_term;
      if (!(f > 0.0)) return -1e300;
      ll += std::log(f);
    }
    return ll;
  };

  OptimResult best;
  if (!opts.joint_p) {
    auto objective = [&](const std::vector<double>& v) {
      return log_lik(p_hat, v[0], 0.5 * v[1] * v[0], v[2]);
    };
    best = maximize_box(objective, {1e-6, 0.0, opts.kappa_w_min}, {opts.kappa_max, 0.999, -1e-6},
                        opts.seed, opts.restarts, opts.max_iter, opts.tol);
  } else {
    auto objective = [&](const std::vector<double>& v) {
      return log_lik(v[3], v[0], 0.5 * v[1] * v[0], v[2]);
    };
    best = maximize_box(objective, {1e-6, 0.0, opts.kappa_w_min, 0.0},
                        {opts.kappa_max, 0.999, -1e-6, 1.0}, opts.seed, opts.restarts,
                        opts.max_iter, opts.tol);
  }
  if (!best.converged && !best.boundary_hit)
    throw ConvergenceError("fit_mixture: optimizer failed to converge within the restart budget");

  MixtureFit fit;
  fit.p_hat = opts.joint_p ? best.x[3] : p_hat;
  fit.kappa = best.x[0];
  fit.beta_oval = 0.5 * best.x[1] * best.x[0];
  fit.kappa_w = best.x[2];
  fit.log_likelihood = best.value;
  fit.boundary_hit = best.boundary_hit;
  fit.density = SphericalDensity::mixture(
      fit.p_hat, SphericalDensity::kent(fit.kappa, fit.beta_oval, kent_mean, kent_major, kent_minor),
      SphericalDensity::watson(watson_axis, fit.kappa_w));
  return fit;
}

}  // namespace sphereproc
