#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sphereproc/geometry.hpp"
#include "sphereproc/log.hpp"
#include "sphereproc/model.hpp"
#include "sphereproc/pattern.hpp"
#include "sphereproc/rng.hpp"
#include "sphereproc/spherical_density.hpp"

namespace sphereproc {

// ---------------------------------------------------------------------------
// Sphere node sets and partitions

/// Quasi-uniform nodes on S^k with positive weights summing to sigma_k.
struct SphereNodeSet {
  int k = 2;
  std::vector<SpherePoint> nodes;
  std::vector<double> weights;
};

/// Fibonacci-lattice nodes (k = 2) or equally spaced angles (k = 1).
inline SphereNodeSet fibonacci_sphere_nodes(int k, int n) {
  if (n < 2) throw std::invalid_argument("fibonacci_sphere_nodes: need n >= 2");
  SphereNodeSet out;
  out.k = k;
  const double sigma = sphere_surface_measure(k);
  if (k == 1) {
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * kPi * (i + 0.5) / n;
      out.nodes.push_back(SpherePoint({std::cos(a), std::sin(a)}));
      out.weights.push_back(sigma / n);
    }
    return out;
  }
  if (k != 2) throw std::invalid_argument("fibonacci_sphere_nodes: supported for k = 1, 2");
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden * i;
    out.nodes.push_back(SpherePoint({rho * std::cos(a), rho * std::sin(a), z}));
    out.weights.push_back(sigma / n);
  }
  return out;
}

/// One cell of an equal-area-style partition of S^2 (colatitude band cut into
/// longitude sectors) or of S^1 (an arc; the z bounds are unused).
struct SphereCell {
  double z_lo = -1.0, z_hi = 1.0;   ///< cos(colatitude) bounds, z_lo < z_hi
  double lam_lo = 0.0, lam_hi = 0.0;  ///< longitude bounds
  double area = 0.0;
  SpherePoint center{{0.0, 0.0, 1.0}};
};

struct SpherePartition {
  int k = 2;
  std::vector<SphereCell> cells;

  double total_area() const {
    double s = 0.0;
    for (const auto& c : cells) s += c.area;
    return s;
  }
};

/// Partition of S^k (k = 1 or 2) into cells of roughly equal area with
/// angular extent close to `target_extent` radians, capped at `max_cells`
/// cells (the extent grows and a warning is emitted if the cap binds).
inline SpherePartition equal_area_partition(int k, double target_extent, int max_cells = 4096) {
  if (!(target_extent > 0.0))
    throw std::invalid_argument("equal_area_partition: target extent must be > 0");
  if (max_cells < 2) throw std::invalid_argument("equal_area_partition: max_cells must be >= 2");
  SpherePartition part;
  part.k = k;
  if (k == 1) {
    int m = std::max(2, static_cast<int>(std::ceil(2.0 * kPi / target_extent)));
    if (m > max_cells) {
      log_warning("equal_area_partition: cell budget " + std::to_string(max_cells) +
                  " caps the requested resolution on S^1");
      m = max_cells;
    }
    for (int j = 0; j < m; ++j) {
      SphereCell cell;
      cell.lam_lo = 2.0 * kPi * j / m;
      cell.lam_hi = 2.0 * kPi * (j + 1) / m;
      cell.area = 2.0 * kPi / m;
      const double a = 0.5 * (cell.lam_lo + cell.lam_hi);
      cell.center = SpherePoint({std::cos(a), std::sin(a)});
      part.cells.push_back(cell);
    }
    return part;
  }
  if (k != 2) throw std::invalid_argument("equal_area_partition: supported for k = 1, 2");

  auto build = [](double extent) {
    std::vector<SphereCell> cells;
    const int n_bands = std::max(1, static_cast<int>(std::round(kPi / extent)));
    for (int b = 0; b < n_bands; ++b) {
      const double th_lo = kPi * b / n_bands;
      const double th_hi = kPi * (b + 1) / n_bands;
      const double band_mid = 0.5 * (th_lo + th_hi);
      const int m = std::max(1, static_cast<int>(std::round(2.0 * kPi * std::sin(band_mid) / extent)));
      const double z_hi = std::cos(th_lo);
      const double z_lo = std::cos(th_hi);
      for (int j = 0; j < m; ++j) {
        SphereCell cell;
        cell.z_lo = z_lo;
        cell.z_hi = z_hi;
        cell.lam_lo = 2.0 * kPi * j / m;
        cell.lam_hi = 2.0 * kPi * (j + 1) / m;
        cell.area = (z_hi - z_lo) * 2.0 * kPi / m;
        const double zc = 0.5 * (z_lo + z_hi);
        const double rc = std::sqrt(std::max(0.0, 1.0 - zc * zc));
        const double lc = 0.5 * (cell.lam_lo + cell.lam_hi);
        cell.center = SpherePoint({rc * std::cos(lc), rc * std::sin(lc), zc});
        cells.push_back(cell);
      }
    }
    return cells;
  };

  double extent = target_extent;
  auto cells = build(extent);
  if (static_cast<int>(cells.size()) > max_cells) {
    extent = target_extent * std::sqrt(static_cast<double>(cells.size()) / max_cells);
    cells = build(extent);
    while (static_cast<int>(cells.size()) > max_cells) {
      extent *= 1.05;
      cells = build(extent);
    }
    log_warning("equal_area_partition: cell budget " + std::to_string(max_cells) +
                " caps the requested resolution (extent " + std::to_string(target_extent) +
                " -> " + std::to_string(extent) + ")");
  }
  part.cells = std::move(cells);
  return part;
}

// ---------------------------------------------------------------------------
// Elementary samplers

inline SpherePoint uniform_sphere_point(int k, std::mt19937_64& eng) {
  std::normal_distribution<double> gauss;
  for (;;) {
    std::vector<double> v(k + 1);
    double sq = 0.0;
    for (auto& c : v) {
      c = gauss(eng);
      sq += c * c;
    }
    if (sq > 1e-24) return SpherePoint(std::move(v));
  }
}

inline SpatialPoint uniform_in_window(const BoxWindow& w, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> y(w.dim());
  for (int a = 0; a < w.dim(); ++a) y[a] = w.lower[a] + w.side(a) * unif(eng);
  return SpatialPoint(std::move(y));
}

/// Uniform point within a partition cell (exact: z uniform within the band,
/// longitude uniform within the sector).
inline SpherePoint uniform_in_cell(const SphereCell& cell, int k, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (k == 1) {
    const double a = cell.lam_lo + (cell.lam_hi - cell.lam_lo) * unif(eng);
    return SpherePoint({std::cos(a), std::sin(a)});
  }
  const double z = cell.z_lo + (cell.z_hi - cell.z_lo) * unif(eng);
  const double lam = cell.lam_lo + (cell.lam_hi - cell.lam_lo) * unif(eng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return SpherePoint({r * std::cos(lam), r * std::sin(lam), z});
}

namespace detail {

inline void orthonormal_complement(const std::vector<double>& mu, std::vector<double>& e1,
                                   std::vector<double>& e2) {
  // mu is a unit 3-vector; build two unit vectors orthogonal to it.
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (std::abs(mu[i]) < std::abs(mu[smallest])) smallest = i;
  std::vector<double> axis(3, 0.0);
  axis[smallest] = 1.0;
  e1 = {mu[1] * axis[2] - mu[2] * axis[1], mu[2] * axis[0] - mu[0] * axis[2],
        mu[0] * axis[1] - mu[1] * axis[0]};
  double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  for (auto& c : e1) c /= n1;
  e2 = {mu[1] * e1[2] - mu[2] * e1[1], mu[2] * e1[0] - mu[0] * e1[2],
        mu[0] * e1[1] - mu[1] * e1[0]};
}

}  // namespace detail

/// von Mises-Fisher draw around mu with concentration kappa (k = 2: inverse
/// CDF of the cosine; k = 1: wrapped rejection sampler).
inline SpherePoint vmf_sample(const SpherePoint& mu, double kappa, std::mt19937_64& eng) {
  if (!(kappa > 0.0)) throw std::invalid_argument("vmf_sample: kappa must be > 0");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int k = mu.sphere_dim();
  if (k == 2) {
    const double xi = unif(eng);
    // cos(theta) = 1 + log(xi + (1 - xi) e^{-2 kappa}) / kappa
    const double w = 1.0 + std::log(xi + (1.0 - xi) * std::exp(-2.0 * kappa)) / kappa;
    const double r = std::sqrt(std::max(0.0, 1.0 - w * w));
    const double ang = 2.0 * kPi * unif(eng);
    std::vector<double> e1, e2;
    detail::orthonormal_complement(mu.coords(), e1, e2);
    std::vector<double> v(3);
    for (int i = 0; i < 3; ++i)
      v[i] = w * mu[i] + r * (std::cos(ang) * e1[i] + std::sin(ang) * e2[i]);
    return SpherePoint(std::move(v));
  }
  if (k == 1) {
    // von Mises on the circle via Best-Fisher rejection.
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double rr = (1.0 + rho * rho) / (2.0 * rho);
    const double mu_ang = std::atan2(mu[1], mu[0]);
    for (;;) {
      const double z = std::cos(kPi * unif(eng));
      const double f = (1.0 + rr * z) / (rr + z);
      const double c = kappa * (rr - f);
      const double u = unif(eng);
      if (c * (2.0 - c) - u > 0.0 || std::log(c / u) + 1.0 - c >= 0.0) {
        const double sign = unif(eng) < 0.5 ? -1.0 : 1.0;
        const double a = mu_ang + sign * std::acos(std::clamp(f, -1.0, 1.0));
        return SpherePoint({std::cos(a), std::sin(a)});
      }
    }
  }
  throw std::invalid_argument("vmf_sample: supported for k = 1, 2");
}

/// IID draws from a spherical density by rejection from the uniform law with
/// the density's sup bound as envelope.
inline std::vector<SpherePoint> sample_density(const SphericalDensity& f, std::size_t n,
                                               std::mt19937_64& eng) {
  std::vector<SpherePoint> out;
  out.reserve(n);
  const double bound = f.sup_bound();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (out.size() < n) {
    auto u = uniform_sphere_point(f.sphere_dim(), eng);
    if (unif(eng) * bound <= f(u)) out.push_back(std::move(u));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Poisson processes

/// Homogeneous Poisson process with intensity rho (with respect to the
/// product measure) on W x S^k.
inline SpaceSpherePattern sim_poisson(double rho, const BoxWindow& window, int k,
                                      const RngSeed& seed) {
  if (rho < 0.0) throw std::invalid_argument("sim_poisson: rho must be >= 0");
  auto eng = make_engine(seed);
  const double mean = rho * window.volume() * sphere_surface_measure(k);
  std::poisson_distribution<long> count_dist(mean);
  const long n = mean > 0.0 ? count_dist(eng) : 0;
  std::vector<SpatialPoint> ys;
  std::vector<SpherePoint> us;
  ys.reserve(n);
  us.reserve(n);
  for (long i = 0; i < n; ++i) {
    ys.push_back(uniform_in_window(window, eng));
    us.push_back(uniform_sphere_point(k, eng));
  }
  return SpaceSpherePattern(window, k, std::move(ys), std::move(us));
}

/// Inhomogeneous Poisson process by dominated thinning: a homogeneous
/// proposal with intensity `bound` is retained with probability rho/bound.
/// Aborts if the caller-supplied bound is violated at any proposal.
inline SpaceSpherePattern sim_poisson(
    const std::function<double(const SpatialPoint&, const SpherePoint&)>& rho,
    const BoxWindow& window, int k, double bound, const RngSeed& seed) {
  if (!(bound > 0.0)) throw std::invalid_argument("sim_poisson: bound must be > 0");
  auto eng = make_engine(seed);
  const double mean = bound * window.volume() * sphere_surface_measure(k);
  std::poisson_distribution<long> count_dist(mean);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const long n = count_dist(eng);
  std::vector<SpatialPoint> ys;
  std::vector<SpherePoint> us;
  for (long i = 0; i < n; ++i) {
    auto y = uniform_in_window(window, eng);
    auto u = uniform_sphere_point(k, eng);
    const double value = rho(y, u);
    if (value < 0.0) throw std::domain_error("sim_poisson: negative intensity at a proposal");
    if (value > bound)
      throw std::domain_error("sim_poisson: intensity " + std::to_string(value) +
                              " exceeds the dominating bound " + std::to_string(bound));
    if (unif(eng) * bound <= value) {
      ys.push_back(std::move(y));
      us.push_back(std::move(u));
    }
  }
  return SpaceSpherePattern(window, k, std::move(ys), std::move(us));
}

// ---------------------------------------------------------------------------
// Gaussian random fields

/// Exact stationary zero-mean unit-variance field with covariance
/// exp(-|t_i - t_j|/phi) on a sorted 1-D grid (Markov construction).
inline std::vector<double> sim_grf_interval(double phi, const std::vector<double>& grid,
                                            std::mt19937_64& eng) {
  if (!(phi > 0.0)) throw std::invalid_argument("sim_grf_interval: phi must be > 0");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("sim_grf_interval: grid must be sorted");
  std::normal_distribution<double> gauss;
  std::vector<double> z(grid.size());
  if (grid.empty()) return z;
  z[0] = gauss(eng);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = std::exp(-(grid[i] - grid[i - 1]) / phi);
    z[i] = a * z[i - 1] + std::sqrt(1.0 - a * a) * gauss(eng);
  }
  return z;
}

/// Lower Cholesky factor of C with a diagonal jitter ladder: starts at
/// 1e-12 trace/n and multiplies by 10 up to five retries.
inline Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& c) {
  const auto n = c.rows();
  double jitter = 0.0;
  const double base = 1e-12 * c.trace() / static_cast<double>(n);
  for (int attempt = 0; attempt <= 5; ++attempt) {
    Eigen::MatrixXd work = c;
    if (attempt > 0) {
      jitter = base * std::pow(10.0, attempt - 1);
      work.diagonal().array() += jitter;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      if (attempt > 1)
        log_warning("cholesky_with_jitter: needed diagonal jitter " + std::to_string(jitter));
      return llt.matrixL();
    }
  }
  throw std::runtime_error("cholesky_with_jitter: factorization failed after maximum jitter");
}

inline Eigen::MatrixXd geodesic_exp_covariance(const std::vector<SpherePoint>& nodes,
                                               double phi) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-geodesic_distance(nodes[i], nodes[j]) / phi);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

inline Eigen::MatrixXd euclidean_exp_covariance(const std::vector<SpatialPoint>& nodes,
                                                double phi) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-nodes[i].distance(nodes[j]) / phi);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

/// Zero-mean field on sphere nodes with covariance exp(-d(u_i,u_j)/phi), by
/// dense Cholesky. For repeated draws construct the factor once.
class SphereGrfSampler {
 public:
  SphereGrfSampler(double phi, std::vector<SpherePoint> nodes, int max_nodes = 4096)
      : nodes_(std::move(nodes)) {
    if (!(phi > 0.0)) throw std::invalid_argument("SphereGrfSampler: phi must be > 0");
    if (nodes_.size() < 2) throw std::invalid_argument("SphereGrfSampler: need >= 2 nodes");
    if (static_cast<int>(nodes_.size()) > max_nodes)
      throw std::invalid_argument("SphereGrfSampler: node count exceeds configured maximum " +
                                  std::to_string(max_nodes));
    chol_ = cholesky_with_jitter(geodesic_exp_covariance(nodes_, phi));
  }

  const std::vector<SpherePoint>& nodes() const { return nodes_; }
  const Eigen::MatrixXd& factor() const { return chol_; }

  std::vector<double> draw(std::mt19937_64& eng) const {
    std::normal_distribution<double> gauss;
    Eigen::VectorXd eps(chol_.rows());
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = gauss(eng);
    Eigen::VectorXd z = chol_ * eps;
    return std::vector<double>(z.data(), z.data() + z.size());
  }

 private:
  std::vector<SpherePoint> nodes_;
  Eigen::MatrixXd chol_;
};

inline std::vector<double> sim_grf_sphere(double phi, const std::vector<SpherePoint>& nodes,
                                          std::mt19937_64& eng, int max_nodes = 4096) {
  return SphereGrfSampler(phi, nodes, max_nodes).draw(eng);
}

/// Field values on a product grid: spatial nodes x sphere nodes.
struct FieldGrid {
  std::vector<SpatialPoint> spatial_nodes;
  SphereNodeSet sphere_nodes;
  Eigen::MatrixXd values;  ///< (spatial index, sphere index)
};

/// Separable-covariance product field c3 = c1 c2 via the tensor identity
/// Z = L1 E L2^T with E an IID standard normal matrix.
class ProductGrfSampler {
 public:
  ProductGrfSampler(double phi1, double phi2, std::vector<SpatialPoint> spatial_nodes,
                    SphereNodeSet sphere_nodes, int max_nodes = 4096)
      : spatial_nodes_(std::move(spatial_nodes)), sphere_nodes_(std::move(sphere_nodes)) {
    if (spatial_nodes_.size() < 2 || sphere_nodes_.nodes.size() < 2)
      throw std::invalid_argument("ProductGrfSampler: need >= 2 nodes per factor");
    for (double w : sphere_nodes_.weights)
      if (!(w > 0.0)) throw std::invalid_argument("ProductGrfSampler: node weights must be > 0");
    if (static_cast<int>(sphere_nodes_.nodes.size()) > max_nodes ||
        static_cast<int>(spatial_nodes_.size()) > max_nodes)
      throw std::invalid_argument("ProductGrfSampler: node count exceeds configured maximum");
    l1_ = cholesky_with_jitter(euclidean_exp_covariance(spatial_nodes_, phi1));
    l2_ = cholesky_with_jitter(geodesic_exp_covariance(sphere_nodes_.nodes, phi2));
  }

  FieldGrid draw(std::mt19937_64& eng) const {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd e(l1_.rows(), l2_.rows());
    for (Eigen::Index i = 0; i < e.rows(); ++i)
      for (Eigen::Index j = 0; j < e.cols(); ++j) e(i, j) = gauss(eng);
    FieldGrid out;
    out.spatial_nodes = spatial_nodes_;
    out.sphere_nodes = sphere_nodes_;
    out.values = l1_ * e * l2_.transpose();
    return out;
  }

 private:
  std::vector<SpatialPoint> spatial_nodes_;
  SphereNodeSet sphere_nodes_;
  Eigen::MatrixXd l1_, l2_;
};

inline FieldGrid sim_grf_product(double phi1, double phi2,
                                 const std::vector<SpatialPoint>& spatial_nodes,
                                 const SphereNodeSet& sphere_nodes, std::mt19937_64& eng) {
  return ProductGrfSampler(phi1, phi2, spatial_nodes, sphere_nodes).draw(eng);
}

// ---------------------------------------------------------------------------
// Log Gaussian Cox process

/// Discretization policy for the LGCP driving field. Non-positive targets
/// select the defaults phi1/4 and phi2/4; the node caps bind first and emit
/// a warning (escalatable to an error).
struct LgcpGridSpec {
  double spatial_cell_target = 0.0;
  double sphere_cell_target = 0.0;
  int max_spatial_cells = 4096;
  int max_sphere_cells = 4096;
  bool error_on_coarse = false;
};

/// Piecewise-constant-intensity LGCP simulator on W x S^k. The driving field
/// Z = alpha + sigma1 Z1(y) + sigma2 Z2(u) + delta Z3(y, u) is drawn on a
/// product grid of spatial boxes and equal-area sphere cells; conditional on
/// the field each cell receives a Poisson count placed uniformly in the cell.
class LgcpSimulator {
 public:
  LgcpSimulator(double rho, const LgcpCovariance& cov, BoxWindow window, int k,
                const LgcpGridSpec& spec = {})
      : rho_(rho), cov_(cov), window_(std::move(window)), k_(k) {
    if (!(rho >= 0.0)) throw std::invalid_argument("LgcpSimulator: rho must be >= 0");

    double spatial_target = spec.spatial_cell_target > 0.0 ? spec.spatial_cell_target
                                                           : cov.phi1 / 4.0;
    const double sphere_target = spec.sphere_cell_target > 0.0 ? spec.sphere_cell_target
                                                               : cov.phi2 / 4.0;

    // Spatial axis-aligned grid, capped in total cell count.
    const int d = window_.dim();
    cells_per_axis_.resize(d);
    for (;;) {
      long total = 1;
      for (int a = 0; a < d; ++a) {
        cells_per_axis_[a] =
            std::max(1, static_cast<int>(std::ceil(window_.side(a) / spatial_target)));
        total *= cells_per_axis_[a];
      }
      if (total <= spec.max_spatial_cells) break;
      spatial_target *= 1.3;
    }
    double worst_extent = 0.0;
    for (int a = 0; a < d; ++a)
      worst_extent = std::max(worst_extent, window_.side(a) / cells_per_axis_[a]);
    if (worst_extent > cov.phi1 / 4.0 * (1.0 + 1e-9)) {
      const std::string msg = "LgcpSimulator: spatial cells of extent " +
                              std::to_string(worst_extent) + " do not resolve phi1/4 = " +
                              std::to_string(cov.phi1 / 4.0);
      if (spec.error_on_coarse) throw std::invalid_argument(msg);
      log_warning(msg);
    }
    long n_spatial = 1;
    for (int a = 0; a < d; ++a) n_spatial *= cells_per_axis_[a];
    spatial_centers_.reserve(n_spatial);
    std::vector<int> idx(d, 0);
    for (long c = 0; c < n_spatial; ++c) {
      std::vector<double> center(d);
      long rem = c;
      for (int a = d - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rem % cells_per_axis_[a]);
        rem /= cells_per_axis_[a];
      }
      for (int a = 0; a < d; ++a)
        center[a] = window_.lower[a] + (idx[a] + 0.5) * window_.side(a) / cells_per_axis_[a];
      spatial_centers_.emplace_back(std::move(center));
    }
    spatial_cell_volume_ = window_.volume() / static_cast<double>(n_spatial);

    partition_ = equal_area_partition(k_, sphere_target, spec.max_sphere_cells);
    {
      // Cell extent check: compare the typical cell diameter to phi2/4.
      const double mean_area = partition_.total_area() / partition_.cells.size();
      const double extent = std::sqrt(mean_area);
      if (extent > cov.phi2 / 4.0 * (1.0 + 1e-9)) {
        const std::string msg = "LgcpSimulator: sphere cells of extent " +
                                std::to_string(extent) + " do not resolve phi2/4 = " +
                                std::to_string(cov.phi2 / 4.0);
        if (spec.error_on_coarse) throw std::invalid_argument(msg);
        log_warning(msg);
      }
    }
    sphere_centers_.reserve(partition_.cells.size());
    for (const auto& cell : partition_.cells) sphere_centers_.push_back(cell.center);

    if (cov_.sigma2 > 0.0 || cov_.delta > 0.0)
      sphere_chol_ = cholesky_with_jitter(geodesic_exp_covariance(sphere_centers_, cov_.phi2));
    if (cov_.delta > 0.0)
      spatial_chol_ = cholesky_with_jitter(euclidean_exp_covariance(spatial_centers_, cov_.phi1));
  }

  const BoxWindow& window() const { return window_; }
  std::size_t spatial_cell_count() const { return spatial_centers_.size(); }
  std::size_t sphere_cell_count() const { return partition_.cells.size(); }

  SpaceSpherePattern simulate(const RngSeed& seed) const {
    auto eng = make_engine(seed);
    std::normal_distribution<double> gauss;
    const std::size_t n1 = spatial_centers_.size();
    const std::size_t n2 = partition_.cells.size();
    const int d = window_.dim();

    std::vector<double> z1(n1, 0.0);
    if (cov_.sigma1 > 0.0) {
      if (d == 1) {
        std::vector<double> grid(n1);
        for (std::size_t i = 0; i < n1; ++i) grid[i] = spatial_centers_[i][0];
        z1 = sim_grf_interval(cov_.phi1, grid, eng);
      } else {
        // Dense factor for multi-dimensional windows.
        Eigen::MatrixXd l =
            cholesky_with_jitter(euclidean_exp_covariance(spatial_centers_, cov_.phi1));
        Eigen::VectorXd eps(l.rows());
        for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = gauss(eng);
        Eigen::VectorXd z = l * eps;
        for (std::size_t i = 0; i < n1; ++i) z1[i] = z(static_cast<Eigen::Index>(i));
      }
    }

    std::vector<double> z2(n2, 0.0);
    if (cov_.sigma2 > 0.0) {
      Eigen::VectorXd eps(sphere_chol_.rows());
      for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = gauss(eng);
      Eigen::VectorXd z = sphere_chol_ * eps;
      for (std::size_t j = 0; j < n2; ++j) z2[j] = z(static_cast<Eigen::Index>(j));
    }

    Eigen::MatrixXd z3;
    if (cov_.delta > 0.0) {
      Eigen::MatrixXd e(spatial_chol_.rows(), sphere_chol_.rows());
      for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j) e(i, j) = gauss(eng);
      z3 = spatial_chol_ * e * sphere_chol_.transpose();
    }

    const double alpha = cov_.alpha();
    std::vector<SpatialPoint> ys;
    std::vector<SpherePoint> us;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t j = 0; j < n2; ++j) {
        double z = alpha + cov_.sigma1 * z1[i] + cov_.sigma2 * z2[j];
        if (cov_.delta > 0.0)
          z += cov_.delta * z3(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double mean =
            rho_ * std::exp(z) * spatial_cell_volume_ * partition_.cells[j].area;
        if (!(mean > 0.0)) continue;
        std::poisson_distribution<long> count(mean);
        const long m = count(eng);
        for (long p = 0; p < m; ++p) {
          ys.push_back(point_in_spatial_cell(i, unif, eng));
          us.push_back(uniform_in_cell(partition_.cells[j], k_, eng));
        }
      }
    }
    return SpaceSpherePattern(window_, k_, std::move(ys), std::move(us));
  }

 private:
  SpatialPoint point_in_spatial_cell(std::size_t cell,
                                     std::uniform_real_distribution<double>& unif,
                                     std::mt19937_64& eng) const {
    const int d = window_.dim();
    std::vector<double> y(d);
    long rem = static_cast<long>(cell);
    for (int a = d - 1; a >= 0; --a) {
      const int ia = static_cast<int>(rem % cells_per_axis_[a]);
      rem /= cells_per_axis_[a];
      const double width = window_.side(a) / cells_per_axis_[a];
      y[a] = window_.lower[a] + (ia + unif(eng)) * width;
    }
    return SpatialPoint(std::move(y));
  }

  double rho_;
  LgcpCovariance cov_;
  BoxWindow window_;
  int k_;
  std::vector<int> cells_per_axis_;
  std::vector<SpatialPoint> spatial_centers_;
  double spatial_cell_volume_ = 0.0;
  SpherePartition partition_;
  std::vector<SpherePoint> sphere_centers_;
  Eigen::MatrixXd sphere_chol_;
  Eigen::MatrixXd spatial_chol_;
};

inline SpaceSpherePattern sim_lgcp(double rho, const LgcpCovariance& cov, const BoxWindow& window,
                                   int k, const RngSeed& seed, const LgcpGridSpec& spec = {}) {
  return LgcpSimulator(rho, cov, window, k, spec).simulate(seed);
}

// ---------------------------------------------------------------------------
// Shot noise Cox process

/// SNCP draw: Poisson parents on a spatially buffered window, Gamma marks
/// with moments (m1, m2), Poisson(gamma) offspring per parent displaced by
/// the factorized Gaussian x vMF kernel; offspring outside W are discarded.
inline SpaceSpherePattern sim_sncp(const SncpParams& params, const BoxWindow& window, int k,
                                   const RngSeed& seed, double buffer_sds = 5.0) {
  if (window.dim() != params.d)
    throw std::invalid_argument("sim_sncp: window dimension disagrees with params.d");
  if (k != params.k) throw std::invalid_argument("sim_sncp: k disagrees with params.k");
  auto eng = make_engine(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<double> lo = window.lower, hi = window.upper;
  for (int a = 0; a < params.d; ++a) {
    lo[a] -= buffer_sds * params.omega;
    hi[a] += buffer_sds * params.omega;
  }
  const BoxWindow buffered(lo, hi);

  const double parent_mean =
      params.alpha_parent * buffered.volume() * sphere_surface_measure(k);
  std::poisson_distribution<long> parent_count(parent_mean);
  const long n_parents = parent_count(eng);

  // Gamma marks matching the two moments; m2 = m1^2 degenerates to a
  // deterministic mark.
  const double var = params.m2 - params.m1 * params.m1;
  const bool deterministic_mark = var <= 1e-12 * params.m1 * params.m1;
  const double scale = deterministic_mark ? 0.0 : var / params.m1;
  const double shape = deterministic_mark ? 0.0 : params.m1 / scale;

  std::vector<SpatialPoint> ys;
  std::vector<SpherePoint> us;
  for (long p = 0; p < n_parents; ++p) {
    const auto parent_y = uniform_in_window(buffered, eng);
    const auto parent_u = uniform_sphere_point(k, eng);
    double mark = params.m1;
    if (!deterministic_mark) {
      std::gamma_distribution<double> gamma(shape, scale);
      mark = gamma(eng);
    }
    if (!(mark > 0.0)) continue;
    std::poisson_distribution<long> offspring_count(mark);
    const long m = offspring_count(eng);
    for (long o = 0; o < m; ++o) {
      std::vector<double> y(params.d);
      for (int a = 0; a < params.d; ++a) y[a] = parent_y[a] + params.omega * gauss(eng);
      SpatialPoint yp(std::move(y));
      if (!window.contains(yp)) continue;
      ys.push_back(std::move(yp));
      us.push_back(vmf_sample(parent_u, params.kappa_c, eng));
    }
  }
  return SpaceSpherePattern(window, k, std::move(ys), std::move(us));
}

// ---------------------------------------------------------------------------
// Thinning and mark permutation

/// Independent thinning with a pointwise retention probability in [0, 1].
inline SpaceSpherePattern thin(
    const SpaceSpherePattern& x,
    const std::function<double(const SpatialPoint&, const SpherePoint&)>& retention,
    const RngSeed& seed) {
  auto eng = make_engine(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<SpatialPoint> ys;
  std::vector<SpherePoint> us;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = retention(x.spatial_at(i), x.direction_at(i));
    if (!(p >= 0.0 && p <= 1.0))
      throw std::domain_error("thin: retention outside [0, 1] at point " + std::to_string(i));
    if (unif(eng) <= p) {
      ys.push_back(x.spatial_at(i));
      us.push_back(x.direction_at(i));
    }
  }
  return SpaceSpherePattern(x.window(), x.sphere_dim(), std::move(ys), std::move(us));
}

/// Keeps the locations fixed and applies a uniform random permutation to the
/// spherical components.
inline SpaceSpherePattern permute_marks(const SpaceSpherePattern& x, const RngSeed& seed) {
  auto eng = make_engine(seed);
  std::vector<SpherePoint> us(x.directions());
  std::shuffle(us.begin(), us.end(), eng);
  return SpaceSpherePattern(x.window(), x.sphere_dim(), x.spatial(), std::move(us));
}

}  // namespace sphereproc
