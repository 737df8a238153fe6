#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphereproc {

inline constexpr double kPi = std::numbers::pi;

/// Point on the unit sphere S^k, stored as k+1 Cartesian coordinates.
class SpherePoint {
 public:
  /// Builds a sphere point, normalizing the coordinates. Rejects zero or
  /// non-finite vectors. With strict=true the input norm must already be
  /// within 1e-12 of 1.
  explicit SpherePoint(std::vector<double> coords, bool strict = false)
      : coords_(std::move(coords)) {
    if (coords_.size() < 2) throw std::invalid_argument("SpherePoint: need k >= 1 (>= 2 coordinates)");
    double sq = 0.0;
    for (double c : coords_) {
      if (!std::isfinite(c)) throw std::invalid_argument("SpherePoint: non-finite coordinate");
      sq += c * c;
    }
    const double norm = std::sqrt(sq);
    if (norm == 0.0) throw std::invalid_argument("SpherePoint: zero vector");
    if (strict && std::abs(norm - 1.0) > 1e-12)
      throw std::invalid_argument("SpherePoint: norm deviates from 1 by " +
                                  std::to_string(std::abs(norm - 1.0)));
    for (double& c : coords_) c /= norm;
  }

  int sphere_dim() const { return static_cast<int>(coords_.size()) - 1; }
  const std::vector<double>& coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::size_t size() const { return coords_.size(); }

  double dot(const SpherePoint& other) const {
    if (other.size() != size()) throw std::invalid_argument("SpherePoint::dot: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < coords_.size(); ++i) d += coords_[i] * other.coords_[i];
    return d;
  }

  bool operator==(const SpherePoint& other) const { return coords_ == other.coords_; }

 private:
  std::vector<double> coords_;
};

/// Point in R^d.
struct SpatialPoint {
  std::vector<double> coords;

  explicit SpatialPoint(std::vector<double> c) : coords(std::move(c)) {
    if (coords.empty()) throw std::invalid_argument("SpatialPoint: need d >= 1");
  }
  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](std::size_t i) const { return coords[i]; }

  double distance(const SpatialPoint& other) const {
    if (other.coords.size() != coords.size())
      throw std::invalid_argument("SpatialPoint::distance: dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const double diff = coords[i] - other.coords[i];
      sq += diff * diff;
    }
    return std::sqrt(sq);
  }

  bool operator==(const SpatialPoint& other) const { return coords == other.coords; }
};

/// Great-circle distance on S^k, in [0, pi]. The dot product is clamped to
/// [-1, 1] before acos so rounding cannot produce NaN; coordinate-identical
/// points return exactly 0.
inline double geodesic_distance(const SpherePoint& u1, const SpherePoint& u2) {
  if (u1.coords() == u2.coords()) return 0.0;
  return std::acos(std::clamp(u1.dot(u2), -1.0, 1.0));
}

/// Surface measure of S^k: sigma_k = 2 pi^{(k+1)/2} / Gamma((k+1)/2).
inline double sphere_surface_measure(int k) {
  if (k < 1) throw std::invalid_argument("sphere_surface_measure: k must be >= 1");
  const double half = 0.5 * (k + 1);
  return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

/// Volume of the d-ball of radius r: r^d pi^{d/2} / Gamma(1 + d/2).
inline double ball_volume(int d, double r) {
  if (d < 1) throw std::invalid_argument("ball_volume: d must be >= 1");
  if (r < 0.0) throw std::invalid_argument("ball_volume: r must be >= 0");
  return std::pow(r, d) * std::pow(kPi, 0.5 * d) / std::tgamma(1.0 + 0.5 * d);
}

namespace detail {

// Continued fraction for the incomplete beta function (Lentz's method).
inline double beta_cont_frac(double x, double a, double b) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("reg_inc_beta: continued fraction failed to converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double reg_inc_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("reg_inc_beta: x must be in [0, 1]");
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("reg_inc_beta: a, b must be > 0");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log1p(-x) + std::lgamma(a + b) -
                          std::lgamma(a) - std::lgamma(b);
  // The continued fraction converges fast for x below the pivot; use the
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other side.
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(ln_front) * detail::beta_cont_frac(x, a, b) / a;
  return 1.0 - std::exp(ln_front) * detail::beta_cont_frac(1.0 - x, b, a) / b;
}

/// Surface area of the spherical cap {u in S^k : d(u, e) <= s}, evaluated via
/// the two-branch regularized-incomplete-beta form.
inline double cap_measure(int k, double s) {
  if (k < 1) throw std::invalid_argument("cap_measure: k must be >= 1");
  if (!(s >= 0.0 && s <= kPi)) throw std::invalid_argument("cap_measure: s must be in [0, pi]");
  const double sigma_k = sphere_surface_measure(k);
  const double half_k = 0.5 * k;
  if (s <= 0.5 * kPi) {
    const double sn = std::sin(s);
    return 0.5 * sigma_k * reg_inc_beta(sn * sn, half_k, 0.5);
  }
  const double sn = std::sin(kPi - s);
  return 0.5 * sigma_k * (2.0 - reg_inc_beta(sn * sn, half_k, 0.5));
}

}  // namespace sphereproc
