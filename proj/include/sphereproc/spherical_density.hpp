#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphereproc/geometry.hpp"
#include "sphereproc/quadrature.hpp"

namespace sphereproc {

/// Integrates f over S^2 with a tensor rule: Gauss-Legendre in colatitude,
/// uniform (periodic trapezoid) in longitude. The rule is refined until the
/// value changes by less than rel_tol.
template <class F>
double integrate_sphere2(const F& f, double rel_tol = 1e-8) {
  double prev = 0.0;
  bool have_prev = false;
  for (int n_theta = 48; n_theta <= 1536; n_theta *= 2) {
    const int n_lambda = 2 * n_theta;
    const auto rule = gauss_legendre(n_theta, 0.0, kPi);
    double sum = 0.0;
    const double dl = 2.0 * kPi / n_lambda;
    for (int i = 0; i < n_theta; ++i) {
      const double theta = rule.nodes[i];
      const double st = std::sin(theta), ct = std::cos(theta);
      double ring = 0.0;
      for (int j = 0; j < n_lambda; ++j) {
        const double lambda = (j + 0.5) * dl;
        ring += f(st * std::cos(lambda), st * std::sin(lambda), ct);
      }
      sum += rule.weights[i] * st * ring * dl;
    }
    if (have_prev && std::abs(sum - prev) <= rel_tol * std::abs(sum)) return sum;
    prev = sum;
    have_prev = true;
  }
  return prev;
}

/// Parametric density on S^k: uniform (any k), Kent and Watson (k = 2), or a
/// two-component mixture. Construction computes the normalizing constant by
/// quadrature; the evaluated density always integrates to 1.
class SphericalDensity {
 public:
  enum class Kind { Uniform, Kent, Watson, Mixture };

  static SphericalDensity uniform(int k) {
    if (k < 1) throw std::invalid_argument("SphericalDensity::uniform: k must be >= 1");
    SphericalDensity f;
    f.kind_ = Kind::Uniform;
    f.k_ = k;
    f.log_norm_const_ = -std::log(sphere_surface_measure(k));
    return f;
  }

  /// Kent density C_K exp(kappa u.mean + beta ((u.major)^2 - (u.minor)^2)) on
  /// S^2. Requires the unimodality constraint 2 beta < kappa (or kappa =
  /// beta = 0, which degenerates to the uniform density).
  static SphericalDensity kent(double kappa, double beta_oval, const SpherePoint& mean,
                               const SpherePoint& major, const SpherePoint& minor) {
    if (mean.sphere_dim() != 2 || major.sphere_dim() != 2 || minor.sphere_dim() != 2)
      throw std::invalid_argument("SphericalDensity::kent: defined on S^2 only");
    if (kappa < 0.0 || beta_oval < 0.0)
      throw std::invalid_argument("SphericalDensity::kent: kappa and beta must be >= 0");
    if (!(2.0 * beta_oval < kappa) && !(kappa == 0.0 && beta_oval == 0.0))
      throw std::invalid_argument(
          "SphericalDensity::kent: unimodality requires 2*beta_oval < kappa");
    check_orthonormal(mean, major, minor);
    SphericalDensity f;
    f.kind_ = Kind::Kent;
    f.k_ = 2;
    f.kappa_ = kappa;
    f.beta_ = beta_oval;
    f.frame_ = {mean, major, minor};
    // The exponent integral depends on (kappa, beta) only; integrate in the
    // canonical frame.
    const double integral = integrate_sphere2([kappa, beta_oval](double x, double y, double z) {
      return std::exp(kappa * z + beta_oval * (x * x - y * y));
    });
    f.log_norm_const_ = -std::log(integral);
    return f;
  }

  /// Watson density C_W exp(kappa_w (u.axis)^2) on S^2; negative kappa_w
  /// gives a girdle around the great circle perpendicular to the axis.
  static SphericalDensity watson(const SpherePoint& axis, double kappa_w) {
    if (axis.sphere_dim() != 2)
      throw std::invalid_argument("SphericalDensity::watson: defined on S^2 only");
    SphericalDensity f;
    f.kind_ = Kind::Watson;
    f.k_ = 2;
    f.kappa_ = kappa_w;
    f.frame_ = {axis};
    const double integral = integrate_sphere2(
        [kappa_w](double, double, double z) { return std::exp(kappa_w * z * z); });
    f.log_norm_const_ = -std::log(integral);
    return f;
  }

  static SphericalDensity mixture(double p, SphericalDensity first, SphericalDensity second) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("SphericalDensity::mixture: weight p must be in [0, 1]");
    if (first.sphere_dim() != second.sphere_dim())
      throw std::invalid_argument("SphericalDensity::mixture: component dimension mismatch");
    SphericalDensity f;
    f.kind_ = Kind::Mixture;
    f.k_ = first.sphere_dim();
    f.mix_p_ = p;
    f.first_ = std::make_shared<SphericalDensity>(std::move(first));
    f.second_ = std::make_shared<SphericalDensity>(std::move(second));
    f.log_norm_const_ = 0.0;  // components are normalized already
    return f;
  }

  /// log C_K for the Kent exponent parameters (no frame needed).
  static double kent_log_norm_const(double kappa, double beta_oval) {
    const double integral = integrate_sphere2([kappa, beta_oval](double x, double y, double z) {
      return std::exp(kappa * z + beta_oval * (x * x - y * y));
    });
    return -std::log(integral);
  }

  /// log C_W for the Watson concentration.
  static double watson_log_norm_const(double kappa_w) {
    const double integral = integrate_sphere2(
        [kappa_w](double, double, double z) { return std::exp(kappa_w * z * z); });
    return -std::log(integral);
  }

  Kind kind() const { return kind_; }
  int sphere_dim() const { return k_; }
  double log_norm_const() const { return log_norm_const_; }
  double norm_const() const { return std::exp(log_norm_const_); }
  double kappa() const { return kappa_; }
  double beta_oval() const { return beta_; }
  double mixture_weight() const { return mix_p_; }
  const SphericalDensity& first() const { return *first_; }
  const SphericalDensity& second() const { return *second_; }
  const std::vector<SpherePoint>& frame() const { return frame_; }

  /// Normalized density value at u.
  double operator()(const SpherePoint& u) const {
    if (u.sphere_dim() != k_)
      throw std::invalid_argument("SphericalDensity: dimension mismatch in evaluation");
    switch (kind_) {
      case Kind::Uniform:
        return std::exp(log_norm_const_);
      case Kind::Kent: {
        const double t1 = u.dot(frame_[0]);
        const double t2 = u.dot(frame_[1]);
        const double t3 = u.dot(frame_[2]);
        return std::exp(log_norm_const_ + kappa_ * t1 + beta_ * (t2 * t2 - t3 * t3));
      }
      case Kind::Watson: {
        const double t = u.dot(frame_[0]);
        return std::exp(log_norm_const_ + kappa_ * t * t);
      }
      case Kind::Mixture:
        return mix_p_ * (*first_)(u) + (1.0 - mix_p_) * (*second_)(u);
    }
    return 0.0;
  }

  /// Upper bound on the density over the sphere (used as a rejection
  /// envelope).
  double sup_bound() const {
    switch (kind_) {
      case Kind::Uniform:
        return std::exp(log_norm_const_);
      case Kind::Kent:
        // Under 2 beta < kappa the exponent kappa cos(th) + beta sin^2(th)
        // cos(2 lam) is maximized at the mean direction, where it equals
        // kappa.
        return std::exp(log_norm_const_ + kappa_);
      case Kind::Watson:
        return std::exp(log_norm_const_ + std::max(kappa_, 0.0));
      case Kind::Mixture:
        return mix_p_ * first_->sup_bound() + (1.0 - mix_p_) * second_->sup_bound();
    }
    return 0.0;
  }

 private:
  SphericalDensity() = default;

  static void check_orthonormal(const SpherePoint& a, const SpherePoint& b,
                                const SpherePoint& c) {
    const double tol = 1e-9;
    if (std::abs(a.dot(b)) > tol || std::abs(a.dot(c)) > tol || std::abs(b.dot(c)) > tol)
      throw std::invalid_argument("SphericalDensity::kent: frame vectors are not orthogonal");
  }

  Kind kind_ = Kind::Uniform;
  int k_ = 2;
  double kappa_ = 0.0;
  double beta_ = 0.0;
  double mix_p_ = 0.0;
  double log_norm_const_ = 0.0;
  std::vector<SpherePoint> frame_;
  std::shared_ptr<SphericalDensity> first_;
  std::shared_ptr<SphericalDensity> second_;
};

inline double density_eval(const SphericalDensity& f, const SpherePoint& u) { return f(u); }
inline double density_norm_const(const SphericalDensity& f) { return f.norm_const(); }

}  // namespace sphereproc
