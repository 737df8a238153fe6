#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sphereproc/geometry.hpp"
#include "sphereproc/quadrature.hpp"
#include "sphereproc/summaries.hpp"

namespace sphereproc {

// ---------------------------------------------------------------------------
// Poisson K-functions

struct PoissonKParams {
  int d = 1;
  int k = 2;

  PoissonKParams(int dd, int kk) : d(dd), k(kk) {
    if (d < 1 || k < 1) throw std::invalid_argument("PoissonKParams: need d >= 1 and k >= 1");
  }
};

/// Spatial K-function of a Poisson process: volume of the r-ball.
inline double k1_pois(int d, double r) { return ball_volume(d, r); }

/// Spherical K-function of a Poisson process: area of the s-cap.
inline double k2_pois(int k, double s) { return cap_measure(k, s); }

/// Space-sphere K-function of a Poisson process: ball volume times cap area.
inline double k_pois(const PoissonKParams& p, double r, double s) {
  if (r < 0.0) throw std::invalid_argument("k_pois: r must be >= 0");
  return ball_volume(p.d, r) * cap_measure(p.k, s);
}

// ---------------------------------------------------------------------------
// Log Gaussian Cox process with exponential factor covariances

/// Covariance parameters of the driving Gaussian field
/// Z = alpha + sigma1 Z1(y) + sigma2 Z2(u) + delta Z3(y, u), with
/// c1 = exp(-||y1-y2||/phi1), c2 = exp(-d(u1,u2)/phi2), c3 = c1 c2 and
/// alpha = -(sigma1^2 + sigma2^2 + delta^2)/2 so exp(Z) has unit mean.
struct LgcpCovariance {
  double sigma1 = 0.0;
  double phi1 = 1.0;
  double sigma2 = 0.0;
  double phi2 = 1.0;
  double delta = 0.0;

  LgcpCovariance(double s1, double p1, double s2, double p2, double del = 0.0)
      : sigma1(s1), phi1(p1), sigma2(s2), phi2(p2), delta(del) {
    if (sigma1 < 0.0 || sigma2 < 0.0 || delta < 0.0)
      throw std::invalid_argument("LgcpCovariance: sigmas and delta must be >= 0");
    if (!(phi1 > 0.0) || !(phi2 > 0.0))
      throw std::invalid_argument("LgcpCovariance: correlation lengths must be > 0");
  }

  double alpha() const {
    return -0.5 * (sigma1 * sigma1 + sigma2 * sigma2 + delta * delta);
  }

  /// Covariance of Z at spatial lag t >= 0 and geodesic lag w.
  double c0(double t, double w) const {
    const double c1 = std::exp(-t / phi1);
    const double c2 = std::exp(-w / phi2);
    return sigma1 * sigma1 * c1 + sigma2 * sigma2 * c2 + delta * delta * c1 * c2;
  }
};

/// Pair correlation function of the LGCP, g0 = exp(c0), as a function of the
/// spatial lag vector and the geodesic lag.
inline double lgcp_pcf(const LgcpCovariance& cov, const std::vector<double>& y_lag,
                       double s_lag) {
  if (!(s_lag >= 0.0 && s_lag <= kPi))
    throw std::invalid_argument("lgcp_pcf: s_lag must be in [0, pi]");
  double sq = 0.0;
  for (double v : y_lag) sq += v * v;
  return std::exp(cov.c0(std::sqrt(sq), s_lag));
}

/// Space-sphere K-function computed from its defining integral of g0 over a
/// ball times a cap, by nested adaptive quadrature. The rotational symmetry
/// of g0 reduces the integral to two radial coordinates:
///   K(r,s) = int_0^r int_0^s g0(t,w) [d v_d t^{d-1}] [sigma_{k-1} sin^{k-1} w] dw dt.
inline double k_lgcp_numeric(const LgcpCovariance& cov, int d, int k, double r, double s,
                             double rel_tol = 1e-7) {
  if (d < 1 || k < 1) throw std::invalid_argument("k_lgcp_numeric: need d >= 1 and k >= 1");
  if (r < 0.0) throw std::invalid_argument("k_lgcp_numeric: r must be >= 0");
  if (!(s >= 0.0 && s <= kPi)) throw std::invalid_argument("k_lgcp_numeric: s must be in [0, pi]");
  if (r == 0.0 || s == 0.0) return 0.0;
  const double radial_const = d * ball_volume(d, 1.0);
  const double colat_const = (k == 1) ? 2.0 : sphere_surface_measure(k - 1);
  auto inner = [&](double t) {
    const auto q = integrate_adaptive(
        [&](double w) {
          return std::exp(cov.c0(t, w)) * std::pow(std::sin(w), k - 1);
        },
        0.0, s, 0.1 * rel_tol);
    return colat_const * q.value;
  };
  const auto outer = integrate_adaptive(
      [&](double t) { return radial_const * std::pow(t, d - 1) * inner(t); }, 0.0, r, rel_tol);
  return outer.value;
}

/// Outer product beta * K1(r) * K2(s) on the curves' grids.
inline KSurface k_separable(double beta, const KCurve& k1, const KCurve& k2) {
  if (!(beta > 0.0)) throw std::invalid_argument("k_separable: beta must be > 0");
  KSurface out(k1.grid, k2.grid);
  for (std::size_t i = 0; i < k1.size(); ++i)
    for (std::size_t j = 0; j < k2.size(); ++j) out.at(i, j) = beta * k1.values[i] * k2.values[j];
  return out;
}

// ---------------------------------------------------------------------------
// Shot noise Cox process with factorized Gaussian x von Mises-Fisher kernel

namespace detail {

/// exp-cos moment of the sphere: Z(t) = int_{S^k} exp(t <e, u>) dnu(u).
inline double vmf_partition(int k, double t) {
  const double colat_const = (k == 1) ? 2.0 : sphere_surface_measure(k - 1);
  const auto q = integrate_adaptive(
      [&](double w) { return std::exp(t * std::cos(w)) * std::pow(std::sin(w), k - 1); }, 0.0,
      kPi, 1e-12);
  return colat_const * q.value;
}

/// 1-D Gaussian density overlap q(v) = int phi_w(z) phi_w(z - v) dz.
inline double gaussian_overlap_1d(double v, double omega) {
  const double lo = 0.5 * v - 10.0 * omega;
  const double hi = 0.5 * v + 10.0 * omega;
  const double inv = 1.0 / (omega * std::sqrt(2.0 * kPi));
  const auto q = integrate_adaptive(
      [&](double z) {
        const double a = z / omega;
        const double b = (z - v) / omega;
        return inv * inv * std::exp(-0.5 * (a * a + b * b));
      },
      lo, hi, 1e-12);
  return q.value;
}

}  // namespace detail

/// Parameters of a homogeneous SNCP driven by a Poisson parent process with
/// intensity alpha_parent on R^d x S^k, IID marks with moments (m1, m2), and
/// the factorized offspring kernel
///   k0(y, t) = [isotropic Gaussian(omega) on R^d] * [vMF(kappa_c) on S^k].
struct SncpParams {
  double alpha_parent;
  double m1;
  double m2;
  double omega;    ///< spatial kernel bandwidth
  double kappa_c;  ///< spherical kernel concentration
  int d = 1;
  int k = 2;

  SncpParams(double alpha, double mm1, double mm2, double bandwidth, double concentration,
             int dd = 1, int kk = 2)
      : alpha_parent(alpha), m1(mm1), m2(mm2), omega(bandwidth), kappa_c(concentration),
        d(dd), k(kk) {
    if (!(alpha_parent > 0.0)) throw std::invalid_argument("SncpParams: alpha_parent must be > 0");
    if (m1 < 0.0) throw std::invalid_argument("SncpParams: m1 must be >= 0");
    if (m1 == 0.0 && m2 != 0.0)
      throw std::invalid_argument("SncpParams: zero-mean marks require m2 = 0");
    if (m2 < m1 * m1)
      throw std::invalid_argument("SncpParams: moment inequality m2 >= m1^2 violated");
    if (!(omega > 0.0)) throw std::invalid_argument("SncpParams: omega must be > 0");
    if (!(kappa_c > 0.0)) throw std::invalid_argument("SncpParams: kappa_c must be > 0");
    if (d < 1 || k < 1) throw std::invalid_argument("SncpParams: need d >= 1 and k >= 1");
    // Kernel factors must be probability densities on their factor spaces.
    const double spatial_mass =
        integrate_adaptive(
            [&](double z) {
              return std::exp(-0.5 * z * z / (omega * omega)) /
                     (omega * std::sqrt(2.0 * kPi));
            },
            -12.0 * omega, 12.0 * omega, 1e-10)
            .value;
    if (std::abs(spatial_mass - 1.0) > 1e-6)
      throw std::invalid_argument("SncpParams: spatial kernel does not integrate to 1");
    const double sphere_mass = detail::vmf_partition(k, kappa_c) * vmf_norm_const();
    if (std::abs(sphere_mass - 1.0) > 1e-6)
      throw std::invalid_argument("SncpParams: sphere kernel does not integrate to 1");
  }

  /// Normalizing constant of the vMF kernel density C e^{kappa_c cos t}.
  double vmf_norm_const() const { return 1.0 / detail::vmf_partition(k, kappa_c); }

  /// Intensity of the resulting homogeneous SNCP.
  double intensity() const { return m1 * alpha_parent; }
};

/// Pair correlation function of the homogeneous SNCP at spatial lag vector
/// y_lag and geodesic lag s_lag:
///   g = 1 + m2/(alpha m1^2) * A1(||y_lag||) * A2(s_lag),
/// where A1 and A2 are the kernel autocorrelation integrals over the factor
/// spaces.
inline double sncp_pcf(const SncpParams& p, const std::vector<double>& y_lag, double s_lag) {
  if (p.m1 == 0.0) throw std::domain_error("sncp_pcf: undefined for the empty process (m1 = 0)");
  if (static_cast<int>(y_lag.size()) != p.d)
    throw std::invalid_argument("sncp_pcf: spatial lag dimension mismatch");
  if (!(s_lag >= 0.0 && s_lag <= kPi))
    throw std::invalid_argument("sncp_pcf: s_lag must be in [0, pi]");
  double sq = 0.0;
  for (double v : y_lag) sq += v * v;
  const double t = std::sqrt(sq);
  // Gaussian kernels factorize over coordinates; isotropy lets us place the
  // lag on the first axis.
  double a1 = detail::gaussian_overlap_1d(t, p.omega);
  const double q0 = detail::gaussian_overlap_1d(0.0, p.omega);
  for (int a = 1; a < p.d; ++a) a1 *= q0;
  // vMF autocorrelation: C^2 * Z(kappa ||u1 + u2||) with ||u1 + u2|| =
  // 2 cos(s/2).
  const double c = p.vmf_norm_const();
  const double a2 = c * c * detail::vmf_partition(p.k, 2.0 * p.kappa_c * std::cos(0.5 * s_lag));
  return 1.0 + p.m2 / (p.alpha_parent * p.m1 * p.m1) * a1 * a2;
}

}  // namespace sphereproc
