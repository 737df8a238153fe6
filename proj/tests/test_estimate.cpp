#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "sphereproc/estimate.hpp"
#include "sphereproc/log.hpp"
#include "sphereproc/model.hpp"
#include "sphereproc/simulate.hpp"

using namespace sphereproc;

namespace {

const BoxWindow kUnit({0.0}, {1.0});

struct MuteWarnings {
  std::function<void(const std::string&)> saved;
  MuteWarnings() : saved(warning_handler()) {
    warning_handler() = [](const std::string&) {};
  }
  ~MuteWarnings() { warning_handler() = saved; }
};

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double stderr_of_mean(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1) / v.size());
}

}  // namespace

TEST_CASE("homogeneous intensity estimates") {
  // fireball-scale numbers: n = 344 on a 606-week interval, k = 2
  {
    BoxWindow w({0.0}, {606.0});
    std::vector<SpatialPoint> ys;
    std::vector<SpherePoint> us;
    auto eng = make_engine({400, 0});
    std::uniform_real_distribution<double> unif(0.0, 606.0);
    for (int i = 0; i < 344; ++i) {
      ys.emplace_back(std::vector<double>{unif(eng)});
      us.push_back(uniform_sphere_point(2, eng));
    }
    const SpaceSpherePattern x(w, 2, ys, us);
    const auto est = intensity_hom(x);
    CHECK(est.rho1 == Catch::Approx(344.0 / 606.0).epsilon(1e-14));
    CHECK(est.rho1 == Catch::Approx(0.57).margin(0.005));
    CHECK(est.rho2 == Catch::Approx(344.0 / (4.0 * kPi)).epsilon(1e-14));
    CHECK(est.rho2 == Catch::Approx(27.37).margin(0.005));
    CHECK(est.rho == Catch::Approx(344.0 / (4.0 * kPi * 606.0)).epsilon(1e-14));
    CHECK(est.rho == Catch::Approx(0.045).margin(0.001));
  }
  // neuron-scale numbers: n = 504 in a micrometer box
  {
    BoxWindow w({0.0, 0.0, 0.0}, {492.7, 132.0, 407.7});
    std::vector<SpatialPoint> ys;
    std::vector<SpherePoint> us;
    auto eng = make_engine({401, 0});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 504; ++i) {
      ys.emplace_back(std::vector<double>{492.7 * unif(eng), 132.0 * unif(eng), 407.7 * unif(eng)});
      us.push_back(uniform_sphere_point(2, eng));
    }
    const SpaceSpherePattern x(w, 2, ys, us);
    CHECK(intensity_hom(x).rho1 == Catch::Approx(1.9e-5).margin(0.05e-5));
  }
  const SpaceSpherePattern empty(kUnit, 2, {}, {});
  CHECK_THROWS_AS(intensity_hom(empty), std::invalid_argument);
}

TEST_CASE("translation correction") {
  BoxWindow w({0.0}, {1.0});
  const SpatialPoint a({0.3}), b({0.7});
  CHECK(translation_correction(a, a, w) == Catch::Approx(1.0));
  CHECK(translation_correction(a, b, w) == Catch::Approx(0.6));
  CHECK(translation_correction(b, a, w) == Catch::Approx(0.6));
  const SpatialPoint far_apart({0.999});
  BoxWindow small({0.0}, {0.5});
  CHECK(translation_correction(SpatialPoint({0.0}), SpatialPoint({0.5}), small) == 0.0);

  BoxWindow w2({0.0, 0.0}, {2.0, 1.0});
  CHECK(translation_correction(SpatialPoint({0.5, 0.2}), SpatialPoint({1.5, 0.5}), w2) ==
        Catch::Approx((2.0 - 1.0) * (1.0 - 0.3)));
}

TEST_CASE("temporal correction") {
  BoxWindow w({0.0}, {10.0});
  CHECK(temporal_correction(SpatialPoint({5.0}), SpatialPoint({6.0}), w) == Catch::Approx(10.0));
  CHECK(temporal_correction(SpatialPoint({0.5}), SpatialPoint({2.0}), w) == Catch::Approx(5.0));
  CHECK(temporal_correction(SpatialPoint({4.0}), SpatialPoint({4.0}), w) == Catch::Approx(10.0));
  // not symmetric: the interval is centered at the first argument
  CHECK(temporal_correction(SpatialPoint({2.0}), SpatialPoint({0.5}), w) == Catch::Approx(10.0));
  BoxWindow planar({0.0, 0.0}, {1.0, 1.0});
  CHECK_THROWS_AS(temporal_correction(SpatialPoint({0.1, 0.1}), SpatialPoint({0.2, 0.2}), planar),
                  std::invalid_argument);
}

TEST_CASE("spatial K toy example") {
  const SpatialPattern y{kUnit, {SpatialPoint({0.2}), SpatialPoint({0.6})}};
  const auto grid = uniform_grid(0.0, 1.0, 10);  // includes 0.4 exactly
  const auto k1 = k1_hat(y, 2.0, grid, EdgeCorrection::Translation);
  for (std::size_t b = 0; b < grid.size(); ++b) {
    if (grid[b] < 0.4)
      CHECK(k1.values[b] == 0.0);
    else
      CHECK(k1.values[b] == Catch::Approx(2.0 / (0.6 * 4.0)).epsilon(1e-12));
  }
  const SpatialPattern single{kUnit, {SpatialPoint({0.5})}};
  for (double v : k1_hat(single, 2.0, grid).values) CHECK(v == 0.0);
}

TEST_CASE("spatial K is unbiased under homogeneous Poisson") {
  const double rho = 50.0 / (4.0 * kPi);  // spatial intensity 50 after projection
  const int reps = 1000;
  std::vector<double> at_r(reps);
  const std::vector<double> grid{0.1};
  for (int r = 0; r < reps; ++r) {
    const auto x = sim_poisson(rho, kUnit, 2, {402, static_cast<std::uint64_t>(r)});
    const auto k1 = k1_hat(project_spatial(x), 50.0, grid, EdgeCorrection::Translation);
    at_r[r] = k1.values[0];
  }
  const double target = k1_pois(1, 0.1);  // 0.2
  CHECK(target == Catch::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(mean(at_r) - target) <= 3.0 * stderr_of_mean(at_r));
}

TEST_CASE("spherical K toy example") {
  const SpherePattern u{2, {SpherePoint({0, 0, 1}), SpherePoint({0, 0, -1})}};
  const double rho2 = 2.0 / (4.0 * kPi);
  const auto grid = uniform_grid(0.0, kPi, 8);
  const auto k2 = k2_hat(u, rho2, grid);
  for (std::size_t b = 0; b < grid.size(); ++b) {
    if (grid[b] < kPi)
      CHECK(k2.values[b] == 0.0);
    else
      CHECK(k2.values[b] == Catch::Approx(2.0 * kPi).epsilon(1e-12));
  }
  const SpherePattern single{2, {SpherePoint({0, 0, 1})}};
  for (double v : k2_hat(single, rho2, grid).values) CHECK(v == 0.0);
}

TEST_CASE("spherical K is unbiased under uniform Poisson") {
  const double rho = 10.0;
  const int reps = 1000;
  std::vector<double> at_s(reps);
  const std::vector<double> grid{0.5 * kPi};
  for (int r = 0; r < reps; ++r) {
    const auto x = sim_poisson(rho, kUnit, 2, {403, static_cast<std::uint64_t>(r)});
    const auto k2 = k2_hat(project_spherical(x), rho, grid);  // rho2 = rho |W| = rho
    at_s[r] = k2.values[0];
  }
  const double target = k2_pois(2, 0.5 * kPi);  // 2 pi
  CHECK(std::abs(mean(at_s) - target) <= 3.0 * stderr_of_mean(at_s));
}

TEST_CASE("space-sphere K on the combined toy pattern") {
  const SpaceSpherePattern x(kUnit, 2, {SpatialPoint({0.2}), SpatialPoint({0.6})},
                             {SpherePoint({0, 0, 1}), SpherePoint({1, 0, 0})});
  const double rho = 2.0 / (4.0 * kPi);
  const auto r_grid = uniform_grid(0.0, 1.0, 10);
  const auto s_grid = uniform_grid(0.0, kPi, 8);
  const auto k = k_hat(x, rho, r_grid, s_grid, EdgeCorrection::Translation);
  // the only pair: spatial lag 0.4, geodesic lag pi/2, weight w1 = 0.6
  const double expected = (1.0 / (4.0 * kPi)) * 2.0 / (0.6 * rho * rho);
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) {
      if (r_grid[i] >= 0.4 && s_grid[j] >= 0.5 * kPi)
        CHECK(k.at(i, j) == Catch::Approx(expected).epsilon(1e-12));
      else
        CHECK(k.at(i, j) == 0.0);
    }
}

TEST_CASE("K surfaces are monotone and relabeling-invariant") {
  const auto x = sim_poisson(20.0, kUnit, 2, {404, 0});
  const auto est = intensity_hom(x);
  const auto r_grid = uniform_grid(0.0, 0.5, 16);
  const auto s_grid = uniform_grid(0.0, kPi, 16);
  const auto k = k_hat(x, est.rho, r_grid, s_grid);
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 1; j < k.cols(); ++j) CHECK(k.at(i, j) >= k.at(i, j - 1));
  for (std::size_t i = 1; i < k.rows(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) CHECK(k.at(i, j) >= k.at(i - 1, j));

  // relabeling invariance
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  auto eng = make_engine({405, 0});
  std::shuffle(order.begin(), order.end(), eng);
  std::vector<SpatialPoint> ys;
  std::vector<SpherePoint> us;
  for (auto i : order) {
    ys.push_back(x.spatial_at(i));
    us.push_back(x.direction_at(i));
  }
  const SpaceSpherePattern shuffled(x.window(), 2, ys, us);
  const auto k_shuffled = k_hat(shuffled, est.rho, r_grid, s_grid);
  for (std::size_t c = 0; c < k.values.size(); ++c)
    CHECK(k.values[c] == Catch::Approx(k_shuffled.values[c]).margin(1e-12));
}

TEST_CASE("K at s = pi equals sigma_k times the spatial K") {
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = sim_poisson(8.0 + trial % 7, kUnit, 2, {406, static_cast<std::uint64_t>(trial)});
    if (x.size() < 2) continue;
    const double sigma = 4.0 * kPi;
    const double rho = intensity_hom(x).rho;
    const double rho1 = intensity_hom(x).rho1;
    std::vector<double> r_grid = uniform_grid(0.0, 0.8, 7);
    std::vector<double> s_grid = uniform_grid(0.0, kPi, 4);  // ends exactly at pi
    const auto k = k_hat(x, rho, r_grid, s_grid);
    const auto k1 = k1_hat(project_spatial(x), rho1, r_grid);
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
      const double lhs = k.at(i, s_grid.size() - 1);
      const double rhs = sigma * k1.values[i];
      CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12).margin(1e-12));
    }
  }
}

TEST_CASE("joint statistics agree with the individual estimators") {
  const auto x = sim_poisson(30.0, kUnit, 2, {407, 0});
  const auto est = intensity_hom(x);
  const auto r_grid = uniform_grid(0.0, 0.4, 12);
  const auto s_grid = uniform_grid(0.0, kPi, 12);
  auto rho_fn = [&](const SpatialPoint&, const SpherePoint&) { return est.rho; };
  auto rho1_fn = [&](const SpatialPoint&) { return est.rho1; };
  auto rho2_fn = [&](const SpherePoint&) { return est.rho2; };
  const auto joint = k_statistics(x, rho_fn, rho1_fn, rho2_fn, r_grid, s_grid);
  const auto k_only = k_hat(x, est.rho, r_grid, s_grid);
  const auto k1_only = k1_hat(project_spatial(x), est.rho1, r_grid);
  const auto k2_only = k2_hat(project_spherical(x), est.rho2, s_grid);
  for (std::size_t c = 0; c < k_only.values.size(); ++c)
    CHECK(joint.k.values[c] == Catch::Approx(k_only.values[c]).margin(1e-13));
  for (std::size_t b = 0; b < r_grid.size(); ++b)
    CHECK(joint.k1.values[b] == Catch::Approx(k1_only.values[b]).margin(1e-13));
  for (std::size_t b = 0; b < s_grid.size(); ++b)
    CHECK(joint.k2.values[b] == Catch::Approx(k2_only.values[b]).margin(1e-13));
}

TEST_CASE("D statistic") {
  const auto r_grid = uniform_grid(0.0, 0.5, 6);
  const auto s_grid = uniform_grid(0.0, kPi, 6);
  KSurface zero_surface(r_grid, s_grid);
  KCurve zero_curve(r_grid, std::vector<double>(r_grid.size(), 0.0));
  KCurve zero_s(s_grid, std::vector<double>(s_grid.size(), 0.0));
  const auto d0 = d_hat(zero_surface, zero_curve, zero_s);
  for (double v : d0.values) CHECK(v == 0.0);

  // k2 identically zero leaves D = K
  const auto x = sim_poisson(25.0, kUnit, 2, {408, 0});
  const auto est = intensity_hom(x);
  const auto k = k_hat(x, est.rho, r_grid, s_grid);
  std::vector<double> k1v(r_grid.size(), 1.0);
  const auto d = d_hat(k, KCurve(r_grid, k1v), zero_s);
  for (std::size_t c = 0; c < k.values.size(); ++c)
    CHECK(d.values[c] == Catch::Approx(k.values[c]).margin(1e-15));

  KCurve wrong_grid(uniform_grid(0.0, 0.3, 6), std::vector<double>(7, 0.0));
  CHECK_THROWS_AS(d_hat(k, wrong_grid, zero_s), std::invalid_argument);

  // Monte Carlo: D centered near zero for a separable Poisson truth
  const int reps = 400;
  const std::vector<double> rg{0.2}, sg{1.0};
  std::vector<double> d_vals(reps);
  for (int r = 0; r < reps; ++r) {
    const auto xr = sim_poisson(10.0, kUnit, 2, {409, static_cast<std::uint64_t>(r)});
    if (xr.size() < 2) {
      d_vals[r] = 0.0;
      continue;
    }
    auto rho_fn = [&](const SpatialPoint&, const SpherePoint&) { return 10.0; };
    auto rho1_fn = [&](const SpatialPoint&) { return 10.0 * 4.0 * kPi; };
    auto rho2_fn = [&](const SpherePoint&) { return 10.0; };
    const auto joint = k_statistics(xr, rho_fn, rho1_fn, rho2_fn, rg, sg);
    d_vals[r] = joint.k.at(0, 0) - joint.k1.values[0] * joint.k2.values[0];
  }
  // E D-hat is not exactly 0 (product of unbiased estimates is biased by
  // their covariance) but at this intensity the offset is far below the
  // Monte Carlo noise.
  CHECK(std::abs(mean(d_vals)) <= 3.5 * stderr_of_mean(d_vals));
}

TEST_CASE("K estimators exclude nonpositive-intensity points") {
  MuteWarnings mute;
  const SpatialPattern y{kUnit, {SpatialPoint({0.2}), SpatialPoint({0.6}), SpatialPoint({0.9})}};
  auto rho1 = [](const SpatialPoint& p) { return p[0] > 0.8 ? 0.0 : 2.0; };
  const auto grid = uniform_grid(0.0, 1.0, 10);
  const auto k1 = k1_hat(y, rho1, grid);
  // only the (0.2, 0.6) pair contributes
  CHECK(k1.values.back() == Catch::Approx(2.0 / (0.6 * 4.0)).epsilon(1e-12));
}

TEST_CASE("mixture probability from hemisphere counts") {
  // n = 504 with n_s = 15 southern points: p = 1 - 30/504
  auto eng = make_engine({410, 0});
  std::vector<SpherePoint> pts;
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 504 - 15; ++i) {
    double x = gauss(eng), y = gauss(eng), z = std::abs(gauss(eng)) + 0.05;
    pts.push_back(SpherePoint({x, y, z}));
  }
  for (int i = 0; i < 15; ++i) {
    double x = gauss(eng), y = gauss(eng), z = -std::abs(gauss(eng)) - 0.05;
    pts.push_back(SpherePoint({x, y, z}));
  }
  const SpherePattern u{2, pts};
  MixtureFitOptions opts;
  opts.restarts = 1;
  const auto fit = fit_mixture(u, SpherePoint({0, 0, 1}), SpherePoint({1, 0, 0}),
                               SpherePoint({0, 1, 0}), SpherePoint({0, 1, 0}), opts);
  CHECK(fit.p_hat == Catch::Approx(1.0 - 30.0 / 504.0).epsilon(1e-12));
  CHECK(fit.p_hat == Catch::Approx(0.94).margin(0.001));
}

TEST_CASE("mixture fit hits the concentration cap on degenerate data") {
  std::vector<SpherePoint> pts;
  auto eng = make_engine({411, 0});
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 50; ++i) {
    // extremely concentrated cluster at the pole
    pts.push_back(SpherePoint({1e-8 * gauss(eng), 1e-8 * gauss(eng), 1.0}));
  }
  const SpherePattern u{2, pts};
  MixtureFitOptions opts;
  opts.kappa_max = 50.0;
  opts.restarts = 2;
  const auto fit = fit_mixture(u, SpherePoint({0, 0, 1}), SpherePoint({1, 0, 0}),
                               SpherePoint({0, 1, 0}), SpherePoint({0, 1, 0}), opts);
  CHECK(fit.p_hat == 1.0);
  CHECK(fit.boundary_hit);
  CHECK(fit.kappa > 49.0);
}

TEST_CASE("mixture fit rejects a southern majority") {
  std::vector<SpherePoint> pts;
  auto eng = make_engine({412, 0});
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 40; ++i)
    pts.push_back(SpherePoint({gauss(eng), gauss(eng), -std::abs(gauss(eng)) - 0.1}));
  const SpherePattern u{2, pts};
  CHECK_THROWS_AS(fit_mixture(u, SpherePoint({0, 0, 1}), SpherePoint({1, 0, 0}),
                              SpherePoint({0, 1, 0}), SpherePoint({0, 1, 0})),
                  std::domain_error);
}

TEST_CASE("mixture fit recovers known parameters") {
  // single-replicate smoke check; the full recovery study runs in the
  // acceptance suite
  const SpherePoint north({0, 0, 1}), ex({1, 0, 0}), ey({0, 1, 0});
  const auto truth = SphericalDensity::mixture(
      0.9, SphericalDensity::kent(15.0, 2.7, north, ex, ey), SphericalDensity::watson(ey, -8.0));
  auto eng = make_engine({413, 0});
  const auto draws = sample_density(truth, 5000, eng);
  const SpherePattern u{2, draws};
  MixtureFitOptions opts;
  opts.restarts = 3;
  const auto fit = fit_mixture(u, north, ex, ey, ey, opts);
  CHECK(std::abs(fit.kappa - 15.0) / 15.0 < 0.2);
  CHECK(std::abs(fit.kappa_w - (-8.0)) / 8.0 < 0.3);
  CHECK(std::abs(fit.p_hat - 0.9) < 0.05);
  // the fitted density is a proper density
  const double mass = oracles::sphere_mass_adaptive(
      [&](double x, double y, double z) { return fit.density(SpherePoint({x, y, z})); }, 1e-8);
  CHECK(mass == Catch::Approx(1.0).margin(1e-6));
}
