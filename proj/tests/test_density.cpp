#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sphereproc/rng.hpp"
#include "sphereproc/spherical_density.hpp"

using namespace sphereproc;

namespace {

const SpherePoint kNorth({0.0, 0.0, 1.0});
const SpherePoint kEx({1.0, 0.0, 0.0});
const SpherePoint kEy({0.0, 1.0, 0.0});

SpherePoint random_unit(std::mt19937_64& eng) {
  std::normal_distribution<double> gauss;
  return SpherePoint({gauss(eng), gauss(eng), gauss(eng)});
}

}  // namespace

TEST_CASE("uniform density") {
  const auto f = SphericalDensity::uniform(2);
  CHECK(f(kNorth) == Catch::Approx(0.07957747154594767).epsilon(1e-13));
  CHECK(f(kEx) == f(kNorth));
  CHECK(density_norm_const(f) == Catch::Approx(1.0 / (4.0 * kPi)).epsilon(1e-13));
  const auto circle = SphericalDensity::uniform(1);
  CHECK(circle(SpherePoint({1.0, 0.0})) == Catch::Approx(1.0 / (2.0 * kPi)).epsilon(1e-13));
}

TEST_CASE("degenerate Kent equals uniform") {
  const auto f = SphericalDensity::kent(0.0, 0.0, kNorth, kEx, kEy);
  auto eng = make_engine({31, 0});
  for (int i = 0; i < 20; ++i)
    CHECK(f(random_unit(eng)) == Catch::Approx(1.0 / (4.0 * kPi)).epsilon(1e-8));
}

TEST_CASE("Kent and Watson normalizing constants match an independent route") {
  const auto kent = SphericalDensity::kent(14.89, 2.69, kNorth, kEx, kEy);
  CHECK(density_norm_const(kent) == Catch::Approx(oracles::kent_norm_const(14.89, 2.69)).epsilon(1e-7));
  const auto watson = SphericalDensity::watson(kEy, -7.88);
  CHECK(density_norm_const(watson) ==
        Catch::Approx(oracles::watson_norm_const(-7.88)).epsilon(1e-7));
}

TEST_CASE("fitted mixture value at the north pole") {
  // 0.94 Kent(14.89, 2.69) + 0.06 Watson(-7.88) evaluated at u = (0,0,1):
  // 0.94 C_K e^{14.89} + 0.06 C_W with the constants from quadrature.
  const auto kent = SphericalDensity::kent(14.89, 2.69, kNorth, kEx, kEy);
  const auto watson = SphericalDensity::watson(kEy, -7.88);
  const auto mix = SphericalDensity::mixture(0.94, kent, watson);
  CHECK(mix(kNorth) == Catch::Approx(2.123850709319913).epsilon(1e-7));
  CHECK(density_norm_const(mix) == 1.0);
}

TEST_CASE("densities integrate to one") {
  const auto kent = SphericalDensity::kent(14.89, 2.69, kNorth, kEx, kEy);
  const auto watson = SphericalDensity::watson(kEy, -7.88);
  const auto mix = SphericalDensity::mixture(0.94, kent, watson);
  const auto uniform = SphericalDensity::uniform(2);
  for (const auto* f : {&kent, &watson, &mix, &uniform}) {
    const double mass = oracles::sphere_mass_adaptive(
        [&](double x, double y, double z) { return (*f)(SpherePoint({x, y, z})); });
    CHECK(mass == Catch::Approx(1.0).margin(1e-6));
  }

  // a tilted frame integrates to one as well
  const SpherePoint mean({1.0, 1.0, 1.0});
  const SpherePoint major({1.0, -1.0, 0.0});
  const SpherePoint minor({1.0, 1.0, -2.0});
  const auto tilted = SphericalDensity::kent(5.0, 1.5, mean, major, minor);
  const double mass = oracles::sphere_mass_adaptive(
      [&](double x, double y, double z) { return tilted(SpherePoint({x, y, z})); });
  CHECK(mass == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("density parameter validation") {
  CHECK_THROWS_AS(SphericalDensity::kent(1.0, 0.6, kNorth, kEx, kEy), std::invalid_argument);
  CHECK_THROWS_AS(SphericalDensity::kent(-1.0, 0.0, kNorth, kEx, kEy), std::invalid_argument);
  CHECK_THROWS_AS(SphericalDensity::kent(5.0, 1.0, kNorth, kEx, kEx), std::invalid_argument);
  const auto u2 = SphericalDensity::uniform(2);
  const auto u3 = SphericalDensity::uniform(3);
  CHECK_THROWS_AS(SphericalDensity::mixture(0.5, u2, u3), std::invalid_argument);
  CHECK_THROWS_AS(SphericalDensity::mixture(1.5, u2, u2), std::invalid_argument);
  CHECK_THROWS_AS(u2(SpherePoint({1.0, 0.0})), std::invalid_argument);
}

TEST_CASE("sup bound dominates the density") {
  const auto kent = SphericalDensity::kent(8.0, 2.5, kNorth, kEx, kEy);
  const auto watson = SphericalDensity::watson(kEx, -4.0);
  const auto mix = SphericalDensity::mixture(0.7, kent, watson);
  auto eng = make_engine({32, 0});
  for (const auto* f : {&kent, &watson, &mix}) {
    const double bound = f->sup_bound();
    for (int i = 0; i < 2000; ++i) REQUIRE((*f)(random_unit(eng)) <= bound * (1.0 + 1e-12));
  }
}
