#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nanolens/geometry.hpp"
#include "nanolens/quadrature.hpp"

using namespace nanolens;
using std::numbers::pi;

namespace {

Vec2 polar(double r_nm, double deg) {
  return {r_nm * units::nm * std::cos(deg * units::deg), r_nm * units::nm * std::sin(deg * units::deg)};
}

}  // namespace

TEST(Geometry, DefaultsValidate) {
  const LensGeometry g;
  EXPECT_NO_THROW(validate(g));
  EXPECT_DOUBLE_EQ(g.outer_radius, 60e-9);
  EXPECT_DOUBLE_EQ(g.inner_radius, 40e-9);
  EXPECT_DOUBLE_EQ(g.thickness, 10e-9);
  EXPECT_NEAR(g.magnetization(), 2.0 / (4e-7 * pi), 1e-6);
}

TEST(Geometry, InvariantViolationsAreNamed) {
  auto message = [](LensGeometry g) {
    try {
      validate(g);
    } catch (const GeometryError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  LensGeometry g;
  g.inner_radius = g.outer_radius;
  EXPECT_NE(message(g).find("inner_radius must be < outer_radius"), std::string::npos);
  g = {};
  g.inner_radius = 0.0;
  EXPECT_NE(message(g).find("inner_radius must be > 0"), std::string::npos);
  g = {};
  g.thickness = -1e-9;
  EXPECT_NE(message(g).find("thickness"), std::string::npos);
  g = {};
  g.mu0_M = 0.0;
  EXPECT_NE(message(g).find("mu0_M"), std::string::npos);
  g = {};
  g.cut_quadrants[1].end += 0.1;
  EXPECT_NE(message(g).find("span exactly pi/2"), std::string::npos);
  g = {};
  g.cut_quadrants[1] = {0.5 * pi, pi};
  EXPECT_NE(message(g).find("offset by exactly pi"), std::string::npos);
  g = {};
  g.outer_radius = std::nan("");
  EXPECT_NE(message(g).find("finite"), std::string::npos);
}

TEST(Geometry, DecomposeDefaultHasSixPatchesPerFace) {
  const auto patches = decompose(LensGeometry{});
  ASSERT_EQ(patches.size(), 12u);
  int top = 0, full_sectors = 0, annular = 0;
  for (const auto& p : patches) {
    EXPECT_LT(p.r_min, p.r_max);
    EXPECT_LT(p.theta_min, p.theta_max);
    if (p.charge_sign > 0) {
      ++top;
      EXPECT_EQ(p.z_plane, 0.0);
      if (p.r_min == 0.0) ++full_sectors;
      else ++annular;
    } else {
      EXPECT_DOUBLE_EQ(p.z_plane, -10e-9);
    }
  }
  EXPECT_EQ(top, 6);
  EXPECT_EQ(full_sectors, 2);
  EXPECT_EQ(annular, 4);
}

TEST(Geometry, ThinAnnulusLimit) {
  LensGeometry g;
  const double eps = 1e-12;
  g.inner_radius = g.outer_radius - eps;
  for (const auto& p : decompose(g))
    if (p.r_min > 0.0) {
      EXPECT_NEAR(p.r_max - p.r_min, eps, 1e-20);
    }
}

TEST(Geometry, PatchAreaMatchesClosedForm) {
  const LensGeometry g;
  double top = 0.0;
  for (const auto& p : decompose(g))
    if (p.charge_sign > 0) top += p.area();
  const double closed = pi * 60e-9 * 60e-9 - 0.5 * pi * 40e-9 * 40e-9;
  EXPECT_NEAR(top / closed - 1.0, 0.0, 1e-12);
  EXPECT_NEAR(footprint_area(g), 8.796459430051421e-15, 1e-27);
}

TEST(Geometry, IndicatorQuadratureGivesArea) {
  const LensGeometry g;
  double total = 0.0;
  for (const auto& p : decompose(g))
    if (p.charge_sign > 0) total += integrate_patch(p, [](double, double) { return 1.0; }, QuadratureSpec{}).value;
  EXPECT_NEAR(total / footprint_area(g) - 1.0, 0.0, 1e-12);
}

TEST(Geometry, ContainsExamples) {
  const LensGeometry g;
  EXPECT_TRUE(contains(g, polar(50, 135)));
  EXPECT_FALSE(contains(g, polar(20, 45)));
  EXPECT_TRUE(contains(g, polar(50, 45)));
  EXPECT_TRUE(contains(g, polar(20, 135)));
  EXPECT_FALSE(contains(g, polar(20, 225)));
  EXPECT_FALSE(contains(g, polar(61, 135)));
}

TEST(Geometry, MonteCarloTiling) {
  const LensGeometry g;
  const auto patches = decompose(g);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-70e-9, 70e-9);
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    int hits = 0;
    for (const auto& patch : patches)
      if (patch.charge_sign > 0 && patch.contains(p)) ++hits;
    if (hits != (contains(g, p) ? 1 : 0)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Geometry, SymmetryOfFootprint) {
  const LensGeometry g;
  const auto axes = g.symmetry_axes();
  EXPECT_NEAR(axes[0], 0.25 * pi, 1e-15);
  EXPECT_NEAR(axes[1], 0.75 * pi, 1e-15);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-70e-9, 70e-9);
  int mismatches = 0;
  for (int i = 0; i < 20000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    // Skip points within rounding distance of a cut edge.
    const double theta = std::atan2(p.y(), p.x());
    if (std::abs(std::remainder(theta, 0.5 * pi)) < 1e-9 || std::abs(p.norm() - g.inner_radius) < 1e-15) continue;
    const bool in = contains(g, p);
    if (contains(g, rotate_half_turn(p)) != in) ++mismatches;
    if (contains(g, mirror(p, axes[0])) != in) ++mismatches;
    if (contains(g, mirror(p, axes[1])) != in) ++mismatches;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(Geometry, Scale) {
  const LensGeometry g;
  EXPECT_EQ(scale(g, 1.0), g);
  const LensGeometry big = scale(g, 10.0);
  EXPECT_NEAR(big.outer_radius, 600e-9, 1e-20);
  EXPECT_NEAR(big.inner_radius, 400e-9, 1e-20);
  EXPECT_NEAR(big.thickness, 100e-9, 1e-20);
  EXPECT_EQ(big.mu0_M, g.mu0_M);
  EXPECT_THROW(scale(g, 0.0), GeometryError);
  EXPECT_THROW(scale(g, -2.0), GeometryError);
}

TEST(Geometry, AngularIntervalIsHalfOpen) {
  const AngularInterval q{0.0, 0.5 * pi};
  EXPECT_TRUE(q.contains(0.0));
  EXPECT_FALSE(q.contains(0.5 * pi));
  EXPECT_TRUE(q.contains(2.0 * pi + 0.1));
  EXPECT_FALSE(q.contains(-0.1));
}

TEST(Geometry, DistanceToFootprint) {
  const LensGeometry g;
  EXPECT_EQ(distance_to_footprint(g, polar(50, 135)), 0.0);
  EXPECT_NEAR(distance_to_footprint(g, polar(70, 100)), 10e-9, 1e-18);
  // Inside a cut, nearest is the inner arc or a cut edge.
  EXPECT_NEAR(distance_to_footprint(g, polar(30, 45)), 10e-9, 1e-18);
  EXPECT_NEAR(distance_to_footprint(g, polar(10, 45)), 10e-9 * std::sin(pi / 4), 1e-18);
}
