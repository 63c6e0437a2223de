#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nanolens/analysis.hpp"
#include "nanolens/contours.hpp"

using namespace nanolens;
using std::numbers::pi;

namespace {

template <class F>
ScalarGrid synthetic(int n, double half, const F& f) {
  ScalarGrid g;
  g.n_u = g.n_v = n;
  g.u0 = g.v0 = -half;
  g.du = g.dv = 2 * half / (n - 1);
  for (int iv = 0; iv < n; ++iv)
    for (int iu = 0; iu < n; ++iu) g.values.push_back(f(g.u_at(iu), g.v_at(iv)));
  return g;
}

}  // namespace

TEST(Contours, DefaultLevels) {
  const auto levels = default_levels(100.5, 6.0, 90.0, 120.0);
  ASSERT_EQ(levels.size(), 5u);
  EXPECT_DOUBLE_EQ(levels[0], 94.5);
  EXPECT_DOUBLE_EQ(levels[1], 100.5);
  EXPECT_DOUBLE_EQ(levels[4], 118.5);
  EXPECT_TRUE(default_levels(100.5, 6.0, 101.0, 106.0).empty());
  EXPECT_THROW(default_levels(0, 0, 0, 1), PreconditionError);
}

TEST(Contours, ConstantGridHasNoContours) {
  const ScalarGrid g = synthetic(11, 1.0, [](double, double) { return 3.0; });
  const ContourSet set = extract_contours(g, {2.0, 2.999, 3.001, 4.0});
  ASSERT_EQ(set.polylines.size(), 4u);
  for (const auto& lines : set.polylines) EXPECT_TRUE(lines.empty());
}

TEST(Contours, ParaboloidGivesCircles) {
  const double a = 1.0, k = 2.0;
  const int n = 101;
  const double half = 2.0;
  const ScalarGrid g = synthetic(n, half, [&](double u, double v) { return a + k * (u * u + v * v); });
  const double half_diag = std::sqrt(2.0) * g.du / 2;
  for (double level : {1.5, 3.0, 5.0}) {
    const ContourSet set = extract_contours(g, {level});
    ASSERT_EQ(set.polylines[0].size(), 1u) << level;
    const Polyline& line = set.polylines[0][0];
    EXPECT_TRUE(line.closed);
    EXPECT_EQ(line.points.front(), line.points.back());
    const double radius = std::sqrt((level - a) / k);
    for (const Vec2& p : line.points) EXPECT_NEAR(p.norm(), radius, half_diag) << level;
    EXPECT_TRUE(encloses(line, Vec2::Zero()));
    EXPECT_NEAR(enclosed_area(line), pi * radius * radius, 2 * pi * radius * half_diag);
  }
}

TEST(Contours, LevelOutsideRangeIsEmpty) {
  const ScalarGrid g = synthetic(5, 1.0, [](double u, double v) { return u + v; });
  const ContourSet set = extract_contours(g, {-5.0, 0.1, 5.0});
  EXPECT_TRUE(set.polylines[0].empty());
  EXPECT_EQ(set.polylines[1].size(), 1u);
  EXPECT_FALSE(set.polylines[1][0].closed);
  EXPECT_TRUE(set.polylines[2].empty());
}

TEST(Contours, PointsInterpolateBracketingCells) {
  const ScalarGrid g = synthetic(21, 1.0, [](double u, double v) { return std::sin(3 * u) * std::cos(2 * v); });
  const double level = 0.3;
  const ContourSet set = extract_contours(g, {level});
  ASSERT_FALSE(set.polylines[0].empty());
  for (const auto& line : set.polylines[0]) {
    for (const Vec2& p : line.points) {
      // Each point lies on a grid edge whose end values bracket the level.
      const double fu = (p.x() - g.u0) / g.du;
      const double fv = (p.y() - g.v0) / g.dv;
      const bool on_vertical = std::abs(fu - std::round(fu)) < 1e-9;
      const int iu = on_vertical ? static_cast<int>(std::round(fu)) : static_cast<int>(std::floor(fu));
      const int iv = on_vertical ? static_cast<int>(std::floor(fv)) : static_cast<int>(std::round(fv));
      const double a = g.value(iu, iv);
      const double b = on_vertical ? g.value(iu, std::min(iv + 1, g.n_v - 1)) : g.value(std::min(iu + 1, g.n_u - 1), iv);
      EXPECT_LE(std::min(a, b), level + 1e-12);
      EXPECT_GE(std::max(a, b), level - 1e-12);
    }
  }
}

TEST(Contours, SaddleCellUsesCellAverage) {
  // Corners 1, 0, 1, 0 around the cell: average 0.5.
  ScalarGrid g;
  g.n_u = g.n_v = 2;
  g.du = g.dv = 1.0;
  g.values = {1.0, 0.0, 0.0, 1.0};  // (0,0)=1 (1,0)=0 (0,1)=0 (1,1)=1
  const ContourSet above = extract_contours(g, {0.4});
  ASSERT_EQ(above.polylines[0].size(), 2u);
  // Center above the level: the high corners connect, so each segment
  // isolates a low corner.
  for (const auto& line : above.polylines[0]) {
    ASSERT_EQ(line.points.size(), 2u);
    const Vec2 mid = 0.5 * (line.points[0] + line.points[1]);
    EXPECT_TRUE((mid - Vec2{1, 0}).norm() < 0.71 || (mid - Vec2{0, 1}).norm() < 0.71);
  }
  const ContourSet below = extract_contours(g, {0.6});
  for (const auto& line : below.polylines[0]) {
    const Vec2 mid = 0.5 * (line.points[0] + line.points[1]);
    EXPECT_TRUE((mid - Vec2{0, 0}).norm() < 0.71 || (mid - Vec2{1, 1}).norm() < 0.71);
  }
}

TEST(Contours, RejectsBadGrids) {
  ScalarGrid g = synthetic(3, 1.0, [](double u, double) { return u; });
  g.values[4] = std::nan("");
  EXPECT_THROW(extract_contours(g, {0.0}), PreconditionError);
  ScalarGrid tiny;
  tiny.n_u = 1;
  tiny.n_v = 5;
  tiny.values.assign(5, 0.0);
  EXPECT_THROW(extract_contours(tiny, {0.0}), PreconditionError);
}

TEST(Contours, LensPlanesAreNotCongruent) {
  const LensGeometry lens;
  const QuadratureSpec spec;
  const FocusReport f = find_focus(lens, BiasField{}, FocusOptions{}, spec);
  std::array<double, 2> areas{};
  for (int k = 0; k < 2; ++k) {
    const PlaneSpec plane = PlaneSpec::vertical(lens.symmetry_axes()[k], f.position);
    const FieldGrid grid = field_grid(lens, BiasField{}, plane, GridWindow::centered(20e-9), 41, 41, spec);
    const ContourSet set = extract_contours(grid, {100.5 * units::gauss});
    // Other pieces of this level may cut the window corners; exactly one loop surrounds the focus.
    int around_focus = 0;
    for (const Polyline& line : set.polylines[0])
      if (line.closed && encloses(line, Vec2::Zero())) {
        ++around_focus;
        areas[k] = enclosed_area(line);
      }
    EXPECT_EQ(around_focus, 1) << k;
  }
  // Stiff +45 deg direction: a narrower 100.5 G loop than in the -45 deg plane.
  EXPECT_LT(areas[0], 0.8 * areas[1]);
}
