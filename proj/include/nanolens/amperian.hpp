#pragma once

/**
 * @file amperian.hpp
 * @brief Biot-Savart field of the equivalent surface currents K = M x n.
 *
 * Independent of the charge model: the same uniformly magnetized body is
 * represented by sheet currents on its lateral walls. For the lens these are
 * one outer circle (counter-clockwise seen from +z), one inner quarter arc per
 * cut (clockwise) and two radial segments per cut.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <variant>
#include <vector>

#include "nanolens/errors.hpp"
#include "nanolens/fieldsolver.hpp"
#include "nanolens/geometry.hpp"
#include "nanolens/quadrature.hpp"
#include "nanolens/units.hpp"

namespace nanolens {

/// Arc of radius `radius` centered on the z axis, from theta_start to
/// theta_end; circulation +1 flows toward increasing theta.
struct ArcPath {
  double radius = 0.0;
  double theta_start = 0.0;
  double theta_end = 0.0;
  int circulation = +1;
};

/// Straight segment; current flows from `from` to `to`.
struct SegmentPath {
  Vec2 from = Vec2::Zero();
  Vec2 to = Vec2::Zero();
};

struct CurrentSheet {
  std::variant<ArcPath, SegmentPath> curve;
  double z_bottom = 0.0;
  double z_top = 0.0;
  double sheet_current = 0.0;  ///< A/m

  bool is_arc() const { return std::holds_alternative<ArcPath>(curve); }
};

/// Sheets for a disk of `outer_radius` with quarter-disk-like sectors of
/// `inner_radius` removed. Cut widths are free here, so degenerate cuts can be
/// built; sheets_for() applies the lens invariants.
inline std::vector<CurrentSheet> sheets_for_footprint(double outer_radius, double inner_radius,
                                                      double thickness, double mu0_M,
                                                      std::span<const AngularInterval> cuts) {
  const double k = mu0_M / mu0;
  const double zb = -thickness;
  std::vector<CurrentSheet> sheets;
  sheets.push_back({ArcPath{outer_radius, 0.0, two_pi, +1}, zb, 0.0, k});
  for (const auto& cut : cuts) {
    sheets.push_back({ArcPath{inner_radius, cut.start, cut.end, -1}, zb, 0.0, k});
    // Traversal with material on the left: out along the end edge, in along
    // the start edge.
    const Vec2 end_dir{std::cos(cut.end), std::sin(cut.end)};
    const Vec2 start_dir{std::cos(cut.start), std::sin(cut.start)};
    sheets.push_back({SegmentPath{Vec2::Zero(), inner_radius * end_dir}, zb, 0.0, k});
    sheets.push_back({SegmentPath{inner_radius * start_dir, Vec2::Zero()}, zb, 0.0, k});
  }
  return sheets;
}

inline std::vector<CurrentSheet> sheets_for(const LensGeometry& g) {
  validate(g);
  return sheets_for_footprint(g.outer_radius, g.inner_radius, g.thickness, g.mu0_M,
                              g.cut_quadrants);
}

/// Distance from r to the wall surface of a sheet.
inline double distance_to_sheet(const CurrentSheet& sheet, const Vec3& r) {
  const double dz = std::max({sheet.z_bottom - r.z(), r.z() - sheet.z_top, 0.0});
  const Vec2 p{r.x(), r.y()};
  double planar = 0.0;
  if (const auto* arc = std::get_if<ArcPath>(&sheet.curve)) {
    const double lo = std::min(arc->theta_start, arc->theta_end);
    const double hi = std::max(arc->theta_start, arc->theta_end);
    const AngularInterval span{lo, hi};
    if (hi - lo >= two_pi || (p.norm() > 0.0 && span.contains(std::atan2(p.y(), p.x())))) {
      planar = std::abs(p.norm() - arc->radius);
    } else {
      planar = std::min((p - detail::polar_point(arc->radius, lo)).norm(),
                        (p - detail::polar_point(arc->radius, hi)).norm());
    }
  } else {
    const auto& seg = std::get<SegmentPath>(sheet.curve);
    planar = detail::distance_to_segment(p, seg.from, seg.to);
  }
  return std::sqrt(planar * planar + dz * dz);
}

namespace detail {

inline Vec3 biot_savart_kernel(const Vec3& r, const Vec3& source, const Vec3& tangent) {
  const Vec3 d = r - source;
  const double d2 = d.squaredNorm();
  return tangent.cross(d) / (d2 * std::sqrt(d2));
}

// Arcs are integrated in panels of at most a quarter turn.
inline Vec3 sheet_integral(const CurrentSheet& sheet, const Vec3& r, const QuadratureSpec& spec) {
  Vec3 sum = Vec3::Zero();
  if (const auto* arc = std::get_if<ArcPath>(&sheet.curve)) {
    const double span = arc->theta_end - arc->theta_start;
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(span) / (0.5 * std::numbers::pi) - 1e-12)));
    const double R = arc->radius;
    const double sign = arc->circulation;
    auto f = [&](double theta, double z) -> Vec3 {
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      return R * biot_savart_kernel(r, Vec3{R * c, R * s, z}, Vec3{-sign * s, sign * c, 0.0});
    };
    for (int k = 0; k < panels; ++k) {
      const double t0 = arc->theta_start + span * k / panels;
      const double t1 = arc->theta_start + span * (k + 1) / panels;
      sum += integrate_rect(t0, t1, sheet.z_bottom, sheet.z_top, f, spec).value;
    }
  } else {
    const auto& seg = std::get<SegmentPath>(sheet.curve);
    const Vec2 delta = seg.to - seg.from;
    const double length = delta.norm();
    if (length == 0.0) return sum;
    const Vec3 tangent{delta.x() / length, delta.y() / length, 0.0};
    auto f = [&](double s, double z) -> Vec3 {
      const Vec2 p = seg.from + s * delta;
      return length * biot_savart_kernel(r, Vec3{p.x(), p.y(), z}, tangent);
    };
    sum = integrate_rect(0.0, 1.0, sheet.z_bottom, sheet.z_top, f, spec).value;
  }
  return sum;
}

}  // namespace detail

/// B(r) = (mu0 / 4 pi) sum Int K t x (r - r') / |r - r'|^3 dl' dz'. No bias.
inline FieldSample biot_savart_field(std::span<const CurrentSheet> sheets, const Vec3& r,
                                     const QuadratureSpec& spec) {
  spec.validate();
  if (!r.allFinite()) throw PreconditionError("evaluation point is not finite");
  Vec3 b = Vec3::Zero();
  for (const auto& sheet : sheets) {
    const double d = distance_to_sheet(sheet, r);
    if (d < min_surface_distance) {
      std::ostringstream msg;
      msg << "evaluation point too close to a current sheet: " << d / units::nm << " nm";
      throw PreconditionError(msg.str());
    }
    b += sheet.sheet_current * detail::sheet_integral(sheet, r, spec);
  }
  b *= mu0 / (4.0 * std::numbers::pi);
  return FieldSample::make(r, b);
}

}  // namespace nanolens
