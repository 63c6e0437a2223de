#pragma once

/**
 * @file geometry.hpp
 * @brief Cut-disk lens footprint, its polar decomposition and symmetries.
 *
 * The magnet is a disk of radius R_out and thickness t with two diagonally
 * opposed quarter-disks of radius R_in removed. It occupies z in [-t, 0];
 * field points "above the surface" have z > 0. Magnetization is uniform
 * along +z and is stored as the polarization mu0*M in Tesla.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nanolens/errors.hpp"
#include "nanolens/units.hpp"

namespace nanolens {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
  double w = std::fmod(theta, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

struct AngularInterval {
  double start = 0.0;
  double end = 0.0;

  double width() const { return end - start; }

  /// Half-open membership [start, end) modulo 2*pi.
  bool contains(double theta) const {
    const double offset = wrap_angle(theta - start);
    return offset < width();
  }

  bool operator==(const AngularInterval&) const = default;
};

struct LensGeometry {
  double outer_radius = 60.0 * units::nm;
  double inner_radius = 40.0 * units::nm;
  double thickness = 10.0 * units::nm;
  double mu0_M = 2.0;
  std::array<AngularInterval, 2> cut_quadrants{
      AngularInterval{0.0, 0.5 * std::numbers::pi},
      AngularInterval{std::numbers::pi, 1.5 * std::numbers::pi}};

  /// M in A/m.
  double magnetization() const { return mu0_M / mu0; }

  /// Angles (radians, in [0, pi)) of the two vertical mirror planes: the
  /// bisector of the cut quadrants and the line perpendicular to it.
  std::array<double, 2> symmetry_axes() const {
    const double bisector = wrap_angle(cut_quadrants[0].start + 0.25 * std::numbers::pi);
    const double a = std::fmod(bisector, std::numbers::pi);
    return {a, std::fmod(a + 0.5 * std::numbers::pi, std::numbers::pi)};
  }

  bool operator==(const LensGeometry&) const = default;
};

/// Throws GeometryError naming the first violated invariant.
inline void validate(const LensGeometry& g) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(g.outer_radius) || !finite(g.inner_radius) || !finite(g.thickness) ||
      !finite(g.mu0_M))
    throw GeometryError("geometry: all parameters must be finite");
  if (!(g.inner_radius > 0.0)) throw GeometryError("geometry: inner_radius must be > 0");
  if (!(g.inner_radius < g.outer_radius))
    throw GeometryError("geometry: inner_radius must be < outer_radius");
  if (!(g.thickness > 0.0)) throw GeometryError("geometry: thickness must be > 0");
  if (!(g.mu0_M > 0.0)) throw GeometryError("geometry: mu0_M must be > 0");
  constexpr double tol = 1e-12;
  for (const auto& cut : g.cut_quadrants) {
    if (std::abs(cut.width() - 0.5 * std::numbers::pi) > tol)
      throw GeometryError("geometry: each cut quadrant must span exactly pi/2");
  }
  const double offset = wrap_angle(g.cut_quadrants[1].start - g.cut_quadrants[0].start);
  if (std::abs(offset - std::numbers::pi) > tol)
    throw GeometryError("geometry: cut quadrants must be offset by exactly pi");
}

/// Closed-form footprint area: pi*R_out^2 - 2*(pi/4)*R_in^2.
inline double footprint_area(const LensGeometry& g) {
  return std::numbers::pi * g.outer_radius * g.outer_radius -
         0.5 * std::numbers::pi * g.inner_radius * g.inner_radius;
}

/// Annular sector on one charged face.
struct PolarPatch {
  double r_min = 0.0;
  double r_max = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double z_plane = 0.0;
  int charge_sign = +1;

  double area() const {
    return 0.5 * (theta_max - theta_min) * (r_max * r_max - r_min * r_min);
  }

  /// Half-open membership of a planar point.
  bool contains(const Vec2& p) const {
    const double r = p.norm();
    if (r < r_min || r >= r_max) return false;
    return AngularInterval{theta_min, theta_max}.contains(std::atan2(p.y(), p.x()));
  }

  bool operator==(const PolarPatch&) const = default;
};

/// Tiles the top (z = 0, +) and bottom (z = -t, -) faces. Per face: each kept
/// quadrant as an inner sector [0, R_in] plus an annular sector [R_in, R_out],
/// each cut quadrant as the annular sector only. Six patches per face.
inline std::vector<PolarPatch> decompose(const LensGeometry& g) {
  validate(g);
  std::vector<PolarPatch> patches;
  patches.reserve(12);
  const double c0 = g.cut_quadrants[0].start;
  for (const auto& [z, sign] : {std::pair{0.0, +1}, std::pair{-g.thickness, -1}}) {
    for (int q = 0; q < 4; ++q) {
      const double t0 = c0 + q * 0.5 * std::numbers::pi;
      const double t1 = t0 + 0.5 * std::numbers::pi;
      const bool is_cut = (q % 2 == 0);
      if (!is_cut) patches.push_back({0.0, g.inner_radius, t0, t1, z, sign});
      patches.push_back({g.inner_radius, g.outer_radius, t0, t1, z, sign});
    }
  }
  return patches;
}

/// Uniform scaling of every length; mu0_M is unchanged.
inline LensGeometry scale(const LensGeometry& g, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw GeometryError("scale: factor must be > 0");
  LensGeometry out = g;
  out.outer_radius *= s;
  out.inner_radius *= s;
  out.thickness *= s;
  return out;
}

/// True iff the planar point lies in the magnet footprint.
inline bool contains(const LensGeometry& g, const Vec2& p) {
  const double r = p.norm();
  if (r > g.outer_radius) return false;
  if (r >= g.inner_radius) return true;
  const double theta = std::atan2(p.y(), p.x());
  return !(g.cut_quadrants[0].contains(theta) || g.cut_quadrants[1].contains(theta));
}

namespace detail {

inline double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

inline Vec2 polar_point(double r, double theta) {
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace detail

/// Planar distance from p to an annular sector (0 when inside).
inline double distance_to_patch(const PolarPatch& patch, const Vec2& p) {
  const double r = p.norm();
  const double theta = std::atan2(p.y(), p.x());
  const AngularInterval span{patch.theta_min, patch.theta_max};
  const bool in_span = span.contains(theta) || r == 0.0;
  if (in_span && r >= patch.r_min && r <= patch.r_max) return 0.0;

  double d = std::numeric_limits<double>::infinity();
  for (double edge : {patch.theta_min, patch.theta_max}) {
    d = std::min(d, detail::distance_to_segment(p, detail::polar_point(patch.r_min, edge),
                                                detail::polar_point(patch.r_max, edge)));
  }
  if (in_span) {
    d = std::min(d, std::abs(r - patch.r_max));
    if (patch.r_min > 0.0) d = std::min(d, std::abs(r - patch.r_min));
  }
  return d;
}

/// Planar distance from p to the footprint (0 when inside).
inline double distance_to_footprint(const LensGeometry& g, const Vec2& p) {
  if (contains(g, p)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (const auto& patch : decompose(g)) {
    if (patch.charge_sign < 0) break;
    d = std::min(d, distance_to_patch(patch, p));
  }
  return d;
}

/// 180 degree rotation about z.
inline Vec2 rotate_half_turn(const Vec2& p) { return -p; }

/// Reflection across the vertical plane through the z axis at angle `axis`.
inline Vec2 mirror(const Vec2& p, double axis) {
  const Vec2 u{std::cos(axis), std::sin(axis)};
  return 2.0 * p.dot(u) * u - p;
}

inline Vec3 mirror(const Vec3& p, double axis) {
  const Vec2 m = mirror(Vec2{p.x(), p.y()}, axis);
  return {m.x(), m.y(), p.z()};
}

}  // namespace nanolens
