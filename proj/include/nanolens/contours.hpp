#pragma once

// Marching-squares iso-lines of |B| on planar grids.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "nanolens/errors.hpp"
#include "nanolens/fieldsolver.hpp"
#include "nanolens/units.hpp"

namespace nanolens {

/// Regular scalar grid in plane coordinates; value(iu, iv) = values[iv * n_u + iu].
struct ScalarGrid {
  int n_u = 0;
  int n_v = 0;
  double u0 = 0.0;
  double du = 0.0;
  double v0 = 0.0;
  double dv = 0.0;
  std::vector<double> values;

  double value(int iu, int iv) const { return values[static_cast<std::size_t>(iv) * n_u + iu]; }
  double u_at(int iu) const { return u0 + iu * du; }
  double v_at(int iv) const { return v0 + iv * dv; }
};

inline ScalarGrid magnitude_grid(const FieldGrid& grid) {
  ScalarGrid s;
  s.n_u = grid.n_u;
  s.n_v = grid.n_v;
  s.u0 = grid.window.u_min;
  s.v0 = grid.window.v_min;
  s.du = grid.n_u > 1 ? (grid.window.u_max - grid.window.u_min) / (grid.n_u - 1) : 0.0;
  s.dv = grid.n_v > 1 ? (grid.window.v_max - grid.window.v_min) / (grid.n_v - 1) : 0.0;
  s.values.reserve(grid.samples.size());
  for (const auto& sample : grid.samples) s.values.push_back(sample.magnitude);
  return s;
}

struct Polyline {
  std::vector<Vec2> points;  ///< closed polylines repeat the first point last
  bool closed = false;
};

struct ContourSet {
  PlaneSpec plane;
  std::vector<double> levels;
  std::vector<std::vector<Polyline>> polylines;  ///< one list per level
};

/// Levels center + k * spacing, k integer, that fall inside [lo, hi], ascending.
inline std::vector<double> default_levels(double center, double spacing, double lo, double hi) {
  if (!(spacing > 0.0)) throw PreconditionError("contour spacing must be > 0");
  std::vector<double> levels;
  const long k_lo = static_cast<long>(std::ceil((lo - center) / spacing));
  const long k_hi = static_cast<long>(std::floor((hi - center) / spacing));
  for (long k = k_lo; k <= k_hi; ++k) levels.push_back(center + k * spacing);
  return levels;
}

namespace detail {

// Edge keys: horizontal edge (iu, iv)-(iu+1, iv) and vertical edge
// (iu, iv)-(iu, iv+1) get distinct ids so shared crossings chain exactly.
struct EdgeIndex {
  int n_u;
  int n_v;
  std::int64_t horizontal(int iu, int iv) const { return static_cast<std::int64_t>(iv) * (n_u - 1) + iu; }
  std::int64_t vertical(int iu, int iv) const {
    return static_cast<std::int64_t>(n_v) * (n_u - 1) + static_cast<std::int64_t>(iv) * n_u + iu;
  }
};

inline Vec2 crossing(const ScalarGrid& g, int iu0, int iv0, int iu1, int iv1, double level) {
  const double a = g.value(iu0, iv0);
  const double b = g.value(iu1, iv1);
  const double t = (b == a) ? 0.5 : std::clamp((level - a) / (b - a), 0.0, 1.0);
  const Vec2 p0{g.u_at(iu0), g.v_at(iv0)};
  const Vec2 p1{g.u_at(iu1), g.v_at(iv1)};
  return p0 + t * (p1 - p0);
}

struct Segment {
  std::int64_t a;
  std::int64_t b;
};

inline std::vector<Polyline> trace_level(const ScalarGrid& g, double level) {
  const EdgeIndex idx{g.n_u, g.n_v};
  std::unordered_map<std::int64_t, Vec2> points;
  std::vector<Segment> segments;

  for (int iv = 0; iv + 1 < g.n_v; ++iv) {
    for (int iu = 0; iu + 1 < g.n_u; ++iu) {
      const double v00 = g.value(iu, iv);
      const double v10 = g.value(iu + 1, iv);
      const double v11 = g.value(iu + 1, iv + 1);
      const double v01 = g.value(iu, iv + 1);
      const bool b0 = v00 > level, b1 = v10 > level, b2 = v11 > level, b3 = v01 > level;
      if (b0 == b1 && b1 == b2 && b2 == b3) continue;

      const std::int64_t bottom = idx.horizontal(iu, iv);
      const std::int64_t top = idx.horizontal(iu, iv + 1);
      const std::int64_t left = idx.vertical(iu, iv);
      const std::int64_t right = idx.vertical(iu + 1, iv);
      auto mark = [&](std::int64_t key, int a_u, int a_v, int b_u, int b_v) {
        if (!points.count(key)) points.emplace(key, crossing(g, a_u, a_v, b_u, b_v, level));
      };
      std::vector<std::int64_t> hits;
      if (b0 != b1) { mark(bottom, iu, iv, iu + 1, iv); hits.push_back(bottom); }
      if (b1 != b2) { mark(right, iu + 1, iv, iu + 1, iv + 1); hits.push_back(right); }
      if (b2 != b3) { mark(top, iu, iv + 1, iu + 1, iv + 1); hits.push_back(top); }
      if (b3 != b0) { mark(left, iu, iv, iu, iv + 1); hits.push_back(left); }

      if (hits.size() == 2) {
        segments.push_back({hits[0], hits[1]});
      } else {
        // Saddle cell: the cell average decides which diagonal is connected.
        const bool center_above = 0.25 * (v00 + v10 + v11 + v01) > level;
        if (center_above == b0) {
          segments.push_back({bottom, right});
          segments.push_back({top, left});
        } else {
          segments.push_back({left, bottom});
          segments.push_back({right, top});
        }
      }
    }
  }

  std::unordered_map<std::int64_t, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    incident[segments[s].a].push_back(s);
    incident[segments[s].b].push_back(s);
  }
  std::vector<char> used(segments.size(), 0);
  std::vector<Polyline> lines;

  auto walk = [&](std::size_t first, std::int64_t start) {
    Polyline line;
    std::int64_t at = start;
    std::size_t seg = first;
    line.points.push_back(points.at(at));
    while (true) {
      used[seg] = 1;
      const std::int64_t next = segments[seg].a == at ? segments[seg].b : segments[seg].a;
      line.points.push_back(points.at(next));
      at = next;
      if (at == start) {
        line.closed = true;
        break;
      }
      std::size_t follow = segments.size();
      for (std::size_t cand : incident[at])
        if (!used[cand]) follow = cand;
      if (follow == segments.size()) break;
      seg = follow;
    }
    lines.push_back(std::move(line));
  };

  // Open chains start at grid-boundary crossings (one incident segment).
  std::vector<std::int64_t> ends;
  for (const auto& [key, list] : incident)
    if (list.size() == 1) ends.push_back(key);
  std::sort(ends.begin(), ends.end());
  for (std::int64_t key : ends) {
    const std::size_t s = incident[key].front();
    if (!used[s]) walk(s, key);
  }
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s]) walk(s, segments[s].a);
  return lines;
}

}  // namespace detail

/// Marching squares with linear interpolation. Levels outside the grid's
/// range yield an empty list for that level.
inline ContourSet extract_contours(const ScalarGrid& grid, const std::vector<double>& levels,
                                   const PlaneSpec& plane = {}) {
  if (grid.n_u < 2 || grid.n_v < 2) throw PreconditionError("extract_contours: grid too small");
  for (double v : grid.values)
    if (!std::isfinite(v)) throw PreconditionError("extract_contours: non-finite grid value");
  ContourSet set;
  set.plane = plane;
  set.levels = levels;
  for (double level : levels) set.polylines.push_back(detail::trace_level(grid, level));
  return set;
}

inline ContourSet extract_contours(const FieldGrid& grid, const std::vector<double>& levels) {
  return extract_contours(magnitude_grid(grid), levels, grid.plane);
}

/// Even-odd point-in-polygon test for a closed polyline.
inline bool encloses(const Polyline& line, const Vec2& p) {
  bool inside = false;
  const auto& pts = line.points;
  for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
    if ((pts[i].y() > p.y()) != (pts[j].y() > p.y())) {
      const double x = pts[j].x() + (p.y() - pts[j].y()) * (pts[i].x() - pts[j].x()) /
                                        (pts[i].y() - pts[j].y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

/// Shoelace area of a closed polyline (absolute value).
inline double enclosed_area(const Polyline& line) {
  double twice = 0.0;
  const auto& pts = line.points;
  for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++)
    twice += pts[j].x() * pts[i].y() - pts[i].x() * pts[j].y();
  return 0.5 * std::abs(twice);
}

}  // namespace nanolens
