// Acceptance criteria for the lens solver. One PASS/FAIL line per criterion;
// the exit status is non-zero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "nanolens/analysis.hpp"
#include "nanolens/contours.hpp"
#include "nanolens/resonance.hpp"
#include "nanolens/validation.hpp"

using namespace nanolens;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const LensGeometry lens;
const BiasField bias;
const QuadratureSpec spec;
const Vec3 box_lo{-30 * units::nm, -30 * units::nm, 10 * units::nm};
const Vec3 box_hi{30 * units::nm, 30 * units::nm, 50 * units::nm};

}  // namespace

int main() {
  // 1. Focus reproduction.
  const auto t0 = std::chrono::steady_clock::now();
  const FocusReport focus = find_focus(lens, bias, FocusOptions{}, spec);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    const double z = focus.position.z() / units::nm;
    const double b = focus.b_min / units::gauss;
    const bool pass = std::abs(z - 23.8) <= 0.5 && std::abs(b - 99.5) <= 2.0 &&
                      focus.classification == Classification::minimum && seconds < 30.0;
    report(1, "focus", pass,
           fmt("z = %.4f nm, |B|min = %.4f G, classification %s, %.2f s", z, b, to_string(focus.classification), seconds));
  }

  // 2. Bias window.
  {
    const double step = 25 * units::gauss;
    const SweepResult s = bias_sweep(lens, -900 * units::gauss, -400 * units::gauss, step, FocusOptions{}, spec);
    bool interior_ok = true;
    bool exterior_ok = true;
    std::string classes;
    for (const auto& p : s.points) {
      const double g = p.bias / units::gauss;
      const bool is_min = p.report.classification == Classification::minimum;
      if (g > -750 + 1e-9 && g < -550 - 1e-9 && !is_min) interior_ok = false;
      if ((g < -775 - 1e-9 || g > -525 + 1e-9) && is_min) exterior_ok = false;
      classes += fmt("%s%.0f:%c", classes.empty() ? "" : " ", g, to_string(p.report.classification)[0]);
    }
    const auto w = s.minimum_window();
    const bool bounds_ok = w && std::abs(w->first / units::gauss + 750) <= 25 + 1e-9 &&
                           std::abs(w->second / units::gauss + 550) <= 25 + 1e-9;
    report(2, "bias window", interior_ok && exterior_ok && bounds_ok,
           fmt("minimum run [%.0f, %.0f] G; %s", w ? w->first / units::gauss : NAN, w ? w->second / units::gauss : NAN,
               classes.c_str()));
  }

  // 3. Gradient tensor.
  const TensorReport tensor = focus_tensor(lens, bias, focus.position, spec);
  {
    const double u = units::gauss_per_angstrom;
    const double e0 = tensor.eigenvalues[0] / u, e1 = tensor.eigenvalues[1] / u, e2 = tensor.eigenvalues[2] / u;
    const double scale = tensor.lab.max_abs_entry();
    const double tr = std::abs(tensor.lab.trace()) / scale;
    const double asym = tensor.lab.asymmetry() / scale;
    const double angle = tensor.null_axis_angle / units::deg;
    const bool pass = std::abs(e0 - 2.5) <= 0.2 && std::abs(e1) <= 0.2 && std::abs(e2 + 2.5) <= 0.2 && angle < 1.0 &&
                      tr < 1e-6 && asym < 1e-6;
    report(3, "gradient tensor", pass,
           fmt("eigenvalues {%+.4f, %+.2e, %+.4f} G/A, null axis %.2e deg from z, trace %.1e, asymmetry %.1e "
               "(relative), diagonal frame %s",
               e0, e1, e2, angle, tr, asym, tensor.diagonal_frame.c_str()));
  }

  // 4. Resonance frequency.
  {
    const double f = larmor_frequency(SpinSpecies::proton(), FieldSample::make(focus.position, Vec3{0, 0, focus.b_min}));
    const double khz = f / units::kHz;
    report(4, "proton frequency", khz >= 415.0 && khz <= 433.0, fmt("f = %.3f kHz", khz));
  }

  // 5. Selectivity.
  {
    const double lw = 1.0 * units::gauss;
    const ShellExtents e = resonant_shell_extent(lens, bias, focus, focus.b_min + 0.5 * lw, lw, spec);
    bool pass = true;
    for (double x : e.extents) pass = pass && x >= 1.0 * units::nm && x <= 4.0 * units::nm;
    report(5, "resonant shell", pass,
           fmt("extents x' %.2f nm, y' %.2f nm, z' %.2f nm (required 1..4 nm)", e.extents[0] / units::nm,
               e.extents[1] / units::nm, e.extents[2] / units::nm));
  }

  // 6. Charge model vs Amperian oracle.
  {
    const double worst = oracle_disagreement(lens, halton_points(50, box_lo, box_hi), spec);
    report(6, "oracle equivalence", worst <= 1e-4, fmt("worst component relative difference %.2e", worst));
  }

  // 7. Maxwell invariants.
  {
    const auto pts = free_space_points(lens, 20, Vec3{-70 * units::nm, -70 * units::nm, -30 * units::nm},
                                       Vec3{70 * units::nm, 70 * units::nm, 60 * units::nm}, 2.0 * units::nm, 20240601u);
    const MaxwellMetrics m = maxwell_metrics(lens, pts, 0.01 * units::nm, spec);
    const bool pass = m.trace_ratio < 1e-6 && m.asymmetry_ratio < 1e-6 && m.laplacian_ratio <= 1e-3;
    report(7, "Maxwell invariants", pass,
           fmt("max trace %.1e, asymmetry %.1e, |lap B| h / max|J| %.1e", m.trace_ratio, m.asymmetry_ratio,
               m.laplacian_ratio));
  }

  const auto ten = halton_points(10, box_lo, box_hi);
  // 8. Scaling.
  {
    const double dev = scaling_deviation(lens, 10.0, ten, spec);
    report(8, "scaling s=10", dev <= 1e-6, fmt("worst relative deviation %.2e", dev));
  }

  // 9. Jacobian vs finite differences.
  {
    const double dev = jacobian_fd_deviation(lens, ten, 0.01 * units::nm, spec);
    report(9, "Jacobian vs FD", dev <= 1e-3, fmt("worst entrywise relative deviation %.2e", dev));
  }

  // 10. Contour grids in the two vertical symmetry planes.
  {
    bool pass = true;
    std::string detail;
    std::array<Polyline, 2> inner;
    const auto axes = lens.symmetry_axes();
    for (int k = 0; k < 2; ++k) {
      const PlaneSpec plane = PlaneSpec::vertical(axes[k], focus.position);
      const FieldGrid grid = field_grid(lens, bias, plane, GridWindow::centered(20 * units::nm), 201, 201, spec);
      const ScalarGrid mag = magnitude_grid(grid);
      const auto [lo, hi] = std::minmax_element(mag.values.begin(), mag.values.end());
      const auto levels = default_levels(100.5 * units::gauss, 6.0 * units::gauss, *lo, *hi);
      const ContourSet set = extract_contours(mag, levels, plane);
      // Innermost level around the focus: the lowest one above |B|min.
      const auto it = std::upper_bound(levels.begin(), levels.end(), focus.b_min);
      const bool innermost_ok = it != levels.end() && std::abs(*it - 100.5 * units::gauss) < 1e-12;
      int loops = 0;
      if (it != levels.end())
        for (const auto& line : set.polylines[it - levels.begin()])
          if (line.closed && encloses(line, Vec2::Zero())) {
            ++loops;
            inner[k] = line;
          }
      pass = pass && innermost_ok && loops == 1;
      detail += fmt("%s%s plane: %zu levels from %.1f G, innermost %.1f G, closed loops around focus %d, area %.3f nm^2",
                    k ? "; " : "", k ? "-45" : "+45", levels.size(), levels.empty() ? NAN : levels.front() / units::gauss,
                    it != levels.end() ? *it / units::gauss : NAN, loops,
                    loops ? enclosed_area(inner[k]) / (units::nm * units::nm) : 0.0);
    }
    // Not congruent: the innermost loops differ in extent along u.
    auto u_width = [](const Polyline& l) {
      double lo = 0.0, hi = 0.0;
      for (const auto& p : l.points) {
        lo = std::min(lo, p.x());
        hi = std::max(hi, p.x());
      }
      return hi - lo;
    };
    const double wp = u_width(inner[0]);
    const double wm = u_width(inner[1]);
    const bool differ = std::abs(wp - wm) > 0.05 * std::max(wp, wm);
    pass = pass && differ;
    detail += fmt("; innermost u-width +45 %.3f nm vs -45 %.3f nm", wp / units::nm, wm / units::nm);
    report(10, "contour grids", pass, detail);
  }

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
