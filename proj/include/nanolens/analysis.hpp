#pragma once

/**
 * @file analysis.hpp
 * @brief Focus search and classification, bias sweeps, the focus gradient
 * tensor, resonant-shell extents and Fig.-3-style vector grids.
 *
 * The focus is a stationary point of |B| on the symmetry axis. Search runs in
 * three stages:
 *   1. bracketing scan of |B(0, 0, z)| and golden-section refinement; field
 *      nulls (B reverses across the bracket) are not stationary points of a
 *      smooth |B| and are skipped,
 *   2. Newton iteration in 3-d on grad |B| = J^T B / |B|, with the Hessian
 *      taken by central differences of the analytic gradient,
 *   3. classification from the eigenvalues of that Hessian.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nanolens/errors.hpp"
#include "nanolens/fieldsolver.hpp"
#include "nanolens/geometry.hpp"
#include "nanolens/parallel.hpp"
#include "nanolens/quadrature.hpp"
#include "nanolens/units.hpp"

namespace nanolens {

enum class Classification { minimum, saddle, none_found };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::minimum: return "minimum";
    case Classification::saddle: return "saddle";
    case Classification::none_found: return "none-found";
  }
  return "none-found";
}

struct FocusOptions {
  double z_min = 5.0 * units::nm;
  double z_max = 60.0 * units::nm;
  double scan_step = 0.25 * units::nm;
  double golden_tolerance = 1e-4 * units::nm;
  double hessian_step = 0.05 * units::nm;
  double grad_tolerance = 1e-3 * units::gauss_per_nm;
  double eigen_zero_ratio = 1e-4;
  int max_newton_iterations = 20;
  double max_newton_step = 1.0 * units::nm;

  bool operator==(const FocusOptions&) const = default;
};

struct FocusReport {
  Vec3 position = Vec3::Zero();
  double b_min = 0.0;  ///< |B| at position, T
  Classification classification = Classification::none_found;
  bool degenerate = false;
  std::array<double, 3> hessian_eigenvalues{};  ///< ascending, T/m^2
  Mat3 hessian_eigenvectors = Mat3::Identity();  ///< columns match eigenvalues
  Mat3 hessian = Mat3::Zero();
  GradientTensor gradient_tensor;
  double bias_used = 0.0;
  double gradient_norm = 0.0;         ///< |grad |B|| at position, T/m
  double axis_transverse_gradient = 0.0;  ///< after stage 1, T/m
  int newton_iterations = 0;
};

/// grad |B| = J^T B / |B|.
inline Vec3 magnitude_gradient(const FieldWithJacobian& fj) {
  if (fj.sample.magnitude == 0.0) return Vec3::Zero();
  return fj.jacobian.entries.transpose() * fj.sample.b / fj.sample.magnitude;
}

/// Hessian of |B| by central differences of the analytic gradient, symmetrized.
inline Mat3 magnitude_hessian(const LensGeometry& g, const BiasField& bias, const Vec3& x,
                              double step, const QuadratureSpec& spec) {
  Mat3 h;
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = step * Vec3::Unit(j);
    const Vec3 gp = magnitude_gradient(field_and_jacobian_at(g, bias, x + e, spec));
    const Vec3 gm = magnitude_gradient(field_and_jacobian_at(g, bias, x - e, spec));
    h.col(j) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

namespace detail {

// Golden-section search for an extremum of f on [a, b]; sign = +1 minimizes,
// -1 maximizes.
template <class F>
double golden_section(const F& f, double a, double b, double tol, double sign) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = sign * f(c);
  double fd = sign * f(d);
  while (std::abs(b - a) > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = sign * f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = sign * f(d);
    }
  }
  return 0.5 * (a + b);
}

struct Classified {
  Classification classification;
  bool degenerate;
  std::array<double, 3> eigenvalues;
  Mat3 eigenvectors;
};

inline Classified classify_hessian(const Mat3& h, double zero_ratio) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig(h);
  const Vec3 ev = eig.eigenvalues();
  const double threshold = zero_ratio * ev.cwiseAbs().maxCoeff();
  int negative = 0;
  int positive = 0;
  for (int i = 0; i < 3; ++i) {
    if (ev[i] < -threshold) ++negative;
    else if (ev[i] > threshold) ++positive;
  }
  Classified out;
  out.degenerate = (negative + positive) < 3;
  if (negative > 0) out.classification = Classification::saddle;
  else if (positive == 3) out.classification = Classification::minimum;
  else out.classification = Classification::none_found;
  out.eigenvalues = {ev[0], ev[1], ev[2]};
  out.eigenvectors = eig.eigenvectors();
  return out;
}

}  // namespace detail

/// Locates and classifies the stationary point of |B| on the symmetry axis.
inline FocusReport find_focus(const LensGeometry& g, const BiasField& bias,
                              const FocusOptions& opt, const QuadratureSpec& spec) {
  validate(g);
  if (!(opt.z_min < opt.z_max) || !(opt.scan_step > 0.0))
    throw PreconditionError("find_focus: empty search interval or non-positive step");
  check_evaluation_point(g, Vec3{0, 0, opt.z_min});
  check_evaluation_point(g, Vec3{0, 0, opt.z_max});

  // Stage 1: axis scan.
  const int n = static_cast<int>(std::floor((opt.z_max - opt.z_min) / opt.scan_step + 1e-9)) + 1;
  std::vector<double> zs(n);
  std::vector<FieldSample> scan(n);
  for (int k = 0; k < n; ++k) zs[k] = std::min(opt.z_min + k * opt.scan_step, opt.z_max);
  parallel_for(n, [&](std::size_t k) { scan[k] = field_at(g, bias, Vec3{0, 0, zs[k]}, spec); });
  auto axis_magnitude = [&](double z) { return field_at(g, bias, Vec3{0, 0, z}, spec).magnitude; };

  std::optional<double> best_min;
  double best_min_value = 0.0;
  std::optional<double> best_max;
  double best_max_value = 0.0;
  for (int k = 1; k + 1 < n; ++k) {
    const double m = scan[k].magnitude;
    const bool is_min = m < scan[k - 1].magnitude && m <= scan[k + 1].magnitude;
    const bool is_max = m > scan[k - 1].magnitude && m >= scan[k + 1].magnitude;
    if (is_min) {
      if (scan[k - 1].b.dot(scan[k + 1].b) < 0.0) continue;  // field null
      const double z = detail::golden_section(axis_magnitude, zs[k - 1], zs[k + 1],
                                              opt.golden_tolerance, +1.0);
      const double v = axis_magnitude(z);
      if (!best_min || v < best_min_value) {
        best_min = z;
        best_min_value = v;
      }
    } else if (is_max && !best_min) {
      const double z = detail::golden_section(axis_magnitude, zs[k - 1], zs[k + 1],
                                              opt.golden_tolerance, -1.0);
      const double v = axis_magnitude(z);
      if (!best_max || v < best_max_value) {
        best_max = z;
        best_max_value = v;
      }
    }
  }

  FocusReport report;
  report.bias_used = bias.b_bias_z;
  if (!best_min && !best_max) {
    const auto lowest = std::min_element(scan.begin(), scan.end(), [](const auto& a, const auto& b) {
      return a.magnitude < b.magnitude;
    });
    const auto fj = field_and_jacobian_at(g, bias, lowest->position, spec);
    report.position = lowest->position;
    report.b_min = lowest->magnitude;
    report.gradient_tensor = fj.jacobian;
    report.gradient_norm = magnitude_gradient(fj).norm();
    report.classification = Classification::none_found;
    return report;
  }

  Vec3 x{0.0, 0.0, best_min ? *best_min : *best_max};
  {
    const Vec3 grad = magnitude_gradient(field_and_jacobian_at(g, bias, x, spec));
    report.axis_transverse_gradient = std::hypot(grad.x(), grad.y());
  }

  // Stage 2: Newton on grad |B|.
  bool converged = false;
  int iter = 0;
  for (; iter <= opt.max_newton_iterations; ++iter) {
    const Vec3 grad = magnitude_gradient(field_and_jacobian_at(g, bias, x, spec));
    if (grad.norm() < 1e-2 * opt.grad_tolerance) {
      converged = true;
      break;
    }
    if (iter == opt.max_newton_iterations) break;
    const Mat3 h = magnitude_hessian(g, bias, x, opt.hessian_step, spec);
    Vec3 step = -h.colPivHouseholderQr().solve(grad);
    if (!step.allFinite()) break;
    if (step.norm() > opt.max_newton_step) step *= opt.max_newton_step / step.norm();
    x += step;
    if (x.z() < opt.z_min || x.z() > opt.z_max)
      throw AnalysisError("find_focus: Newton refinement left the search interval");
    if (step.norm() < 1e-6 * units::nm) {
      converged = true;
      break;
    }
  }
  const auto fj = field_and_jacobian_at(g, bias, x, spec);
  report.gradient_norm = magnitude_gradient(fj).norm();
  if (!converged && report.gradient_norm >= opt.grad_tolerance)
    throw AnalysisError("find_focus: no stationary point of |B| reached in the search interval");

  // Stage 3: classification.
  report.position = x;
  report.b_min = fj.sample.magnitude;
  report.gradient_tensor = fj.jacobian;
  report.newton_iterations = iter;
  report.hessian = magnitude_hessian(g, bias, x, opt.hessian_step, spec);
  const auto c = detail::classify_hessian(report.hessian, opt.eigen_zero_ratio);
  report.classification = c.classification;
  report.degenerate = c.degenerate;
  report.hessian_eigenvalues = c.eigenvalues;
  report.hessian_eigenvectors = c.eigenvectors;
  return report;
}

struct SweepPoint {
  double bias = 0.0;
  FocusReport report;
};

struct SweepTransition {
  double last_bias = 0.0;  ///< last bias of the run ending here
  double next_bias = 0.0;
  Classification from = Classification::none_found;
  Classification to = Classification::none_found;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<SweepTransition> transitions;

  /// Lowest and highest bias of the longest contiguous "minimum" run.
  std::optional<std::pair<double, double>> minimum_window() const {
    std::optional<std::pair<double, double>> best;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < points.size();) {
      if (points[i].report.classification != Classification::minimum) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < points.size() &&
             points[j + 1].report.classification == Classification::minimum)
        ++j;
      if (j - i + 1 > best_len) {
        best_len = j - i + 1;
        best = std::pair{points[i].bias, points[j].bias};
      }
      i = j + 1;
    }
    return best;
  }
};

/// Bias values from, from + step, ... up to `to` inclusive.
inline std::vector<double> sweep_values(double from, double to, double step) {
  if (!(step > 0.0)) throw PreconditionError("bias_sweep: step must be > 0");
  if (to < from) throw PreconditionError("bias_sweep: range end below range start");
  const int n = static_cast<int>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> values(n);
  for (int k = 0; k < n; ++k) values[k] = from + k * step;
  return values;
}

inline SweepResult bias_sweep(const LensGeometry& g, double from, double to, double step,
                              const FocusOptions& opt, const QuadratureSpec& spec) {
  SweepResult result;
  for (double b : sweep_values(from, to, step))
    result.points.push_back({b, find_focus(g, BiasField{b}, opt, spec)});
  for (std::size_t i = 1; i < result.points.size(); ++i) {
    const auto& prev = result.points[i - 1];
    const auto& cur = result.points[i];
    if (prev.report.classification != cur.report.classification)
      result.transitions.push_back(
          {prev.bias, cur.bias, prev.report.classification, cur.report.classification});
  }
  return result;
}

struct TensorReport {
  GradientTensor lab;
  GradientTensor rotated;           ///< axes turned by the symmetry-axis angle
  double rotation_angle = 0.0;      ///< radians
  std::array<double, 3> eigenvalues{};  ///< descending, T/m
  Mat3 eigenvectors = Mat3::Identity();  ///< columns match eigenvalues
  double null_axis_angle = 0.0;     ///< angle between the null eigenvector and z
  std::string diagonal_frame;       ///< "lab", "rotated-45" or "none"
};

/// Off-diagonal entries below this fraction of the largest entry count as zero
/// when deciding which frame diagonalizes the tensor.
inline constexpr double diagonal_frame_ratio = 1e-3;

inline TensorReport focus_tensor(const LensGeometry& g, const BiasField& bias,
                                 const Vec3& focus_position, const QuadratureSpec& spec) {
  TensorReport out;
  out.lab = jacobian_at(g, bias, focus_position, spec);
  out.rotation_angle = g.symmetry_axes()[0];
  out.rotated = out.lab.rotated(out.rotation_angle, Frame::rotated_45);

  const Mat3 sym = 0.5 * (out.lab.entries + out.lab.entries.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(sym);
  for (int i = 0; i < 3; ++i) {
    out.eigenvalues[i] = eig.eigenvalues()[2 - i];
    out.eigenvectors.col(i) = eig.eigenvectors().col(2 - i);
  }
  int null_index = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(out.eigenvalues[i]) < std::abs(out.eigenvalues[null_index])) null_index = i;
  const double cos_angle = std::min(1.0, std::abs(out.eigenvectors.col(null_index).z()));
  out.null_axis_angle = std::acos(cos_angle);

  auto off_diagonal = [](const Mat3& m) {
    Mat3 o = m;
    o.diagonal().setZero();
    return o.cwiseAbs().maxCoeff();
  };
  const double scale = out.lab.max_abs_entry();
  if (off_diagonal(out.lab.entries) <= diagonal_frame_ratio * scale) out.diagonal_frame = "lab";
  else if (off_diagonal(out.rotated.entries) <= diagonal_frame_ratio * scale)
    out.diagonal_frame = "rotated-45";
  else out.diagonal_frame = "none";
  return out;
}

struct ShellScanOptions {
  double step = 0.01 * units::nm;
  double half_length = 8.0 * units::nm;
};

struct ShellExtents {
  std::array<Vec3, 3> axes;  ///< x', y' (transverse, stiffest first), z'
  std::array<double, 3> curvatures{};  ///< Hessian eigenvalue of each axis
  std::array<double, 3> extents{};     ///< meters
};

/// Principal directions at the focus: the two most horizontal Hessian
/// eigenvectors ordered by decreasing eigenvalue, then the most vertical one.
/// Each is signed so its largest component is positive.
inline std::pair<std::array<Vec3, 3>, std::array<double, 3>> principal_axes(
    const FocusReport& focus) {
  int vertical = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(focus.hessian_eigenvectors.col(i).z()) >
        std::abs(focus.hessian_eigenvectors.col(vertical).z()))
      vertical = i;
  std::vector<int> transverse;
  for (int i = 0; i < 3; ++i)
    if (i != vertical) transverse.push_back(i);
  if (focus.hessian_eigenvalues[transverse[0]] < focus.hessian_eigenvalues[transverse[1]])
    std::swap(transverse[0], transverse[1]);
  const std::array<int, 3> order{transverse[0], transverse[1], vertical};
  std::array<Vec3, 3> axes;
  std::array<double, 3> curv{};
  for (int k = 0; k < 3; ++k) {
    Vec3 a = focus.hessian_eigenvectors.col(order[k]).normalized();
    Eigen::Index largest = 0;
    a.cwiseAbs().maxCoeff(&largest);
    if (a[largest] < 0.0) a = -a;
    axes[k] = a;
    curv[k] = focus.hessian_eigenvalues[order[k]];
  }
  return {axes, curv};
}

/// Length of the segment along each principal axis through the focus where
/// ||B| - center_level| < linewidth / 2, by brute-force sampling.
inline ShellExtents resonant_shell_extent(const LensGeometry& g, const BiasField& bias,
                                          const FocusReport& focus, double center_level,
                                          double linewidth, const QuadratureSpec& spec,
                                          const ShellScanOptions& scan = {}) {
  if (focus.classification != Classification::minimum)
    throw PreconditionError("resonant_shell_extent: no minimum at the focus");
  if (center_level < focus.b_min)
    throw PreconditionError("resonant_shell_extent: center level below the minimum field");
  if (!(linewidth >= 0.0)) throw PreconditionError("resonant_shell_extent: negative linewidth");
  ShellExtents out;
  std::tie(out.axes, out.curvatures) = principal_axes(focus);
  const int half = static_cast<int>(std::llround(scan.half_length / scan.step));
  const int per_axis = 2 * half + 1;
  std::vector<char> inside(3 * per_axis);
  parallel_for(inside.size(), [&](std::size_t idx) {
    const int axis = static_cast<int>(idx / per_axis);
    const int k = static_cast<int>(idx % per_axis) - half;
    const Vec3 p = focus.position + (k * scan.step) * out.axes[axis];
    const double m = field_at(g, bias, p, spec).magnitude;
    inside[idx] = std::abs(m - center_level) < 0.5 * linewidth;
  });
  for (int axis = 0; axis < 3; ++axis) {
    const auto begin = inside.begin() + axis * per_axis;
    out.extents[axis] = std::count(begin, begin + per_axis, 1) * scan.step;
  }
  return out;
}

/// Fig.-3-style grid: field_grid over a `width` x `width` window centered on
/// plane.origin (the focus). n must be odd so the center sample is the focus.
inline FieldGrid vector_grid(const LensGeometry& g, const BiasField& bias, const PlaneSpec& plane,
                             double width, int n, const QuadratureSpec& spec) {
  if (n < 3 || n % 2 == 0) throw PreconditionError("vector_grid: n must be odd and >= 3");
  return field_grid(g, bias, plane, GridWindow::centered(width), n, n, spec);
}

/// (B . u, B . v) for a sample of a planar grid.
inline Vec2 in_plane(const FieldGrid& grid, const FieldSample& s) {
  return {s.b.dot(grid.plane.u_axis), s.b.dot(grid.plane.v_axis)};
}

/// Net turns of the in-plane field vector around the grid boundary,
/// traversed counter-clockwise in (u, v).
inline double winding_number(const FieldGrid& grid) {
  std::vector<Vec2> loop;
  for (int i = 0; i < grid.n_u; ++i) loop.push_back(in_plane(grid, grid.at(i, 0)));
  for (int j = 1; j < grid.n_v; ++j) loop.push_back(in_plane(grid, grid.at(grid.n_u - 1, j)));
  for (int i = grid.n_u - 2; i >= 0; --i) loop.push_back(in_plane(grid, grid.at(i, grid.n_v - 1)));
  for (int j = grid.n_v - 2; j >= 0; --j) loop.push_back(in_plane(grid, grid.at(0, j)));
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < loop.size(); ++k) {
    const Vec2& a = loop[k];
    const Vec2& b = loop[k + 1];
    total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  }
  return total / two_pi;
}

}  // namespace nanolens
