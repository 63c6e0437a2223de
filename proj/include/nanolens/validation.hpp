#pragma once

// Self-checks of the field solver: charge vs Amperian oracle, Maxwell
// constraints, scaling and finite-difference Jacobians.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "nanolens/amperian.hpp"
#include "nanolens/fieldsolver.hpp"
#include "nanolens/geometry.hpp"
#include "nanolens/parallel.hpp"
#include "nanolens/quadrature.hpp"
#include "nanolens/units.hpp"

namespace nanolens {

struct CheckResult {
  std::string name;
  double value = 0.0;      ///< worst observed metric
  double tolerance = 0.0;  ///< pass if value <= tolerance
  bool passed = false;
};

/// k-th point (k >= 1) of the Halton sequence in base `base`.
inline double halton(int k, int base) {
  double f = 1.0;
  double r = 0.0;
  while (k > 0) {
    f /= base;
    r += f * (k % base);
    k /= base;
  }
  return r;
}

/// n Halton points (bases 2, 3, 5) in the box lo..hi.
inline std::vector<Vec3> halton_points(int n, const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> pts;
  for (int k = 1; k <= n; ++k) {
    const Vec3 t{halton(k, 2), halton(k, 3), halton(k, 5)};
    pts.push_back(lo + t.cwiseProduct(hi - lo));
  }
  return pts;
}

/// Uniform random points in lo..hi at least `clearance` from every face.
inline std::vector<Vec3> free_space_points(const LensGeometry& g, int n, const Vec3& lo, const Vec3& hi,
                                           double clearance, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Vec3 p = lo + Vec3{u(rng), u(rng), u(rng)}.cwiseProduct(hi - lo);
    bool ok = true;
    try {
      check_evaluation_point(g, p);
    } catch (const PreconditionError&) {
      ok = false;
    }
    if (!ok) continue;
    const double dz = std::min(std::abs(p.z()), std::abs(p.z() + g.thickness));
    const double planar = distance_to_footprint(g, {p.x(), p.y()});
    const bool beside = p.z() < 0.0 && p.z() > -g.thickness;
    const bool above_or_below = contains(g, {p.x(), p.y()});
    const double d = beside ? planar : (above_or_below ? dz : std::hypot(planar, dz));
    if (d >= clearance) pts.push_back(p);
  }
  return pts;
}

/// Central-difference Jacobian of field_at, J(i, j) = dB_i/dx_j.
inline Mat3 fd_jacobian(const LensGeometry& g, const BiasField& bias, const Vec3& r, double h,
                        const QuadratureSpec& spec) {
  Mat3 j;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e[k] = h;
    j.col(k) = (field_at(g, bias, r + e, spec).b - field_at(g, bias, r - e, spec).b) / (2.0 * h);
  }
  return j;
}

/// Six-point Laplacian of each field component.
inline Vec3 fd_laplacian(const LensGeometry& g, const BiasField& bias, const Vec3& r, double h,
                         const QuadratureSpec& spec) {
  const Vec3 center = field_at(g, bias, r, spec).b;
  Vec3 sum = -6.0 * center;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e[k] = h;
    sum += field_at(g, bias, r + e, spec).b + field_at(g, bias, r - e, spec).b;
  }
  return sum / (h * h);
}

/// Worst |charge - Amperian| / |Amperian| over components above `floor`.
inline double oracle_disagreement(const LensGeometry& g, const std::vector<Vec3>& pts,
                                  const QuadratureSpec& spec, double floor = 1.0 * units::gauss) {
  const auto sheets = sheets_for(g);
  const BiasField none{0.0};
  std::vector<double> worst(pts.size(), 0.0);
  parallel_for(pts.size(), [&](std::size_t i) {
    const Vec3 charge = field_at(g, none, pts[i], spec).b;
    const Vec3 amp = biot_savart_field(sheets, pts[i], spec).b;
    for (int c = 0; c < 3; ++c)
      if (std::abs(amp[c]) > floor) worst[i] = std::max(worst[i], std::abs(charge[c] - amp[c]) / std::abs(amp[c]));
  });
  return *std::max_element(worst.begin(), worst.end());
}

struct MaxwellMetrics {
  double trace_ratio = 0.0;      ///< max |tr J| / max|J|
  double asymmetry_ratio = 0.0;  ///< max |J - J^T| / max|J|
  double laplacian_ratio = 0.0;  ///< max |lap B_i| * h / max|J|
};

inline MaxwellMetrics maxwell_metrics(const LensGeometry& g, const std::vector<Vec3>& pts, double h,
                                      const QuadratureSpec& spec) {
  const BiasField none{0.0};
  std::vector<MaxwellMetrics> per(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const GradientTensor j = jacobian_at(g, none, pts[i], spec);
    const double scale = j.max_abs_entry();
    per[i].trace_ratio = std::abs(j.trace()) / scale;
    per[i].asymmetry_ratio = j.asymmetry() / scale;
    per[i].laplacian_ratio = fd_laplacian(g, none, pts[i], h, spec).cwiseAbs().maxCoeff() * h / scale;
  });
  MaxwellMetrics out;
  for (const auto& m : per) {
    out.trace_ratio = std::max(out.trace_ratio, m.trace_ratio);
    out.asymmetry_ratio = std::max(out.asymmetry_ratio, m.asymmetry_ratio);
    out.laplacian_ratio = std::max(out.laplacian_ratio, m.laplacian_ratio);
  }
  return out;
}

/// Worst |B_scaled(s r) - B(r)| / |B(r)|, magnet field only.
inline double scaling_deviation(const LensGeometry& g, double s, const std::vector<Vec3>& pts,
                                const QuadratureSpec& spec) {
  const LensGeometry big = scale(g, s);
  const BiasField none{0.0};
  std::vector<double> dev(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const Vec3 a = field_at(g, none, pts[i], spec).b;
    const Vec3 b = field_at(big, none, s * pts[i], spec).b;
    dev[i] = (b - a).norm() / a.norm();
  });
  return *std::max_element(dev.begin(), dev.end());
}

/// Worst entrywise |J - J_fd| / |J| over entries above `floor`.
inline double jacobian_fd_deviation(const LensGeometry& g, const std::vector<Vec3>& pts, double h,
                                    const QuadratureSpec& spec, double floor = 1.0 * units::gauss_per_nm) {
  const BiasField none{0.0};
  std::vector<double> dev(pts.size(), 0.0);
  parallel_for(pts.size(), [&](std::size_t i) {
    const Mat3 j = jacobian_at(g, none, pts[i], spec).entries;
    const Mat3 fd = fd_jacobian(g, none, pts[i], h, spec);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (std::abs(j(a, b)) > floor) dev[i] = std::max(dev[i], std::abs(j(a, b) - fd(a, b)) / std::abs(j(a, b)));
  });
  return *std::max_element(dev.begin(), dev.end());
}

/// The oracle suite run by `nanolens validate`.
inline std::vector<CheckResult> run_validation(const LensGeometry& g, const QuadratureSpec& spec) {
  const Vec3 lo{-30 * units::nm, -30 * units::nm, 10 * units::nm};
  const Vec3 hi{30 * units::nm, 30 * units::nm, 50 * units::nm};
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double value, double tol) {
    out.push_back({std::move(name), value, tol, value <= tol});
  };
  add("charge_vs_amperian_rel", oracle_disagreement(g, halton_points(50, lo, hi), spec), 1e-4);

  const auto random_pts = free_space_points(g, 20, Vec3{-70 * units::nm, -70 * units::nm, -30 * units::nm},
                                            Vec3{70 * units::nm, 70 * units::nm, 60 * units::nm},
                                            2.0 * units::nm, 20240601u);
  const auto m = maxwell_metrics(g, random_pts, 0.01 * units::nm, spec);
  add("jacobian_trace_rel", m.trace_ratio, 1e-6);
  add("jacobian_asymmetry_rel", m.asymmetry_ratio, 1e-6);
  add("fd_laplacian_rel", m.laplacian_ratio, 1e-3);

  const auto ten = halton_points(10, lo, hi);
  add("scaling_s10_rel", scaling_deviation(g, 10.0, ten, spec), 1e-6);
  add("jacobian_vs_fd_rel", jacobian_fd_deviation(g, ten, 0.01 * units::nm, spec), 1e-3);
  return out;
}

}  // namespace nanolens
