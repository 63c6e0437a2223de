#pragma once

/**
 * @file fieldsolver.hpp
 * @brief Magnetic-charge model of the lens plus a uniform bias field.
 *
 * Each face carries sigma = +/- M. The field outside the body is
 *
 *   B(r) = (mu0 M / 4 pi) * sum_faces sign * Int (r - r') / |r - r'|^3 da'
 *
 * with the kernel gradient applied analytically, and the Jacobian uses the
 * analytic second derivatives of 1/|r - r'|.
 */

#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "nanolens/errors.hpp"
#include "nanolens/geometry.hpp"
#include "nanolens/parallel.hpp"
#include "nanolens/quadrature.hpp"
#include "nanolens/units.hpp"

namespace nanolens {

/// Evaluation points closer than this to a charged face are rejected.
inline constexpr double min_surface_distance = 1.0 * units::nm;

struct BiasField {
  double b_bias_z = -650.0 * units::gauss;

  bool operator==(const BiasField&) const = default;
};

struct FieldSample {
  Vec3 position = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double magnitude = 0.0;

  static FieldSample make(const Vec3& position, const Vec3& b) {
    return {position, b, b.norm()};
  }
};

enum class Frame { lab, rotated_45 };

/// J(i, j) = dB_i / dx_j in T/m.
struct GradientTensor {
  Mat3 entries = Mat3::Zero();
  Frame frame = Frame::lab;

  double max_abs_entry() const { return entries.cwiseAbs().maxCoeff(); }
  double trace() const { return entries.trace(); }
  double asymmetry() const { return (entries - entries.transpose()).cwiseAbs().maxCoeff(); }

  /// Expresses the tensor in axes rotated by `angle` about z.
  GradientTensor rotated(double angle, Frame to) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat3 r;
    r << c, s, 0, -s, c, 0, 0, 0, 1;
    return {r * entries * r.transpose(), to};
  }
};

namespace detail {

inline Vec3 charge_kernel(const Vec3& r, double x, double y, double z) {
  const double dx = r.x() - x;
  const double dy = r.y() - y;
  const double dz = r.z() - z;
  const double d2 = dx * dx + dy * dy + dz * dz;
  const double inv3 = 1.0 / (d2 * std::sqrt(d2));
  return {dx * inv3, dy * inv3, dz * inv3};
}

inline void check_spec(const QuadratureSpec& spec) { spec.validate(); }

// Angular node tables of a patch at one order.
struct AngularNodes {
  std::vector<double> cos_t, sin_t, weight;
};

inline void fill_angular(const PolarPatch& patch, int order, AngularNodes& out) {
  const GaussRule& rule = gauss_legendre(order);
  const double ht = 0.5 * (patch.theta_max - patch.theta_min);
  const double ct = 0.5 * (patch.theta_max + patch.theta_min);
  out.cos_t.resize(order);
  out.sin_t.resize(order);
  out.weight.resize(order);
  for (int j = 0; j < order; ++j) {
    const double theta = ct + ht * rule.nodes[j];
    out.cos_t[j] = std::cos(theta);
    out.sin_t[j] = std::sin(theta);
    out.weight[j] = ht * rule.weights[j];
  }
}

// Fixed-order rule for Int (r - r') / |r - r'|^3 da' over one patch. The
// inner loop is split so the sqrt/division pass has no reduction in it.
inline Vec3 charge_field_rule(const PolarPatch& patch, const Vec3& r, int order_r,
                              int order_t) {
  thread_local AngularNodes ang;
  thread_local std::vector<double> q, dxs, dys;
  fill_angular(patch, order_t, ang);
  q.resize(order_t);
  dxs.resize(order_t);
  dys.resize(order_t);
  const GaussRule& rr = gauss_legendre(order_r);
  const double hr = 0.5 * (patch.r_max - patch.r_min);
  const double cr = 0.5 * (patch.r_max + patch.r_min);
  const double dz = r.z() - patch.z_plane;
  const double dz2 = dz * dz;
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (int i = 0; i < order_r; ++i) {
    const double rho = cr + hr * rr.nodes[i];
    for (int j = 0; j < order_t; ++j) {
      const double dx = r.x() - rho * ang.cos_t[j];
      const double dy = r.y() - rho * ang.sin_t[j];
      const double d2 = dx * dx + dy * dy + dz2;
      q[j] = ang.weight[j] / (d2 * std::sqrt(d2));
      dxs[j] = dx;
      dys[j] = dy;
    }
    double ax = 0.0, ay = 0.0, a0 = 0.0;
    for (int j = 0; j < order_t; ++j) {
      ax += q[j] * dxs[j];
      ay += q[j] * dys[j];
      a0 += q[j];
    }
    const double w = hr * rr.weights[i] * rho;
    sx += w * ax;
    sy += w * ay;
    sz += w * a0;
  }
  return {sx, sy, sz * dz};
}

// Field and Jacobian together: Int d/|d|^3 and Int (I/|d|^3 - 3 d d^T/|d|^5).
struct ChargeJet {
  Vec3 field = Vec3::Zero();
  Mat3 jacobian = Mat3::Zero();

  ChargeJet& operator+=(const ChargeJet& o) {
    field += o.field;
    jacobian += o.jacobian;
    return *this;
  }
};

inline double jet_relative_change(const ChargeJet& coarse, const ChargeJet& fine) {
  auto rel = [](double diff, double scale) { return scale > 0.0 ? diff / scale : diff; };
  return std::max(rel((coarse.field - fine.field).norm(), fine.field.norm()),
                  rel((coarse.jacobian - fine.jacobian).norm(), fine.jacobian.norm()));
}

inline ChargeJet charge_jet_rule(const PolarPatch& patch, const Vec3& r, int order_r,
                                 int order_t) {
  thread_local AngularNodes ang;
  thread_local std::vector<double> q3, q5, dxs, dys;
  fill_angular(patch, order_t, ang);
  q3.resize(order_t);
  q5.resize(order_t);
  dxs.resize(order_t);
  dys.resize(order_t);
  const GaussRule& rr = gauss_legendre(order_r);
  const double hr = 0.5 * (patch.r_max - patch.r_min);
  const double cr = 0.5 * (patch.r_max + patch.r_min);
  const double dz = r.z() - patch.z_plane;
  const double dz2 = dz * dz;
  // s3*: weights 1/|d|^3, s5*: weights 1/|d|^5
  double s3 = 0, s3x = 0, s3y = 0, s5 = 0, s5x = 0, s5y = 0, s5xx = 0, s5yy = 0, s5xy = 0;
  for (int i = 0; i < order_r; ++i) {
    const double rho = cr + hr * rr.nodes[i];
    for (int j = 0; j < order_t; ++j) {
      const double dx = r.x() - rho * ang.cos_t[j];
      const double dy = r.y() - rho * ang.sin_t[j];
      const double d2 = dx * dx + dy * dy + dz2;
      const double inv3 = ang.weight[j] / (d2 * std::sqrt(d2));
      q3[j] = inv3;
      q5[j] = inv3 / d2;
      dxs[j] = dx;
      dys[j] = dy;
    }
    double a3 = 0, a3x = 0, a3y = 0, a5 = 0, a5x = 0, a5y = 0, a5xx = 0, a5yy = 0, a5xy = 0;
    for (int j = 0; j < order_t; ++j) {
      a3 += q3[j];
      a3x += q3[j] * dxs[j];
      a3y += q3[j] * dys[j];
      a5 += q5[j];
      a5x += q5[j] * dxs[j];
      a5y += q5[j] * dys[j];
      a5xx += q5[j] * dxs[j] * dxs[j];
      a5yy += q5[j] * dys[j] * dys[j];
      a5xy += q5[j] * dxs[j] * dys[j];
    }
    const double w = hr * rr.weights[i] * rho;
    s3 += w * a3;
    s3x += w * a3x;
    s3y += w * a3y;
    s5 += w * a5;
    s5x += w * a5x;
    s5y += w * a5y;
    s5xx += w * a5xx;
    s5yy += w * a5yy;
    s5xy += w * a5xy;
  }
  ChargeJet jet;
  jet.field = {s3x, s3y, s3 * dz};
  const double xz = s5x * dz;
  const double yz = s5y * dz;
  const double zz = s5 * dz2;
  jet.jacobian << s3 - 3.0 * s5xx, -3.0 * s5xy, -3.0 * xz,
                  -3.0 * s5xy, s3 - 3.0 * s5yy, -3.0 * yz,
                  -3.0 * xz, -3.0 * yz, s3 - 3.0 * zz;
  return jet;
}

}  // namespace detail

/// Field of arbitrary charged patches, no bias and no domain checks.
inline Vec3 charge_field(std::span<const PolarPatch> patches, double mu0_M, const Vec3& r,
                         const QuadratureSpec& spec) {
  Vec3 sum = Vec3::Zero();
  for (const auto& patch : patches) {
    auto rule = [&](int nr, int nt) { return detail::charge_field_rule(patch, r, nr, nt); };
    sum += patch.charge_sign * refine(spec, rule).value;
  }
  return mu0_M / (4.0 * std::numbers::pi) * sum;
}

/// Field and Jacobian of charged patches, no bias and no domain checks.
inline detail::ChargeJet charge_jet(std::span<const PolarPatch> patches, double mu0_M,
                                    const Vec3& r, const QuadratureSpec& spec) {
  detail::ChargeJet sum;
  for (const auto& patch : patches) {
    auto rule = [&](int nr, int nt) { return detail::charge_jet_rule(patch, r, nr, nt); };
    detail::ChargeJet part = refine(spec, rule, detail::jet_relative_change).value;
    if (patch.charge_sign < 0) {
      part.field = -part.field;
      part.jacobian = -part.jacobian;
    }
    sum += part;
  }
  const double k = mu0_M / (4.0 * std::numbers::pi);
  sum.field *= k;
  sum.jacobian *= k;
  return sum;
}

/// Throws PreconditionError when r is inside the body or closer than
/// min_surface_distance to either charged face.
inline void check_evaluation_point(const LensGeometry& g, const Vec3& r) {
  if (!r.allFinite()) throw PreconditionError("evaluation point is not finite");
  const double planar = distance_to_footprint(g, Vec2{r.x(), r.y()});
  const double z_top = 0.0;
  const double z_bottom = -g.thickness;
  if (planar == 0.0 && r.z() < z_top && r.z() > z_bottom)
    throw PreconditionError("evaluation point lies inside the magnet body");
  for (double z_face : {z_top, z_bottom}) {
    const double dz = r.z() - z_face;
    const double d = std::sqrt(planar * planar + dz * dz);
    if (d < min_surface_distance) {
      std::ostringstream msg;
      msg << "evaluation point too close to a charged face: " << d / units::nm
          << " nm < " << min_surface_distance / units::nm << " nm";
      throw PreconditionError(msg.str());
    }
  }
}

inline FieldSample field_at(const LensGeometry& g, const BiasField& bias, const Vec3& r,
                            const QuadratureSpec& spec) {
  detail::check_spec(spec);
  check_evaluation_point(g, r);
  const auto patches = decompose(g);
  Vec3 b = charge_field(patches, g.mu0_M, r, spec);
  b.z() += bias.b_bias_z;
  return FieldSample::make(r, b);
}

/// The bias field is uniform and adds nothing to the Jacobian.
inline GradientTensor jacobian_at(const LensGeometry& g, const BiasField& /*bias*/,
                                  const Vec3& r, const QuadratureSpec& spec) {
  detail::check_spec(spec);
  check_evaluation_point(g, r);
  const auto patches = decompose(g);
  return {charge_jet(patches, g.mu0_M, r, spec).jacobian, Frame::lab};
}

struct FieldWithJacobian {
  FieldSample sample;
  GradientTensor jacobian;
};

/// One quadrature pass for both the field and its Jacobian.
inline FieldWithJacobian field_and_jacobian_at(const LensGeometry& g, const BiasField& bias,
                                               const Vec3& r, const QuadratureSpec& spec) {
  detail::check_spec(spec);
  check_evaluation_point(g, r);
  const auto patches = decompose(g);
  const detail::ChargeJet jet = charge_jet(patches, g.mu0_M, r, spec);
  Vec3 b = jet.field;
  b.z() += bias.b_bias_z;
  return {FieldSample::make(r, b), {jet.jacobian, Frame::lab}};
}

/// A plane through `origin` spanned by orthonormal u and v axes.
struct PlaneSpec {
  Vec3 origin = Vec3::Zero();
  Vec3 u_axis = Vec3::UnitX();
  Vec3 v_axis = Vec3::UnitZ();

  Vec3 point(double u, double v) const { return origin + u * u_axis + v * v_axis; }

  /// Vertical plane containing z and the horizontal direction at `angle`.
  static PlaneSpec vertical(double angle, const Vec3& origin) {
    return {origin, Vec3{std::cos(angle), std::sin(angle), 0.0}, Vec3::UnitZ()};
  }

  /// Horizontal plane at the height of `origin`.
  static PlaneSpec horizontal(double angle, const Vec3& origin) {
    return {origin, Vec3{std::cos(angle), std::sin(angle), 0.0},
            Vec3{-std::sin(angle), std::cos(angle), 0.0}};
  }

  void validate() const {
    constexpr double tol = 1e-12;
    if (std::abs(u_axis.norm() - 1.0) > tol || std::abs(v_axis.norm() - 1.0) > tol ||
        std::abs(u_axis.dot(v_axis)) > tol)
      throw PreconditionError("plane axes must be orthonormal");
  }
};

/// In-plane rectangle, plane coordinates in meters.
struct GridWindow {
  double u_min = 0.0;
  double u_max = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;

  static GridWindow centered(double width) {
    return {-0.5 * width, 0.5 * width, -0.5 * width, 0.5 * width};
  }
};

/// Row-major samples: index = iv * n_u + iu.
struct FieldGrid {
  PlaneSpec plane;
  GridWindow window;
  int n_u = 0;
  int n_v = 0;
  std::vector<FieldSample> samples;

  double u_at(int iu) const {
    return n_u == 1 ? window.u_min
                    : window.u_min + (window.u_max - window.u_min) * iu / (n_u - 1);
  }
  double v_at(int iv) const {
    return n_v == 1 ? window.v_min
                    : window.v_min + (window.v_max - window.v_min) * iv / (n_v - 1);
  }
  const FieldSample& at(int iu, int iv) const { return samples[iv * n_u + iu]; }
};

/// Samples field_at over a plane; points are evaluated in parallel and stored
/// in a fixed order, so the result is deterministic.
inline FieldGrid field_grid(const LensGeometry& g, const BiasField& bias, const PlaneSpec& plane,
                            const GridWindow& window, int n_u, int n_v,
                            const QuadratureSpec& spec) {
  plane.validate();
  if (n_u < 1 || n_v < 1) throw PreconditionError("field_grid: grid sizes must be >= 1");
  FieldGrid grid{plane, window, n_u, n_v, {}};
  grid.samples.resize(static_cast<std::size_t>(n_u) * n_v);
  // Validate every point up front so a bad window fails before any work.
  for (int iv = 0; iv < n_v; ++iv)
    for (int iu = 0; iu < n_u; ++iu) check_evaluation_point(g, plane.point(grid.u_at(iu), grid.v_at(iv)));
  parallel_for(grid.samples.size(), [&](std::size_t k) {
    const int iu = static_cast<int>(k % n_u);
    const int iv = static_cast<int>(k / n_u);
    grid.samples[k] = field_at(g, bias, plane.point(grid.u_at(iu), grid.v_at(iv)), spec);
  });
  return grid;
}

}  // namespace nanolens
