#pragma once

// Resonance observables: Larmor frequency, force on a moment, selectivity.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nanolens/analysis.hpp"
#include "nanolens/errors.hpp"
#include "nanolens/fieldsolver.hpp"
#include "nanolens/units.hpp"

namespace nanolens {

struct SpinSpecies {
  std::string name;
  double gamma_over_2pi = 0.0;  ///< Hz/T
  double moment = 0.0;          ///< |m|, J/T

  void validate() const {
    if (!(gamma_over_2pi > 0.0))
      throw PreconditionError("species " + name + ": gamma_over_2pi must be > 0");
  }

  static SpinSpecies proton() { return {"proton", 42.5775e6, 1.41060679736e-26}; }
  static SpinSpecies electron() { return {"electron", 28.0249e9, 9.2847647043e-24}; }

  bool operator==(const SpinSpecies&) const = default;
};

struct SpinMoment {
  Vec3 m = Vec3::Zero();  ///< J/T
};

/// Linear resonance frequency f = (gamma / 2 pi) |B| in Hz.
inline double larmor_frequency(const SpinSpecies& species, const FieldSample& sample) {
  return species.gamma_over_2pi * sample.magnitude;
}

/// omega = 2 pi f, rad/s.
inline double angular_frequency(double frequency_hz) { return 2.0 * std::numbers::pi * frequency_hz; }

/// F_i = sum_j m_j dB_j/dx_i, i.e. J^T m, in N.
inline Vec3 force_on_spin(const SpinMoment& moment, const GradientTensor& tensor) {
  return tensor.entries.transpose() * moment.m;
}

struct SelectivityReport {
  std::string species;
  double linewidth = 0.0;     ///< T
  double center_level = 0.0;  ///< T, b_min + linewidth / 2
  FocusReport focus;
  double focus_frequency = 0.0;  ///< Hz
  ShellExtents shell;
  std::array<double, 3> frequency_gradient{};  ///< Hz/m, mean of the +/-1 nm offsets
  std::array<int, 3> lattice_sites{};          ///< 0.1 nm sites inside the shell per axis
  std::array<double, 3> detuning_at_5nm{};     ///< min over +/-5 nm of ||B| - c| / linewidth
};

struct SelectivityOptions {
  double gradient_offset = 1.0 * units::nm;
  double lattice_spacing = 0.1 * units::nm;
  double detuning_offset = 5.0 * units::nm;
  ShellScanOptions scan;
};

inline SelectivityReport selectivity_report(const LensGeometry& g, const BiasField& bias,
                                            const SpinSpecies& species, double linewidth,
                                            const FocusOptions& focus_options,
                                            const QuadratureSpec& spec,
                                            const SelectivityOptions& opt = {}) {
  species.validate();
  if (!(linewidth > 0.0)) throw PreconditionError("selectivity: linewidth must be > 0");
  SelectivityReport out;
  out.species = species.name;
  out.linewidth = linewidth;
  out.focus = find_focus(g, bias, focus_options, spec);
  if (out.focus.classification != Classification::minimum)
    throw AnalysisError("selectivity: no |B| minimum at this bias");
  out.center_level = out.focus.b_min + 0.5 * linewidth;
  out.focus_frequency = species.gamma_over_2pi * out.focus.b_min;
  out.shell = resonant_shell_extent(g, bias, out.focus, out.center_level, linewidth, spec, opt.scan);

  const int half_sites = static_cast<int>(std::llround(opt.scan.half_length / opt.lattice_spacing));
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3& dir = out.shell.axes[axis];
    double grad = 0.0;
    for (double sign : {-1.0, 1.0}) {
      const auto fj = field_and_jacobian_at(g, bias, out.focus.position + sign * opt.gradient_offset * dir, spec);
      grad += 0.5 * species.gamma_over_2pi * magnitude_gradient(fj).norm();
    }
    out.frequency_gradient[axis] = grad;

    int sites = 0;
    for (int k = -half_sites; k <= half_sites; ++k) {
      const double m = field_at(g, bias, out.focus.position + (k * opt.lattice_spacing) * dir, spec).magnitude;
      if (std::abs(m - out.center_level) < 0.5 * linewidth) ++sites;
    }
    out.lattice_sites[axis] = sites;

    double detuning = std::numeric_limits<double>::infinity();
    for (double sign : {-1.0, 1.0}) {
      const double m = field_at(g, bias, out.focus.position + sign * opt.detuning_offset * dir, spec).magnitude;
      detuning = std::min(detuning, std::abs(m - out.center_level) / linewidth);
    }
    out.detuning_at_5nm[axis] = detuning;
  }
  return out;
}

}  // namespace nanolens
