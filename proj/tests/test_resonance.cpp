#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nanolens/resonance.hpp"

using namespace nanolens;
using std::numbers::pi;

namespace {

const LensGeometry lens;
const QuadratureSpec spec;

FieldSample sample_with(double tesla) { return FieldSample::make(Vec3::Zero(), Vec3{0, 0, tesla}); }

}  // namespace

TEST(Larmor, ProtonAtOneHundredGauss) {
  EXPECT_NEAR(larmor_frequency(SpinSpecies::proton(), sample_with(100 * units::gauss)), 425.775e3, 1e-6);
  EXPECT_EQ(larmor_frequency(SpinSpecies::electron(), sample_with(0.0)), 0.0);
}

TEST(Larmor, LinearInFieldAndGamma) {
  const SpinSpecies p = SpinSpecies::proton();
  const double f1 = larmor_frequency(p, sample_with(0.01));
  EXPECT_NEAR(larmor_frequency(p, sample_with(0.03)), 3 * f1, 1e-9 * f1);
  SpinSpecies twice = p;
  twice.gamma_over_2pi *= 2;
  EXPECT_NEAR(larmor_frequency(twice, sample_with(0.01)), 2 * f1, 1e-9 * f1);
  // Direction does not matter, only |B|.
  EXPECT_NEAR(larmor_frequency(p, FieldSample::make(Vec3::Zero(), Vec3{0.006, -0.008, 0})), f1, 1e-9 * f1);
}

TEST(Larmor, AngularFrequencyIsTwoPiF) {
  EXPECT_NEAR(angular_frequency(425.775e3), 2 * pi * 425.775e3, 1e-6);
}

TEST(Larmor, ProtonAtTheFocus) {
  const FieldSample s = field_at(lens, BiasField{}, Vec3{0, 0, 23.8e-9}, spec);
  const double f = larmor_frequency(SpinSpecies::proton(), s);
  EXPECT_NEAR(f / units::kHz, 423.6, 9.0);
  EXPECT_GE(f / units::kHz, 415.0);
  EXPECT_LE(f / units::kHz, 433.0);
}

TEST(Species, Validation) {
  SpinSpecies s{"bad", 0.0, 1.0};
  EXPECT_THROW(s.validate(), PreconditionError);
  EXPECT_NO_THROW(SpinSpecies::proton().validate());
}

TEST(Force, ZAlignedMomentFeelsNoForceAtFocus) {
  const FocusReport f = find_focus(lens, BiasField{}, FocusOptions{}, spec);
  const GradientTensor j = jacobian_at(lens, BiasField{}, f.position, spec);
  const SpinMoment m{Vec3{0, 0, SpinSpecies::proton().moment}};
  const Vec3 force = force_on_spin(m, j);
  // Compared with the eigenvalue scale |m| * 2.5 G/A.
  EXPECT_LT(force.norm(), 1e-6 * SpinSpecies::proton().moment * j.max_abs_entry());
}

TEST(Force, AlongTheNegativeEigenvector) {
  const FocusReport f = find_focus(lens, BiasField{}, FocusOptions{}, spec);
  const TensorReport t = focus_tensor(lens, BiasField{}, f.position, spec);
  const double moment = SpinSpecies::proton().moment;
  const SpinMoment m{moment * t.eigenvectors.col(2)};
  const Vec3 force = force_on_spin(m, t.lab);
  EXPECT_NEAR(force.norm(), moment * std::abs(t.eigenvalues[2]), 1e-6 * force.norm());
  // With the paper's round 2.5 G/A: 1.4106e-26 * 2.5e6 = 3.53e-20 N.
  EXPECT_NEAR(force.norm(), 3.53e-20, 0.2e6 * moment);
  EXPECT_NEAR(force.norm(), 3.4473e-20, 1e-24);
}

TEST(Force, LinearAndTransposed) {
  GradientTensor j;
  j.entries << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const SpinMoment a{Vec3{1, 0, 0}};
  const SpinMoment b{Vec3{0, 2, -1}};
  EXPECT_EQ(force_on_spin(a, j), Vec3(1, 2, 3));
  const SpinMoment sum{a.m + b.m};
  EXPECT_EQ(force_on_spin(sum, j), force_on_spin(a, j) + force_on_spin(b, j));
  EXPECT_EQ(force_on_spin(a, GradientTensor{}), Vec3::Zero());
}

TEST(Selectivity, DefaultReport) {
  const SelectivityReport r = selectivity_report(lens, BiasField{}, SpinSpecies::proton(), 1.0 * units::gauss,
                                                 FocusOptions{}, spec);
  EXPECT_EQ(r.species, "proton");
  EXPECT_NEAR(r.center_level, r.focus.b_min + 0.5e-4, 1e-15);
  EXPECT_NEAR(r.focus_frequency / units::kHz, 423.78, 0.01);
  // Frozen: 0.99, 1.63 and 3.60 nm; the stiff +45 deg axis is just under 1 nm.
  EXPECT_NEAR(r.shell.extents[0] / units::nm, 0.99, 0.011);
  EXPECT_NEAR(r.shell.extents[1] / units::nm, 1.63, 0.011);
  EXPECT_NEAR(r.shell.extents[2] / units::nm, 3.60, 0.011);
  // 0.1 nm lattice sites inside the shell track the extents.
  EXPECT_EQ(r.lattice_sites[0], 9);
  EXPECT_EQ(r.lattice_sites[1], 17);
  EXPECT_EQ(r.lattice_sites[2], 36);
  for (int k = 0; k < 3; ++k) EXPECT_GT(r.frequency_gradient[k], 0.0);
  EXPECT_GT(r.frequency_gradient[0], r.frequency_gradient[1]);
  EXPECT_GT(r.frequency_gradient[1], r.frequency_gradient[2]);
  // Transverse spins 5 nm away are far off resonance; along z only about 7.
  EXPECT_GT(r.detuning_at_5nm[0], 10.0);
  EXPECT_GT(r.detuning_at_5nm[1], 10.0);
  EXPECT_NEAR(r.detuning_at_5nm[2], 6.86, 0.05);
}

TEST(Selectivity, Errors) {
  EXPECT_THROW(selectivity_report(lens, BiasField{}, SpinSpecies::proton(), 0.0, FocusOptions{}, spec), PreconditionError);
  EXPECT_THROW(selectivity_report(lens, BiasField{-400 * units::gauss}, SpinSpecies::proton(), 1e-4, FocusOptions{}, spec),
               AnalysisError);
}
