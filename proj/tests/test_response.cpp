#include <cmath>

#include <gtest/gtest.h>

#include "photoncond/response.hpp"

using namespace photoncond;

namespace {

const Eigen::Vector3d kX = Eigen::Vector3d::UnitX();

// Second difference of the ground energy of H_m - E d_i.
double finite_field_alpha(const MatterModel& m, int i, double field) {
  auto e0 = [&](double f) { return eigh_lowest(Operator(m.h_m.matrix() - f * m.dipole[i].matrix(), true), 1).values(0); };
  return -(e0(field) - 2.0 * e0(0.0) + e0(-field)) / (field * field);
}

} // namespace

TEST(Lehmann, ZeroOperatorGivesZero) {
  const MatterSpectrum sp = matter_spectrum(build_two_level_ensemble(3, 1.0, {0, 0, 0.2}, 1.0));
  const cmat z = cmat::Zero(4, 4);
  EXPECT_EQ(lehmann_sum(sp, z, z), cplx(0));
  const MatterSpectrum zero_d = matter_spectrum(build_two_level_ensemble(3, 1.0, Eigen::Vector3d::Zero(), 1.0));
  EXPECT_EQ(slrf(zero_d, "pt", "pt", 0).chi.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lehmann, TwoLevelPolarization) {
  const double gap = 0.8, d = 0.3, V = 2.0;
  const int N = 5;
  const MatterSpectrum sp = matter_spectrum(build_two_level_ensemble(N, gap, {0, 0, d}, V));
  SlrfTensor t = slrf(sp, "pt", "pt", 0);
  // -2V |<1|d_z/V|0>|^2 / gap with |<1|d_z|0>|^2 = N d^2
  EXPECT_NEAR(t.chi(2, 2).real(), -2.0 * N * d * d / (V * gap), 1e-14);
  const TransverseProjection p = transverse_project(t, make_mode(kX, 1.0, V));
  EXPECT_NEAR(p.scalar, -2.0 * N * d * d / (V * gap), 1e-14);
  EXPECT_EQ(p.second, 0.0);
  EXPECT_FALSE(p.isotropic);
  EXPECT_FALSE(t.transverse_scalar.has_value());
}

TEST(Lehmann, CoulombCancellationHarmonic) {
  const double e = 1.0, mass = 1.0, V = 1.0, nu = 1.3;
  const MatterSpectrum sp = matter_spectrum(build_anharmonic_dipole(60, mass, 1.0, 0.0, e, V));
  SlrfTensor t = slrf(sp, "jp", "jp", 0);
  // chi^{MpMp}_T = V^2 chi^{jj} / (V nu)^2 along the polarization
  const double chi_mpmp = t.chi(2, 2).real() / (nu * nu);
  EXPECT_NEAR(chi_mpmp, chi_md(e, mass, 1.0, V, nu), 1e-8);
}

TEST(Lehmann, CoulombCancellationConvergesWithLevels) {
  const double nu = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int D : {20, 40, 60}) {
    const MatterSpectrum sp = matter_spectrum(build_anharmonic_dipole(D, 1.0, 1.0, 0.1, 1.0, 1.0));
    const double diff = std::abs(slrf(sp, "jp", "jp", 0).chi(2, 2).real() / (nu * nu) - chi_md(1.0, 1.0, 1.0, 1.0, nu));
    EXPECT_LE(diff, std::max(prev, 1e-12)) << D;
    prev = diff;
  }
  EXPECT_LE(prev, 1e-7);
}

TEST(Lehmann, DegenerateGroundRejected) {
  MatterModel m = build_two_level_ensemble(1, 1.0, {0, 0, 0.2}, 1.0);
  m.h_m = Operator::zero(2);
  EXPECT_THROW(slrf(matter_spectrum(m), "pt", "pt", 0), UnsupportedError);
}

TEST(Lehmann, LabelErrors) {
  const MatterSpectrum sp = matter_spectrum(build_two_level_ensemble(2, 1.0, {0, 0, 0.2}, 1.0));
  EXPECT_THROW(slrf(sp, "xx", "pt", 0), ArgumentError);
  EXPECT_THROW(slrf(sp, "pt", "pt", 1), ArgumentError);
}

TEST(Lehmann, SameOperatorResponseIsNegative) {
  const MatterSpectrum a = matter_spectrum(build_anharmonic_dipole(20, 1.0, 1.0, 0.3, 1.0, 1.0, 1));
  const MatterSpectrum r = matter_spectrum(build_ring_lattice(7, 1.0, 1.0));
  for (const char* label : {"jp", "pt"}) {
    const SlrfTensor t = slrf(a, label, label, 0);
    for (int i = 0; i < 3; ++i) EXPECT_LE(t.chi(i, i).real(), 1e-12);
    for (int q = 1; q < 7; ++q) EXPECT_LE(slrf(r, label, label, q).chi(0, 0).real(), 1e-12);
  }
}

TEST(Lehmann, Reciprocity) {
  const MatterSpectrum r = matter_spectrum(build_ring_lattice(6, 1.0, 1.3, {1.0, 1.2, 0.9, 1.0, 1.1, 1.0}));
  for (int q = 1; q < 6; ++q) {
    const cplx a = slrf_cross(r, "pt", q, "pt", q).chi(0, 0);
    const cplx b = slrf_cross(r, "pt", -q, "pt", -q).chi(0, 0);
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12) << q;
  }
}

TEST(Transverse, IsotropicOscillator) {
  const MatterSpectrum sp = matter_spectrum(build_anharmonic_dipole(8, 1.0, 1.0, 0.2, 1.0, 1.0, 3));
  for (const Eigen::Vector3d& q : {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 2, -0.5)}) {
    SlrfTensor t = slrf(sp, "pt", "pt", 0);
    const TransverseProjection p = transverse_project(t, make_mode(q, 1.0, 1.0));
    EXPECT_LE(p.off_diag, 1e-12);
    EXPECT_TRUE(p.isotropic);
    ASSERT_TRUE(t.transverse_scalar.has_value());
    EXPECT_NEAR(*t.transverse_scalar, t.chi(0, 0).real(), 1e-12);
  }
}

TEST(Transverse, SingleAxisPerpendicularToQ) {
  const MatterSpectrum sp = matter_spectrum(build_anharmonic_dipole(20, 1.0, 1.0, 0.1, 1.0, 1.0));
  SlrfTensor t = slrf(sp, "pt", "pt", 0);
  const TransverseProjection p = transverse_project(t, make_mode(kX, 1.0, 1.0));
  EXPECT_NEAR(p.scalar, t.chi(2, 2).real(), 1e-15);
}

TEST(Transverse, AnisotropicRefused) {
  const MatterSpectrum sp = matter_spectrum(build_two_level_ensemble(2, 1.0, {0.3, 0.1, 0}, 1.0));
  SlrfTensor t = slrf(sp, "pt", "pt", 0);
  const TransverseProjection p = transverse_project(t, make_mode({0, 0, 1}, 1.0, 1.0));
  EXPECT_FALSE(p.isotropic);
  EXPECT_GT(std::abs(p.scalar - p.second), 1e-3);
  EXPECT_FALSE(t.transverse_scalar.has_value());
}

TEST(ChiMd, ClosedForm) {
  EXPECT_DOUBLE_EQ(chi_md(1, 1, 8, 8, 1), -1.0);
  EXPECT_EQ(chi_md(1, 1, 0, 8, 1), 0.0);
  EXPECT_DOUBLE_EQ(chi_md(1, 1, 8, 8, 2), -0.25);
  EXPECT_THROW(chi_md(1, 1, 8, 8, 0), ArgumentError);
}

TEST(Polarizability, TwoLevel) {
  const MatterModel m = build_two_level_ensemble(1, 1.0, {0, 0, 0.3}, 1.0);
  const Eigen::Matrix3d a = polarizability(matter_spectrum(m), 0.0);
  EXPECT_NEAR(a(2, 2), 0.18, 1e-15);
  EXPECT_NEAR(a(2, 2), finite_field_alpha(m, 2, 1e-4), 1e-6);
  EXPECT_EQ(a(0, 0), 0.0);
}

TEST(Polarizability, ZeroDipole) {
  const Eigen::Matrix3d a = polarizability(matter_spectrum(build_two_level_ensemble(2, 1.0, Eigen::Vector3d::Zero(), 1.0)), 0.0);
  EXPECT_EQ(a.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Polarizability, HarmonicOscillator) {
  const MatterModel m = build_anharmonic_dipole(60, 1.0, 1.0, 0.0, 1.0, 1.0);
  const Eigen::Matrix3d a = polarizability(matter_spectrum(m), 0.0);
  EXPECT_NEAR(a(2, 2), 1.0, 1e-8);
  EXPECT_NEAR(a(2, 2), finite_field_alpha(m, 2, 1e-4), 1e-6);
}

TEST(Polarizability, AnharmonicMatchesFiniteField) {
  const MatterModel m = build_anharmonic_dipole(60, 1.0, 1.0, 0.1, 1.0, 1.0);
  EXPECT_NEAR(polarizability(matter_spectrum(m), 0.0)(2, 2), finite_field_alpha(m, 2, 1e-4), 1e-6);
}

TEST(Polarizability, Dynamic) {
  const MatterSpectrum sp = matter_spectrum(build_two_level_ensemble(1, 1.0, {0, 0, 0.3}, 1.0));
  // 0.09 (1/(1 - w) + 1/(1 + w))
  EXPECT_NEAR(polarizability(sp, 0.5)(2, 2), 0.09 * (2.0 + 2.0 / 3.0), 1e-14);
  EXPECT_THROW(polarizability(sp, 1.0), ArgumentError);
}

TEST(Polarizability, IdentityWithTransverseResponse) {
  for (const MatterModel& m :
       {build_two_level_ensemble(4, 0.9, {0, 0, 0.25}, 1.7), build_anharmonic_dipole(40, 1.0, 1.0, 0.0, 1.0, 1.3)}) {
    const MatterSpectrum sp = matter_spectrum(m);
    const ModeSpec mode = make_mode(kX, 1.0, sp.V);
    SlrfTensor t = slrf(sp, "pt", "pt", 0);
    const Eigen::Matrix3d a = polarizability(sp, 0.0);
    for (int s = 0; s < 2; ++s) {
      const Eigen::Vector3cd e = mode.eps[s].cast<cplx>();
      EXPECT_NEAR(-sp.V * e.dot(t.chi * e).real(), mode.eps[s].dot(a * mode.eps[s]), 1e-10);
    }
  }
}

TEST(Translational, CleanRing) {
  const MatterSpectrum sp = matter_spectrum(build_ring_lattice(6, 1.0, 1.0));
  EXPECT_LE(check_translational_invariance(sp, 1, 2), 1e-10);
  for (int q = 0; q < 6; ++q)
    for (int q2 = 0; q2 < 6; ++q2)
      if (q != q2) {
        EXPECT_LE(check_translational_invariance(sp, q, q2), 1e-10) << q << " " << q2;
      }
  EXPECT_GT(check_translational_invariance(sp, 1, 1), 0.1);
}

TEST(Translational, DisorderedRingLeaks) {
  const MatterSpectrum sp = matter_spectrum(build_ring_lattice(6, 1.0, 1.0, {1.3, 1, 1, 1, 1, 1}));
  const double r = check_translational_invariance(sp, 1, 2);
  std::printf("disordered ring cross-momentum response %.3e\n", r);
  EXPECT_GT(r, 1e-6);
}
