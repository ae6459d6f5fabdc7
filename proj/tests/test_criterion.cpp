#include <cmath>

#include <gtest/gtest.h>

#include "photoncond/criterion.hpp"
#include "photoncond/oracle.hpp"

using namespace photoncond;

namespace {

const Eigen::Vector3d kX = Eigen::Vector3d::UnitX();

struct Case {
  MatterModel model;
  GaugeSpec gauge;
  ModeSpec mode;
  MatterSpectrum sp;
  BogoliubovBlock block;
};

Case setup(MatterModel m, GaugeSpec g, ModeSpec mode) {
  MatterSpectrum sp = matter_spectrum(m, gauge_matter_hamiltonian(m, g));
  BogoliubovBlock b = diagonalize_block(diamagnetic_D(m, g, mode), mode.nu);
  return {std::move(m), g, mode, std::move(sp), b};
}

std::array<CriterionReport, 2> run(const Case& s) { return evaluate(s.model, s.gauge, s.mode, s.block, s.sp); }

Case two_level(int N, double d, GaugeSpec g) {
  return setup(build_two_level_ensemble(N, 1.0, {0, 0, d}, 1.0), g, make_mode(kX, 1.0, 1.0));
}

} // namespace

TEST(Evaluate, TwoLevelDipoleBelowThreshold) {
  const auto r = run(two_level(4, 0.3, make_gauge(GaugePreset::Dipole)));
  EXPECT_NEAR(r[0].lhs, 2 * 4 * 0.09, 1e-12);
  EXPECT_EQ(r[0].rhs, 1.0);
  EXPECT_FALSE(r[0].condensed);
  EXPECT_NEAR(r[0].electric_part, r[0].lhs, 1e-15);
  EXPECT_EQ(r[0].magnetic_part, 0.0);
  EXPECT_NEAR(r[1].lhs, 0.0, 1e-15);
  EXPECT_FALSE(r[1].condensed);
  EXPECT_EQ(r[0].beta, 0.0);
}

TEST(Evaluate, TwoLevelDipoleAboveThreshold) {
  const auto r = run(two_level(4, 0.4, make_gauge(GaugePreset::Dipole)));
  EXPECT_NEAR(r[0].lhs, 1.28, 1e-12);
  EXPECT_TRUE(r[0].condensed);
  EXPECT_NEAR(r[0].margin, 0.28, 1e-12);
  EXPECT_FALSE(r[1].condensed);
}

TEST(Evaluate, CoulombLongWavelengthNeverCondenses) {
  // The paramagnetic response cancels the diamagnetic term, so lhs = lambda^2 - 1 and the margin is -1.
  for (double e : {0.1, 1.0, 10.0, 100.0}) {
    const Case s = setup(build_anharmonic_dipole(60, 1.0, 1.0, 0.0, e, 1.0), make_gauge(GaugePreset::Coulomb), make_mode(kX, 1.0, 1.0));
    const auto r = run(s);
    for (int t = 0; t < 2; ++t) {
      EXPECT_GE(r[t].rhs, 1.0);
      EXPECT_NEAR(r[t].lhs, r[t].rhs - 1.0, 1e-7 * r[t].rhs) << e;
      EXPECT_FALSE(r[t].condensed);
      EXPECT_EQ(r[t].electric_part, 0.0);
    }
  }
}

TEST(Evaluate, ZeroCoupling) {
  for (auto p : {GaugePreset::Coulomb, GaugePreset::Dipole}) {
    const auto r = run(two_level(3, 0.0, make_gauge(p)));
    for (int t = 0; t < 2; ++t) {
      EXPECT_EQ(r[t].lhs, 0.0);
      EXPECT_EQ(r[t].rhs, 1.0);
      EXPECT_FALSE(r[t].condensed);
    }
  }
}

TEST(Evaluate, QuadratureEigenvalueAndMarginSign) {
  for (double a : {0.0, 0.3, 0.7, 1.0}) {
    const auto r = run(two_level(5, 0.25, make_gauge(GaugePreset::AlphaLWL, true, a)));
    for (const auto& c : r) {
      ASSERT_TRUE(c.self_conjugate);
      const double mu = c.lhs / c.rhs;
      EXPECT_NEAR((c.magnetic_part / c.rhs - mu) * (c.electric_part - mu) - c.interference * c.interference / c.rhs, 0.0, 1e-12);
      EXPECT_GE(mu, std::max(c.magnetic_part / c.rhs, c.electric_part) - 1e-15);
      EXPECT_EQ(c.condensed, c.margin > kCondensedMargin);
      EXPECT_EQ(c.margin, c.lhs - c.rhs);
    }
  }
}

TEST(Evaluate, GaugeSeparatesElectricAndMagnetic) {
  const MatterModel m = build_anharmonic_dipole(30, 1.0, 1.0, 0.1, 1.5, 1.0);
  const auto c = run(setup(m, make_gauge(GaugePreset::Coulomb), make_mode(kX, 1.0, 1.0)));
  const auto d = run(setup(m, make_gauge(GaugePreset::Dipole), make_mode(kX, 1.0, 1.0)));
  for (int t = 0; t < 2; ++t) {
    EXPECT_EQ(c[t].electric_part, 0.0);
    EXPECT_EQ(c[t].interference, 0.0);
    EXPECT_EQ(d[t].magnetic_part, 0.0);
    EXPECT_EQ(d[t].interference, 0.0);
  }
  EXPECT_GT(c[0].magnetic_part, 0.1);
  EXPECT_GT(d[0].electric_part, 0.1);
}

TEST(Evaluate, AlphaGaugeMatchesMeanFieldHessian) {
  // Relaxed-matter energy along Re beta and Im beta: nu (lambda^2 - magnetic) and nu (1 - electric) per |beta|^2.
  const int N = 40;
  const double d = 0.2, b = 1e-3;
  for (double a : {0.3, 0.5, 0.55, 0.57, 0.8}) {
    const Case s = two_level(N, d, make_gauge(GaugePreset::AlphaLWL, true, a));
    const auto r = run(s);
    const VariationalResult v = variational_scan(s.model, s.gauge, {s.mode, 0, 10}, {cplx(0), cplx(b, 0), cplx(0, b)});
    const double re = (v.energies[1] - v.energies[0]) / (b * b), im = (v.energies[2] - v.energies[0]) / (b * b);
    EXPECT_NEAR(re, r[0].rhs - r[0].magnetic_part, 1e-5) << a;
    EXPECT_NEAR(im, 1.0 - r[0].electric_part, 1e-5) << a;
    EXPECT_NEAR(r[0].interference, 0.0, 1e-12);
    EXPECT_EQ(r[0].condensed, std::min(re, im) < 0.0) << a;
  }
  // threshold at 2 N d^2 alpha^2 = 1
  EXPECT_FALSE(run(two_level(N, d, make_gauge(GaugePreset::AlphaLWL, true, 0.55)))[0].condensed);
  EXPECT_TRUE(run(two_level(N, d, make_gauge(GaugePreset::AlphaLWL, true, 0.57)))[0].condensed);
}

TEST(Evaluate, RingModesUseFullResponse) {
  const MatterModel ring = build_ring_lattice(6, 1.0, 2.0);
  for (int q : {1, 2}) {
    const Case s = setup(ring, make_gauge(GaugePreset::MultipolarRing, false), make_ring_mode(ring, q, 0.5));
    for (const auto& c : run(s)) {
      EXPECT_FALSE(c.self_conjugate);
      EXPECT_EQ(c.magnetic_part, 0.0);
      EXPECT_NEAR(c.lhs, c.electric_part, 1e-14);
    }
  }
  const Case pi = setup(ring, make_gauge(GaugePreset::Coulomb, false), make_ring_mode(ring, 3, 0.5));
  for (const auto& c : run(pi)) {
    EXPECT_TRUE(c.self_conjugate);
    EXPECT_NEAR(c.lhs, c.magnetic_part, 1e-14);
  }
}

TEST(Evaluate, GeneralBranchUnsupported) {
  const Case s = two_level(3, 0.2, make_gauge(GaugePreset::Dipole));
  DiamagneticMatrix d;
  d.D << 2, 1, 1, 1;
  d.Delta = 0.05;
  EXPECT_THROW(evaluate(s.model, s.gauge, s.mode, diagonalize_block(d, 1.0), s.sp), UnsupportedError);
}

TEST(Evaluate, DegenerateGroundUnsupported) {
  Case s = two_level(1, 0.2, make_gauge(GaugePreset::Dipole));
  s.model.h_m = Operator::zero(2);
  s.sp = matter_spectrum(s.model);
  EXPECT_THROW(run(s), UnsupportedError);
}

TEST(Evaluate, AlphaMarginContinuous) {
  // Halving the step halves the largest jump of the margin.
  auto margin = [](double a) { return run(two_level(40, 0.2, make_gauge(GaugePreset::AlphaLWL, true, a)))[0].margin; };
  auto max_jump = [&](int steps) {
    double j = 0, prev = margin(0.0);
    for (int i = 1; i <= steps; ++i) {
      const double m = margin(double(i) / steps);
      j = std::max(j, std::abs(m - prev));
      prev = m;
    }
    return j;
  };
  const double coarse = max_jump(25), fine = max_jump(50);
  EXPECT_GT(coarse / fine, 1.6);
  EXPECT_LT(coarse / fine, 2.4);
  EXPECT_NEAR(margin(0.0), run(two_level(40, 0.2, make_gauge(GaugePreset::Coulomb)))[0].margin, 1e-12);
  EXPECT_NEAR(margin(1.0), run(two_level(40, 0.2, make_gauge(GaugePreset::Dipole)))[0].margin, 1e-12);
}

TEST(CoulombSpecialized, LongWavelengthVanishes) {
  const MatterModel m = build_anharmonic_dipole(60, 1.0, 1.0, 0.0, 1.0, 1.0);
  const auto r = coulomb_specialized(m, make_mode(kX, 1.0, 1.0), matter_spectrum(m));
  for (const auto& c : r) {
    EXPECT_NEAR(c.lhs, 0.0, 1e-7);
    EXPECT_FALSE(c.condensed);
    EXPECT_LE(c.cross_check, 1e-10);
  }
}

TEST(CoulombSpecialized, AnharmonicAndTwoLevelMatchEvaluate) {
  for (const MatterModel& m : {build_anharmonic_dipole(40, 1.0, 1.0, 0.2, 2.0, 1.5), build_two_level_ensemble(6, 0.8, {0, 0, 0.3}, 1.2)}) {
    const auto r = coulomb_specialized(m, make_mode(kX, 0.9, m.params.V), matter_spectrum(m));
    for (const auto& c : r) EXPECT_LE(c.cross_check, 1e-10);
  }
}

TEST(CoulombSpecialized, RingFiniteQ) {
  const MatterModel ring = build_ring_lattice(6, 1.0, 2.0);
  const MatterSpectrum sp = matter_spectrum(ring);
  for (int q = 1; q < 6; ++q) {
    const auto r = coulomb_specialized(ring, make_ring_mode(ring, q, 0.7), sp);
    for (const auto& c : r) EXPECT_LE(c.cross_check, 1e-10) << q;
  }
}

TEST(CoulombSpecialized, NoChargesGivesZero) {
  const MatterModel m = build_two_level_ensemble(3, 1.0, Eigen::Vector3d::Zero(), 1.0);
  for (const auto& c : coulomb_specialized(m, make_mode(kX, 1.0, 1.0), matter_spectrum(m))) EXPECT_EQ(c.lhs, 0.0);
}

TEST(DipoleSpecialized, TwoLevelCollectiveThreshold) {
  for (int N : {1, 5, 20}) {
    const double d = 0.2, V = 1.3;
    const MatterSpectrum sp = matter_spectrum(build_two_level_ensemble(N, 1.0, {0, 0, d}, V));
    const auto r = dipole_specialized(sp, make_mode(kX, 1.0, V));
    EXPECT_NEAR(r[0].lhs, 2.0 * N * d * d / V, 1e-12) << N;
    EXPECT_EQ(r[0].condensed, 2.0 * N * d * d / V > 1.0);
    EXPECT_LE(r[0].cross_check, 1e-10);
    EXPECT_EQ(r[1].lhs, 0.0);
  }
}

TEST(DipoleSpecialized, HarmonicIsMarginalAtUnitDensity) {
  const MatterSpectrum sp = matter_spectrum(build_anharmonic_dipole(40, 1.0, 1.0, 0.0, 1.0, 1.0));
  const auto r = dipole_specialized(sp, make_mode(kX, 1.0, 1.0));
  EXPECT_NEAR(r[0].lhs, 1.0, 1e-10);
  EXPECT_FALSE(r[0].condensed);
  EXPECT_LE(r[0].cross_check, 1e-10);
}

TEST(DipoleSpecialized, ZeroDipole) {
  const MatterSpectrum sp = matter_spectrum(build_two_level_ensemble(4, 1.0, Eigen::Vector3d::Zero(), 1.0));
  for (const auto& c : dipole_specialized(sp, make_mode(kX, 1.0, 1.0))) EXPECT_EQ(c.lhs, 0.0);
}

TEST(DipoleSpecialized, MatchesEvaluate) {
  const Case s = setup(build_anharmonic_dipole(40, 1.0, 1.0, 0.15, 1.2, 1.0), make_gauge(GaugePreset::Dipole), make_mode(kX, 1.0, 1.0));
  const auto g = run(s);
  const auto d = dipole_specialized(s.sp, s.mode);
  for (int t = 0; t < 2; ++t) EXPECT_NEAR(g[t].lhs, d[t].lhs, 1e-10);
}

TEST(OrderParameter, TranslationInvariantRingGroundState) {
  const MatterModel ring = build_ring_lattice(6, 1.0, 1.5);
  const GaugeSpec g = make_gauge(GaugePreset::Coulomb, false);
  const MatterSpectrum sp = matter_spectrum(ring);
  for (int q = 1; q < 6; ++q) {
    const ModeSpec mode = make_ring_mode(ring, q, 1.0);
    const BogoliubovBlock b = diagonalize_block(diamagnetic_D(ring, g, mode), 1.0);
    const auto gs = aligned_couplings(ring, g, mode, b);
    for (int t = 0; t < 2; ++t) EXPECT_LE(std::abs(order_parameter(sp, b, gs[t], mode, t)), 1e-10) << q;
  }
}

TEST(OrderParameter, ZeroCoupling) {
  const Case s = two_level(3, 0.0, make_gauge(GaugePreset::Dipole));
  const auto gs = aligned_couplings(s.model, s.gauge, s.mode, s.block);
  EXPECT_EQ(order_parameter(s.sp, s.block, gs[0], s.mode, 0), 0.0);
}

TEST(OrderParameter, SymmetryBrokenTrialState) {
  const Case s = two_level(4, 0.3, make_gauge(GaugePreset::Dipole));
  const auto gs = aligned_couplings(s.model, s.gauge, s.mode, s.block);
  const cvec v = (s.sp.vectors.col(0) + s.sp.vectors.col(1)) / std::sqrt(2.0);
  const cplx beta = order_parameter(Statevector(v), s.block, gs[0], s.mode, 0);
  const cplx contraction = -(s.mode.A / s.block.nu_tau[0]) * v.dot(gs[0].matrix() * v);
  EXPECT_NEAR(std::abs(beta - contraction), 0.0, 1e-15);
  // |beta| = A sqrt(N) d, purely imaginary in the dipole gauge
  EXPECT_NEAR(std::abs(beta), std::sqrt(0.5) * 2.0 * 0.3, 1e-14);
  EXPECT_NEAR(beta.real(), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(beta), 0.424264, 1e-6);
}

TEST(DisplacedEnergy, ClosedForms) {
  EXPECT_DOUBLE_EQ(displaced_energy(0.0, std::vector<double>{1.0}, std::vector<cplx>{cplx(0)}, std::vector<int>{0}), 0.5);
  EXPECT_DOUBLE_EQ(displaced_energy(0.0, std::vector<double>{1.0}, std::vector<cplx>{cplx(0.5)}, std::vector<int>{0}), 0.25);
  EXPECT_DOUBLE_EQ(displaced_energy(0.0, std::vector<double>{1.0}, std::vector<cplx>{cplx(0)}, std::vector<int>{2}), 2.5);
  EXPECT_THROW(displaced_energy(0.0, std::vector<double>{1.0}, std::vector<cplx>{cplx(0)}, std::vector<int>{-1}), ArgumentError);
  EXPECT_THROW(displaced_energy(0.0, std::vector<double>{1.0, 2.0}, std::vector<cplx>{cplx(0)}, std::vector<int>{0}), ArgumentError);
}

TEST(DisplacedEnergy, MatchesDisplacedOscillator) {
  // nu (a^dag a + 1/2) - nu (beta^* a + beta a^dag) has levels nu (n + 1/2 - |beta|^2).
  const int cutoff = 40;
  auto [a, ad] = boson_ladder(cutoff);
  for (cplx beta : {cplx(0.5), cplx(0.3, -0.4), cplx(0, 1.0)}) {
    const double nu = 1.0;
    cmat h = nu * ad.matrix() * a.matrix() - nu * (std::conj(beta) * a.matrix() + beta * ad.matrix());
    h.diagonal().array() += 0.5 * nu;
    const EigenSystem es = eigh(Operator(h, true));
    for (int n = 0; n < 3; ++n)
      EXPECT_NEAR(es.values(n), displaced_energy(0.0, std::vector<double>{nu}, std::vector<cplx>{beta}, std::vector<int>{n}), 1e-9) << beta << " " << n;
  }
}

TEST(Stiffness, ZeroDisplacement) {
  const Case s = two_level(4, 0.3, make_gauge(GaugePreset::Dipole));
  const auto gs = aligned_couplings(s.model, s.gauge, s.mode, s.block);
  const StiffnessResult r = stiffness_energy(s.sp, s.mode, s.block, gs, {cplx(0), cplx(0)});
  EXPECT_EQ(r.energy, s.sp.energies(0));
  EXPECT_EQ(r.excess, 0.0);
}

TEST(Stiffness, ExactlyQuadratic) {
  const Case s = two_level(4, 0.3, make_gauge(GaugePreset::Dipole));
  const auto gs = aligned_couplings(s.model, s.gauge, s.mode, s.block);
  for (cplx db : {cplx(0, 0.01), cplx(0, 0.2)}) {
    const double e1 = stiffness_energy(s.sp, s.mode, s.block, gs, {db, cplx(0)}).excess;
    const double e2 = stiffness_energy(s.sp, s.mode, s.block, gs, {2.0 * db, cplx(0)}).excess;
    EXPECT_NEAR(e2, 4.0 * e1, 1e-14 * std::abs(e2));
    EXPECT_GT(e1, 0.0);
  }
}

TEST(Stiffness, SingularConstraint) {
  const Case s = two_level(3, 0.2, make_gauge(GaugePreset::Dipole));
  const auto gs = aligned_couplings(s.model, s.gauge, s.mode, s.block);
  // tau = 1 couples to the empty polarization
  EXPECT_THROW(stiffness_energy(s.sp, s.mode, s.block, gs, {cplx(0), cplx(0.01)}), NumericError);
}

TEST(Stiffness, TwoLevelAgainstConstrainedMinimum) {
  // The two-level remainder is quartic: the error falls by 16 per halving.
  const Case s = two_level(4, 0.3, make_gauge(GaugePreset::Dipole));
  const auto gs = aligned_couplings(s.model, s.gauge, s.mode, s.block);
  const Operator bh = (-(s.mode.A / s.block.nu_tau[0])) * gs[0];
  double prev = 0;
  for (double db : {0.01, 0.005}) {
    const double closed = stiffness_energy(s.sp, s.mode, s.block, gs, {cplx(0, db), cplx(0)}).excess;
    const ConstrainedMin cm = constrained_min(s.sp, bh, cplx(0, db));
    const double err = std::abs(cm.excess - closed);
    EXPECT_LE(err / cm.excess, 1e-3) << db;
    if (prev > 0) {
      EXPECT_NEAR(prev / err, 16.0, 0.5);
    }
    prev = err;
  }
}

TEST(Stiffness, RingAgainstConstrainedMinimum) {
  const MatterModel ring = build_ring_lattice(6, 1.0, 10.0);
  const GaugeSpec g = make_gauge(GaugePreset::MultipolarRing, false);
  const ModeSpec mode = make_ring_mode(ring, 2, 0.01);
  const MatterSpectrum sp = matter_spectrum(ring, gauge_matter_hamiltonian(ring, g));
  const BogoliubovBlock b = diagonalize_block(diamagnetic_D(ring, g, mode), mode.nu);
  const auto gs = aligned_couplings(ring, g, mode, b);
  const Operator bh = (-(mode.A / b.nu_tau[0])) * gs[0];
  std::array<double, 2> err{};
  for (int k = 0; k < 2; ++k) {
    const double db = k == 0 ? 0.01 : 0.005;
    const double closed = stiffness_energy(sp, mode, b, gs, {cplx(db), cplx(0)}).excess;
    const ConstrainedMin cm = constrained_min(sp, bh, cplx(db));
    err[k] = std::abs(cm.excess - closed);
    EXPECT_LE(err[k] / cm.excess, 1e-3) << db;
  }
  EXPECT_GE(err[0] / err[1], 6.0);
  EXPECT_LE(err[0] / err[1], 10.0);
}
