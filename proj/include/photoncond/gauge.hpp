#ifndef PHOTONCOND_GAUGE_HPP
#define PHOTONCOND_GAUGE_HPP

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"
#include "matter_models.hpp"
#include "operator_core.hpp"

namespace photoncond {

enum class GaugePreset { Coulomb, Dipole, AlphaLWL, MultipolarRing };

/// Gauge choice expressed as weights of the paramagnetic, polarization and diamagnetic couplings.
/// AlphaLWL(alpha) scales the multipolar polarization by alpha, which leaves the paramagnetic
/// coupling with weight 1 - alpha and the diamagnetic one with (1 - alpha)^2.
struct GaugeSpec {
  GaugePreset preset = GaugePreset::Coulomb;
  double alpha = 0.0;
  bool lwl = true;

  double para_weight() const { return 1.0 - alpha; }
  double pol_weight() const { return alpha; }
  double dia_weight() const { return (1.0 - alpha) * (1.0 - alpha); }

  std::string name() const {
    switch (preset) {
    case GaugePreset::Coulomb: return "coulomb";
    case GaugePreset::Dipole: return "dipole";
    case GaugePreset::AlphaLWL: return "alpha";
    case GaugePreset::MultipolarRing: return "multipolar_ring";
    }
    return "?";
  }
};

inline GaugeSpec make_gauge(GaugePreset preset, bool lwl = true, double alpha = 0.0) {
  GaugeSpec g;
  g.preset = preset;
  switch (preset) {
  case GaugePreset::Coulomb:
    g.alpha = 0.0;
    g.lwl = lwl;
    break;
  case GaugePreset::Dipole:
    g.alpha = 1.0;
    g.lwl = true;
    break;
  case GaugePreset::AlphaLWL:
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw ArgumentError("gauge.alpha must lie in [0, 1], got " + std::to_string(alpha));
    g.alpha = alpha;
    g.lwl = true;
    break;
  case GaugePreset::MultipolarRing:
    g.alpha = 1.0;
    g.lwl = false;
    break;
  }
  return g;
}

/// A single cavity mode: direction, frequency, volume and the two transverse polarizations.
struct ModeSpec {
  Eigen::Vector3d q_hat = Eigen::Vector3d::UnitZ();
  int q_index = 0;
  double nu = 1.0;
  double V = 1.0;
  Eigen::Vector3d eps[2];
  double A = 0.0;

  const Eigen::Vector3d& eps_of(int sigma) const { return eps[sigma]; }
};

/// Polarizations: eps1 is the normalized component of z (x when q is along z) orthogonal to q,
/// and eps2 = q_hat x eps1.
inline ModeSpec make_mode(const Eigen::Vector3d& direction, double nu, double volume, int q_index = 0) {
  if (!(nu > 0)) throw ArgumentError("mode frequency must be positive");
  if (!(volume > 0)) throw ArgumentError("volume must be positive");
  const double norm = direction.norm();
  if (!(norm > 0)) throw ArgumentError("mode direction must be nonzero");
  ModeSpec m;
  m.q_hat = direction / norm;
  m.q_index = q_index;
  m.nu = nu;
  m.V = volume;
  const bool along_z = m.q_hat.cross(Eigen::Vector3d::UnitZ()).norm() < 1e-12;
  const Eigen::Vector3d r = along_z ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitZ();
  m.eps[0] = (r - r.dot(m.q_hat) * m.q_hat).normalized();
  m.eps[1] = m.q_hat.cross(m.eps[0]);
  m.A = 1.0 / std::sqrt(2.0 * nu * volume);
  return m;
}

/// Ring modes propagate along z so that the ring tangent (x) is the first polarization.
inline ModeSpec make_ring_mode(const MatterModel& ring, int q_index, double nu) {
  return make_mode(Eigen::Vector3d::UnitZ(), nu, ring.params.V, ring.wrap(q_index));
}

namespace detail {

inline void require_gauge_supported(const MatterModel& model, const GaugeSpec& g, const ModeSpec& mode) {
  if (g.preset == GaugePreset::MultipolarRing && model.kind != ModelKind::RingLattice)
    throw UnsupportedError("multipolar ring gauge needs a ring lattice model");
  if ((g.preset == GaugePreset::Dipole || g.preset == GaugePreset::AlphaLWL) && model.kind == ModelKind::RingLattice)
    throw UnsupportedError("long-wavelength dipole couplings are not defined on the ring; use multipolar_ring");
  if (g.preset == GaugePreset::MultipolarRing && model.wrap(mode.q_index) == 0)
    throw UnsupportedError("multipolar ring gauge has no q = 0 mode: the uniform polarization depends on the origin");
  if (model.kind != ModelKind::RingLattice && mode.q_index != 0)
    throw ArgumentError("long-wavelength model requires q index 0");
}

inline Operator project(const Vec3Ops& ops, const Eigen::Vector3d& e) {
  cmat m = cmat::Zero(ops[0].dim(), ops[0].dim());
  for (int i = 0; i < 3; ++i)
    if (e[i] != 0.0) m += e[i] * ops[i].matrix();
  return Operator(m, ops[0].hermitian() && ops[1].hermitian() && ops[2].hermitian());
}

} // namespace detail

/// Magnetic (paramagnetic) and electric (transverse polarization) pieces of eps_sigma . f_q.
struct CouplingParts {
  Operator magnetic;
  Operator electric;
  Operator total() const { return magnetic + electric; }
};

inline CouplingParts coupling_parts(const MatterModel& model, const GaugeSpec& g, const ModeSpec& mode, int sigma) {
  if (sigma != 0 && sigma != 1) throw ArgumentError("polarization index must be 0 or 1");
  detail::require_gauge_supported(model, g, mode);
  const Eigen::Vector3d& e = mode.eps_of(sigma);
  const Eigen::Index n = model.dim();
  CouplingParts parts{Operator::zero(n), Operator::zero(n)};
  // i V nu (q x M^p) reduces to V j^p_T; eps . j^p_T = eps . j^p because eps is transverse.
  if (g.para_weight() != 0.0) parts.magnetic = (g.para_weight() * mode.V) * detail::project(model.current(mode.q_index), e);
  if (g.pol_weight() != 0.0)
    parts.electric = cplx(0, g.pol_weight() * mode.V * mode.nu) * detail::project(model.polarization(mode.q_index), e);
  return parts;
}

/// eps_sigma . f_q as an operator on the matter space.
inline Operator coupling_f(const MatterModel& model, const GaugeSpec& g, const ModeSpec& mode, int sigma) {
  return coupling_parts(model, g, mode, sigma).total();
}

struct DiamagneticMatrix {
  Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
  double Delta = 0.0;
};

/// Delta_q D_{q sigma sigma'} = (gauge weight) A_q^2 / 2 * eps_sigma . (e^2 N / m) . eps_sigma'.
/// Delta_q carries the largest transverse eigenvalue of the weight so that D = I for an isotropic Coulomb system.
inline DiamagneticMatrix diamagnetic_D(const MatterModel& model, const GaugeSpec& g, const ModeSpec& mode) {
  detail::require_gauge_supported(model, g, mode);
  Eigen::Matrix2d wt;
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t) wt(s, t) = mode.eps[s].dot(model.dia_weight * mode.eps[t]);
  wt = 0.5 * (wt + wt.transpose()).eval();
  const double w = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(wt, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  DiamagneticMatrix dm;
  if (w <= 0.0) return dm;
  dm.Delta = w * mode.A * mode.A / 2.0;
  if (g.preset != GaugePreset::MultipolarRing) dm.D = g.dia_weight() * wt / w;
  return dm;
}

/// Matter Hamiltonian as seen in the given gauge. The multipolar ring adds its transverse
/// self-energy (1/2) V sum_{q != 0} P_q^dagger P_q; the q = 0 part depends on the origin and is left out.
inline Operator gauge_matter_hamiltonian(const MatterModel& model, const GaugeSpec& g) {
  if (g.preset != GaugePreset::MultipolarRing) return model.h_m;
  if (model.kind != ModelKind::RingLattice) throw UnsupportedError("multipolar ring gauge needs a ring lattice model");
  cmat self = cmat::Zero(model.dim(), model.dim());
  for (int k = 1; k < model.params.sites; ++k) {
    const cmat& p = model.polarization(k)[0].matrix();
    self += p.adjoint() * p;
  }
  return model.h_m + Operator(0.5 * model.params.V * self, true);
}

/// Relative size of the neglected cross-momentum diamagnetic coupling between modes q and q'.
inline double check_wavevector_decoupling(const MatterModel& model, const GaugeSpec& g, int q_index, int q_index2) {
  if (model.kind != ModelKind::RingLattice) return 0.0; // long-wavelength models: q = q' = 0 only
  if (model.wrap(q_index + q_index2) == 0) throw ArgumentError("wavevector decoupling check needs q != -q'");
  if (g.preset == GaugePreset::MultipolarRing) return 0.0; // no diamagnetic coupling on the multipolar ring
  if (g.preset != GaugePreset::Coulomb) throw UnsupportedError("decoupling check is only defined for Coulomb and multipolar ring gauges");
  const int L = model.params.sites;
  const EigenSystem es = eigh_lowest(model.h_m, 1);
  const double dq = 2.0 * M_PI * (q_index + q_index2) / L;
  cplx s = 0;
  for (int j = 0; j < L; ++j) s += std::norm(es.vectors(j, 0)) * std::polar(1.0, dq * j);
  return std::abs(s) / model.params.N;
}

} // namespace photoncond

#endif // PHOTONCOND_GAUGE_HPP
