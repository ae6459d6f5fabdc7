#ifndef PHOTONCOND_CRITERION_HPP
#define PHOTONCOND_CRITERION_HPP

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "bogoliubov.hpp"
#include "errors.hpp"
#include "gauge.hpp"
#include "matter_models.hpp"
#include "operator_core.hpp"
#include "response.hpp"

namespace photoncond {

inline constexpr double kCondensedMargin = 1e-9;
inline constexpr double kReductionTol = 1e-8;

/// Condensation verdict of one (q, tau) mode.
/// For a mode that is its own partner (q = -q) the paramagnetic and electric couplings drive the two
/// quadratures of the field separately, and only the first is stiffened by the diamagnetic term. The
/// stability matrix is then diag(lambda^2, 1) - [[magnetic, interference], [interference, electric]],
/// and lhs = lambda^2 mu with mu its largest generalized eigenvalue, so lhs > rhs = lambda^2 exactly
/// when a quadrature is unstable. interference is the cross-quadrature response (zero for real ground
/// states). This reduces to lhs = magnetic_part + electric_part whenever one of them vanishes.
/// For q != -q, lhs is the transverse response of the full coupling.
struct CriterionReport {
  int q_index = 0;
  int tau = 0;
  double lhs = 0;
  double rhs = 1;
  double electric_part = 0;
  double magnetic_part = 0;
  double interference = 0;
  double margin = 0;
  bool condensed = false;
  bool marginal = false;
  bool self_conjugate = false;
  cplx beta = 0;
};

/// Block whose tau modes follow the polarizations whenever that is a valid choice
/// (degenerate branches or decoupled polarizations); otherwise the block is returned unchanged.
inline BogoliubovBlock polarization_aligned(const BogoliubovBlock& b) {
  if (b.branch != BogoliubovBlock::Branch::Symmetric) return b;
  BogoliubovBlock a = b;
  a.branch = BogoliubovBlock::Branch::Decoupled;
  for (int t = 0; t < 2; ++t) {
    const double l = b.lambda[t], n = 2.0 * std::sqrt(l);
    const double ca = -(l + 1) / n, cc = -(l - 1) / n;
    a.w[t] = t == 0 ? ca : 0.0;
    a.y[t] = t == 0 ? cc : 0.0;
    a.x[t] = t == 1 ? ca : 0.0;
    a.z[t] = t == 1 ? cc : 0.0;
    a.h(0, t) = a.w[t] - a.y[t];
    a.h(1, t) = a.x[t] - a.z[t];
  }
  return a;
}

/// Per-polarization coupling pieces of a mode, divided by i V nu so that they are
/// (q x M^p) and P_T components with their gauge weights, expressed in the matter eigenbasis.
struct ModeResponse {
  std::array<cmat, 2> magnetic, electric, total;
  Eigen::Matrix2cd R, R_mag, R_el; // -2V Lehmann sums of O_sigma with O_sigma'^dagger
};

inline ModeResponse mode_response(const MatterModel& model, const GaugeSpec& g, const ModeSpec& mode,
                                  const MatterSpectrum& sp) {
  ModeResponse r;
  const cplx inv = 1.0 / cplx(0, mode.V * mode.nu);
  for (int s = 0; s < 2; ++s) {
    const CouplingParts parts = coupling_parts(model, g, mode, s);
    r.magnetic[s] = inv * to_eigenbasis(sp, parts.magnetic);
    r.electric[s] = inv * to_eigenbasis(sp, parts.electric);
    r.total[s] = r.magnetic[s] + r.electric[s];
  }
  for (int s = 0; s < 2; ++s)
    for (int u = 0; u < 2; ++u) {
      r.R(s, u) = lehmann_sum(sp, r.total[s], r.total[u].adjoint().eval());
      r.R_mag(s, u) = lehmann_sum(sp, r.magnetic[s], r.magnetic[u].adjoint().eval());
      r.R_el(s, u) = lehmann_sum(sp, r.electric[s], r.electric[u].adjoint().eval());
    }
  return r;
}

/// tau-space form  -lambda_tau (h^T R h)_{tau tau'}.
inline Eigen::Matrix2cd tau_projection(const BogoliubovBlock& b, const Eigen::Matrix2cd& R) {
  Eigen::Matrix2cd k = -(b.h.transpose().cast<cplx>() * R * b.h.cast<cplx>());
  for (int t = 0; t < 2; ++t) k.row(t) *= std::sqrt(b.lambda[t]);
  for (int t = 0; t < 2; ++t) k.col(t) *= std::sqrt(b.lambda[t]);
  return k;
}

inline cplx ground_expectation(const cmat& op_eig) { return op_eig(0, 0); }

/// A mode that is not its own partner (q != -q on the ring) carries a second, conjugate order
/// parameter beta_{-q} = beta_q^*, so its stiffness energy counts twice.
inline int mode_multiplicity(const ModeSpec& mode, int modes) {
  if (modes <= 1) return 1;
  const int k = ((mode.q_index % modes) + modes) % modes;
  return (k == 0 || 2 * k == modes) ? 1 : 2;
}

/// The tau couplings of a mode in the polarization-aligned basis, g_tau = sum (w f_q - y f_{-q}^dagger).
inline std::array<Operator, 2> aligned_couplings(const MatterModel& model, const GaugeSpec& g, const ModeSpec& mode,
                                                 const BogoliubovBlock& block) {
  ModeSpec partner = mode;
  partner.q_index = model.wrap(-mode.q_index);
  return coupling_g(polarization_aligned(block), {coupling_f(model, g, mode, 0), coupling_f(model, g, mode, 1)},
                    {coupling_f(model, g, partner, 0), coupling_f(model, g, partner, 1)});
}

inline int aligned_polarization(const BogoliubovBlock& aligned, int tau) {
  return std::abs(aligned.h(0, tau)) >= std::abs(aligned.h(1, tau)) ? 0 : 1;
}

/// Largest eigenvalue of diag(l2, 1)^{-1/2} [[m, c], [c, e]] diag(l2, 1)^{-1/2}.
inline double quadrature_mu(double l2, double m, double e, double c) {
  const double a = m / l2, d = e, b = c / std::sqrt(l2);
  return 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + b * b);
}

inline std::array<CriterionReport, 2> evaluate(const MatterModel& model, const GaugeSpec& g, const ModeSpec& mode,
                                               const BogoliubovBlock& block, const MatterSpectrum& sp) {
  require_unique_ground(sp);
  if (block.branch == BogoliubovBlock::Branch::General)
    throw UnsupportedError("criterion needs d_q = 0 or decoupled polarizations (d_q = " + std::to_string(block.d_q) + ")");
  const BogoliubovBlock ab = polarization_aligned(block);
  const ModeResponse r = mode_response(model, g, mode, sp);
  const Eigen::Matrix2cd K = tau_projection(ab, r.R), Km = tau_projection(ab, r.R_mag), Ke = tau_projection(ab, r.R_el);
  const double off = std::abs(K(0, 1));
  if (off > kReductionTol * std::max(1.0, K.cwiseAbs().maxCoeff()))
    throw UnsupportedError("transverse response is not diagonal in the polarization basis (off-diagonal " +
                           std::to_string(off) + ")");

  const bool self_conjugate = mode_multiplicity(mode, spectrum_modes(sp)) == 1;
  const std::array<Operator, 2> gt = aligned_couplings(model, g, mode, block);
  std::array<CriterionReport, 2> out;
  for (int t = 0; t < 2; ++t) {
    CriterionReport& c = out[t];
    c.q_index = mode.q_index;
    c.tau = t;
    c.self_conjugate = self_conjugate;
    c.magnetic_part = Km(t, t).real();
    c.electric_part = Ke(t, t).real();
    c.rhs = ab.lambda[t] * ab.lambda[t];
    if (self_conjugate) {
      // i O_mag and O_el are the Hermitian quadrature operators of the polarization carrying tau.
      const int s = aligned_polarization(ab, t);
      const double hs = ab.h(s, t);
      const cmat jm = cplx(0, 1) * r.magnetic[s];
      c.interference = -ab.lambda[t] * hs * hs * lehmann_sum(sp, jm, r.electric[s]).real();
      c.lhs = c.rhs * quadrature_mu(c.rhs, c.magnetic_part, c.electric_part, c.interference);
    } else {
      c.lhs = K(t, t).real();
      c.interference = c.lhs - c.magnetic_part - c.electric_part;
    }
    c.margin = c.lhs - c.rhs;
    c.condensed = c.margin > kCondensedMargin;
    c.marginal = std::abs(c.margin) <= kCondensedMargin;
    c.beta = -(mode.A / ab.nu_tau[t]) * ground_expectation(to_eigenbasis(sp, gt[t]));
  }
  return out;
}

/// Coulomb-gauge form: -chi^{MM}_T > 1 with chi^{MM} = chi^{MpMp} - chi^{Md}.
struct SpecializedReport {
  int tau = 0;
  double lhs = 0;
  double rhs = 1;
  double margin = 0;
  bool condensed = false;
  double cross_check = 0; // deviation from the general evaluation (Coulomb) or from the polarizability identity (dipole)
};

inline std::array<SpecializedReport, 2> coulomb_specialized(const MatterModel& model, const ModeSpec& mode,
                                                            const MatterSpectrum& sp) {
  const GaugeSpec g = make_gauge(GaugePreset::Coulomb, model.kind != ModelKind::RingLattice);
  const BogoliubovBlock block = diagonalize_block(diamagnetic_D(model, g, mode), mode.nu);
  const auto general = evaluate(model, g, mode, block, sp);
  const BogoliubovBlock ab = polarization_aligned(block);
  const ModeResponse r = mode_response(model, g, mode, sp);
  std::array<SpecializedReport, 2> out;
  for (int t = 0; t < 2; ++t) {
    const int s = aligned_polarization(ab, t);
    const double chi_mpmp = r.R(s, s).real();
    const double chi_md_s = -mode.eps[s].dot(model.dia_weight * mode.eps[s]) / (mode.V * mode.nu * mode.nu);
    SpecializedReport& c = out[t];
    c.tau = t;
    c.lhs = -(chi_mpmp - chi_md_s);
    c.rhs = 1.0;
    c.margin = c.lhs - c.rhs;
    c.condensed = c.margin > kCondensedMargin;
    c.cross_check = std::abs(c.lhs - (general[t].lhs - general[t].rhs + 1.0));
  }
  return out;
}

/// Dipole-gauge form: -chi^{PTPT}_T > 1, cross-checked against V chi = -eps . alpha(0) . eps.
inline std::array<SpecializedReport, 2> dipole_specialized(const MatterSpectrum& sp, const ModeSpec& mode) {
  require_unique_ground(sp);
  const Vec3Mats& pt = sp.table(polarization_label(0));
  const Eigen::Matrix3d alpha = polarizability(sp, 0.0);
  std::array<cmat, 2> o;
  for (int s = 0; s < 2; ++s) {
    o[s] = cmat::Zero(sp.size(), sp.size());
    for (int i = 0; i < 3; ++i)
      if (mode.eps[s][i] != 0.0) o[s] += mode.eps[s][i] * pt[i];
  }
  const cplx off = lehmann_sum(sp, o[0], o[1].adjoint().eval());
  const double diag0 = lehmann_sum(sp, o[0], o[0].adjoint().eval()).real();
  if (std::abs(off) > kReductionTol * std::max(1.0, std::abs(diag0)))
    throw UnsupportedError("transverse polarization response is not diagonal in the polarization basis");
  std::array<SpecializedReport, 2> out;
  for (int t = 0; t < 2; ++t) {
    const double chi = lehmann_sum(sp, o[t], o[t].adjoint().eval()).real();
    SpecializedReport& c = out[t];
    c.tau = t;
    c.lhs = -chi;
    c.rhs = 1.0;
    c.margin = c.lhs - c.rhs;
    c.condensed = c.margin > kCondensedMargin;
    c.cross_check = std::abs(-sp.V * chi - mode.eps[t].dot(alpha * mode.eps[t]));
  }
  return out;
}

/// beta_tau = -(A / nu_tau) <psi|g_tau|psi>.
inline cplx order_parameter(const Statevector& psi, const BogoliubovBlock& block, const Operator& g_tau,
                            const ModeSpec& mode, int tau) {
  return -(mode.A / block.nu_tau[tau]) * psi.amplitudes().dot(g_tau.matrix() * psi.amplitudes());
}

inline cplx order_parameter(const MatterSpectrum& sp, const BogoliubovBlock& block, const Operator& g_tau,
                            const ModeSpec& mode, int tau) {
  return order_parameter(Statevector::normalized(sp.vectors.col(0)), block, g_tau, mode, tau);
}

/// E = <H_m> + sum_tau nu_tau (n_tau + 1/2 - |beta_tau|^2).
inline double displaced_energy(double hm_expectation, const std::vector<double>& nu_tau, const std::vector<cplx>& beta,
                               const std::vector<int>& occupations) {
  if (nu_tau.size() != beta.size() || nu_tau.size() != occupations.size())
    throw ArgumentError("displaced_energy needs one beta and one occupation per mode");
  double e = hm_expectation;
  for (size_t k = 0; k < nu_tau.size(); ++k) {
    if (occupations[k] < 0) throw ArgumentError("occupations must be nonnegative");
    e += nu_tau[k] * (occupations[k] + 0.5 - std::norm(beta[k]));
  }
  return e;
}

inline double displaced_energy(double hm_expectation, const BogoliubovBlock& block, const std::array<cplx, 2>& beta,
                               const std::array<int, 2>& occupations = {0, 0}) {
  return displaced_energy(hm_expectation, {block.nu_tau[0], block.nu_tau[1]}, {beta[0], beta[1]},
                          {occupations[0], occupations[1]});
}

struct StiffnessResult {
  double energy = 0;             // E(delta beta)
  double excess = 0;             // E(delta beta) - E(0)
  std::array<double, 2> chi_bb{}; // chi^{beta beta}_{tau tau} / V
  std::array<cplx, 2> field{};    // Lagrange field F_{-q tau}
};

/// Quadratic constrained minimum E(beta) = E(0) - (1/2) sum_tau m |delta beta_tau|^2 / chi^{beta beta}_{tau tau}.
/// For a rotationally symmetric response this equals nu_tau^2 lambda_tau |delta beta|^2 / (2 A^2 chi^{ff}_T).
inline StiffnessResult stiffness_energy(const MatterSpectrum& sp, const ModeSpec& mode, const BogoliubovBlock& block,
                                        const std::array<Operator, 2>& g, const std::array<cplx, 2>& delta_beta) {
  require_unique_ground(sp);
  const Eigen::Matrix2d lam = block.Lambda();
  if (std::abs(lam(0, 1)) > 1e-12)
    throw UnsupportedError("stiffness closed form needs Lambda_{tau tau'} = delta_{tau tau'} / lambda_tau");
  std::array<cmat, 2> b;
  for (int t = 0; t < 2; ++t) b[t] = -(mode.A / block.nu_tau[t]) * to_eigenbasis(sp, g[t]);
  const double V = sp.V;
  const cplx cross = lehmann_sum(sp, b[0], b[1].adjoint().eval()) / V;
  StiffnessResult res;
  for (int t = 0; t < 2; ++t) res.chi_bb[t] = (lehmann_sum(sp, b[t], b[t].adjoint().eval()) / V).real();
  if (std::abs(cross) > kReductionTol * std::max(std::abs(res.chi_bb[0]), std::abs(res.chi_bb[1])) && std::abs(cross) > 1e-14)
    throw UnsupportedError("tau modes are coupled through the matter response; use polarization-aligned couplings");
  const int mult = mode_multiplicity(mode, spectrum_modes(sp));
  res.energy = sp.energies(0);
  for (int t = 0; t < 2; ++t) {
    if (delta_beta[t] == 0.0) continue;
    if (res.chi_bb[t] == 0.0)
      throw NumericError("singular constraint: no matter state can realize the displacement of tau = " + std::to_string(t));
    res.excess -= 0.5 * mult * std::norm(delta_beta[t]) / res.chi_bb[t];
    res.field[t] = std::conj(delta_beta[t]) / (V * res.chi_bb[t]);
  }
  res.energy += res.excess;
  return res;
}

} // namespace photoncond

#endif // PHOTONCOND_CRITERION_HPP
