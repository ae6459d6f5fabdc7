#ifndef PHOTONCOND_MATTER_MODELS_HPP
#define PHOTONCOND_MATTER_MODELS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "detail/sum.hpp"
#include "errors.hpp"
#include "operator_core.hpp"

namespace photoncond {

inline constexpr int kDefaultMaxTwoLevelCount = 4000;

enum class ModelKind { TwoLevelEnsemble, AnharmonicDipole, RingLattice };

inline std::string to_string(ModelKind k) {
  switch (k) {
  case ModelKind::TwoLevelEnsemble: return "two_level";
  case ModelKind::AnharmonicDipole: return "anharmonic";
  case ModelKind::RingLattice: return "ring";
  }
  return "?";
}

using Vec3Ops = std::array<Operator, 3>;
using Vec3Mats = std::array<cmat, 3>;

struct ModelParams {
  double N = 1;      // number of charges / dipoles
  double mass = 0;   // 0 when the model has no kinetic mass
  double charge = 1; // e > 0, carriers have charge -e
  double V = 1;      // quantization volume
  // two-level ensemble
  double gap = 0;
  Eigen::Vector3d dipole = Eigen::Vector3d::Zero();
  // anharmonic dipole
  int levels = 0;
  int axes = 1;
  double omega = 0;
  double kappa = 0;
  // ring lattice
  int sites = 0;
  double hopping = 0;
  std::vector<double> bond_scale;
};

/// A finite matter system together with the operators through which it couples to light.
/// Coupling operators are stored per quasi-momentum index; long-wavelength models only carry index 0.
struct MatterModel {
  ModelKind kind{};
  Operator h_m;
  Vec3Ops dipole;
  std::map<int, Vec3Ops> para_current;
  std::map<int, Vec3Ops> pol_transverse;
  std::optional<Vec3Ops> momentum;
  std::vector<Operator> density;
  // e^2 N / m as a tensor: the diamagnetic weight that closes the f-sum rule.
  Eigen::Matrix3d dia_weight = Eigen::Matrix3d::Zero();
  ModelParams params;

  Eigen::Index dim() const { return h_m.dim(); }
  int mode_count() const { return kind == ModelKind::RingLattice ? params.sites : 1; }

  int wrap(int q_index) const {
    const int L = mode_count();
    return ((q_index % L) + L) % L;
  }
  const Vec3Ops& current(int q_index) const { return lookup(para_current, q_index, "paramagnetic current"); }
  const Vec3Ops& polarization(int q_index) const { return lookup(pol_transverse, q_index, "transverse polarization"); }

private:
  const Vec3Ops& lookup(const std::map<int, Vec3Ops>& m, int q_index, const char* what) const {
    if (kind != ModelKind::RingLattice && q_index != 0)
      throw ArgumentError(std::string("long-wavelength model has no ") + what + " at q index " + std::to_string(q_index));
    auto it = m.find(wrap(q_index));
    if (it == m.end()) throw ArgumentError(std::string("no ") + what + " registered at q index " + std::to_string(q_index));
    return it->second;
  }
};

namespace detail {

inline Vec3Ops zero_ops(Eigen::Index n) { return {Operator::zero(n), Operator::zero(n), Operator::zero(n)}; }

inline Vec3Ops scaled(const Vec3Ops& ops, cplx s) { return {s * ops[0], s * ops[1], s * ops[2]}; }

inline Vec3Ops adjoint(const Vec3Ops& ops) { return {ops[0].adjoint(), ops[1].adjoint(), ops[2].adjoint()}; }

inline Operator commutator(const Operator& a, const Operator& b) {
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

// Kronecker product of per-axis factors; factor i acts on axis i.
inline cmat kron_axes(const std::vector<cmat>& f) {
  cmat out = f[0];
  for (size_t i = 1; i < f.size(); ++i) out = tensor(Operator(out), Operator(f[i]), ~std::size_t{0}).matrix();
  return out;
}

} // namespace detail

inline MatterModel build_two_level_ensemble(int count, double gap, const Eigen::Vector3d& dipole_moment, double volume,
                                            int max_count = kDefaultMaxTwoLevelCount) {
  if (count < 1) throw ArgumentError("two-level ensemble needs N >= 1, got " + std::to_string(count));
  if (count > max_count)
    throw ResourceError("two-level ensemble N = " + std::to_string(count) + " exceeds limit " + std::to_string(max_count));
  if (!(gap > 0)) throw ArgumentError("two-level gap must be positive");
  if (!(volume > 0)) throw ArgumentError("volume must be positive");

  const int n = count + 1;
  const double S = 0.5 * count;
  cmat sz = cmat::Zero(n, n), sp = cmat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double m = -S + k;
    sz(k, k) = m;
    if (k + 1 < n) sp(k + 1, k) = std::sqrt(S * (S + 1) - m * (m + 1));
  }
  const cmat sx = 0.5 * (sp + sp.adjoint());

  MatterModel mm;
  mm.kind = ModelKind::TwoLevelEnsemble;
  mm.h_m = Operator(gap * (sz + S * cmat::Identity(n, n)), true);
  for (int i = 0; i < 3; ++i) mm.dipole[i] = Operator(2.0 * dipole_moment[i] * sx, true);

  // V j^p = -i[d, H_m] in the long-wavelength limit.
  Vec3Ops j, pt;
  for (int i = 0; i < 3; ++i) {
    j[i] = Operator(cplx(0, -1.0 / volume) * detail::commutator(mm.dipole[i], mm.h_m).matrix(), true);
    pt[i] = (1.0 / volume) * mm.dipole[i];
  }
  mm.para_current[0] = j;
  mm.pol_transverse[0] = pt;
  // f-sum closure of the two-level truncation: (e^2 N/m)_ij = 2 gap N d_i d_j.
  mm.dia_weight = 2.0 * gap * count * dipole_moment * dipole_moment.transpose();

  mm.params.N = count;
  mm.params.V = volume;
  mm.params.gap = gap;
  mm.params.dipole = dipole_moment;
  return mm;
}

/// Single particle in p^2/2m + m w^2 r^2/2 + kappa r^4, represented on `levels` oscillator states per axis.
/// One axis lies along z; three axes give the isotropic 3D oscillator.
inline MatterModel build_anharmonic_dipole(int levels, double mass, double omega, double kappa, double charge,
                                           double volume, int axes = 1, std::size_t max_dim = kDefaultMaxDim) {
  if (levels < 4) throw ArgumentError("anharmonic dipole needs at least 4 levels, got " + std::to_string(levels));
  if (!(mass > 0) || !(omega > 0)) throw ArgumentError("mass and frequency must be positive");
  if (kappa < 0) throw ArgumentError("quartic coefficient must be nonnegative");
  if (!(volume > 0)) throw ArgumentError("volume must be positive");
  if (axes != 1 && axes != 3) throw ArgumentError("axes must be 1 or 3");
  std::size_t total = 1;
  for (int i = 0; i < axes; ++i) total *= static_cast<std::size_t>(levels);
  if (total > max_dim) throw ResourceError("anharmonic dipole dimension " + std::to_string(total) + " exceeds limit");

  // Build on a padded basis so the truncated x^2, x^4 and p^2 blocks are exact.
  const int pad = levels + 4;
  auto [a, ad] = boson_ladder(pad);
  const cmat x = (a.matrix() + ad.matrix()) / std::sqrt(2.0 * mass * omega);
  const cmat p = cplx(0, std::sqrt(mass * omega / 2.0)) * (ad.matrix() - a.matrix());
  const cmat x2f = x * x;
  const cmat x4 = (x2f * x2f).topLeftCorner(levels, levels);
  const cmat x2 = x2f.topLeftCorner(levels, levels);
  const cmat p2 = (p * p).topLeftCorner(levels, levels);
  const cmat x1 = x.topLeftCorner(levels, levels);
  const cmat p1 = p.topLeftCorner(levels, levels);
  const cmat id = cmat::Identity(levels, levels);
  const cmat h0 = p2 / (2.0 * mass) + 0.5 * mass * omega * omega * x2;

  auto on_axis = [&](const cmat& op, int axis) {
    std::vector<cmat> f(axes, id);
    f[axis] = op;
    return detail::kron_axes(f);
  };

  const Eigen::Index n = static_cast<Eigen::Index>(total);
  cmat h = cmat::Zero(n, n);
  std::array<cmat, 3> xs, ps;
  for (int i = 0; i < axes; ++i) {
    h += on_axis(h0, i) + kappa * on_axis(x4, i);
    xs[i] = on_axis(x1, i);
    ps[i] = on_axis(p1, i);
  }
  // kappa (sum_i x_i^2)^2 cross terms
  for (int i = 0; i < axes; ++i)
    for (int k = i + 1; k < axes; ++k) {
      std::vector<cmat> f(axes, id);
      f[i] = x2;
      f[k] = x2;
      h += 2.0 * kappa * detail::kron_axes(f);
    }

  MatterModel mm;
  mm.kind = ModelKind::AnharmonicDipole;
  mm.h_m = Operator(h, true);
  mm.dipole = detail::zero_ops(n);
  Vec3Ops mom = detail::zero_ops(n);
  // axes == 1 puts the particle on z; axes == 3 maps axis i to Cartesian i.
  for (int i = 0; i < axes; ++i) {
    const int c = axes == 1 ? 2 : i;
    mm.dipole[c] = Operator(-charge * xs[i], true);
    mom[c] = Operator(ps[i], true);
    mm.dia_weight(c, c) = charge * charge / mass;
  }
  mm.momentum = mom;
  Vec3Ops j, pt;
  for (int c = 0; c < 3; ++c) {
    j[c] = (-charge / (mass * volume)) * mom[c];
    pt[c] = (1.0 / volume) * mm.dipole[c];
  }
  mm.para_current[0] = j;
  mm.pol_transverse[0] = pt;

  mm.params.N = 1;
  mm.params.mass = mass;
  mm.params.charge = charge;
  mm.params.V = volume;
  mm.params.levels = levels;
  mm.params.axes = axes;
  mm.params.omega = omega;
  mm.params.kappa = kappa;
  return mm;
}

/// Single particle hopping on an L-site ring (lattice spacing 1, volume L) with the ring tangent along x.
/// bond_scale optionally rescales individual bonds (bond b joins sites b and b+1).
inline MatterModel build_ring_lattice(int sites, double hopping, double charge, std::vector<double> bond_scale = {}) {
  if (sites < 4) throw ArgumentError("ring lattice needs at least 4 sites, got " + std::to_string(sites));
  if (!(hopping > 0)) throw ArgumentError("hopping must be positive");
  if (bond_scale.empty()) bond_scale.assign(sites, 1.0);
  if (static_cast<int>(bond_scale.size()) != sites) throw ArgumentError("bond_scale must have one entry per site");

  const int L = sites;
  const double V = L;
  cmat h = cmat::Zero(L, L);
  std::vector<cmat> bond_current(L);
  for (int b = 0; b < L; ++b) {
    const int c = (b + 1) % L;
    const double tb = hopping * bond_scale[b];
    h(b, c) -= tb;
    h(c, b) -= tb;
    cmat jb = cmat::Zero(L, L);
    jb(c, b) = cplx(0, -charge * tb);
    jb(b, c) = cplx(0, charge * tb);
    bond_current[b] = jb;
  }

  MatterModel mm;
  mm.kind = ModelKind::RingLattice;
  mm.h_m = Operator(h, true);
  for (int j = 0; j < L; ++j) {
    cmat nj = cmat::Zero(L, L);
    nj(j, j) = 1.0;
    mm.density.emplace_back(nj, true);
  }

  // Multipolar polarization on bond b: P_b = -sum_{j=1..b} rho_j, rho_j = -e n_j + e/L (origin site 0).
  std::vector<cmat> bond_pol(L, cmat::Zero(L, L));
  for (int b = 1; b < L; ++b) {
    bond_pol[b] = bond_pol[b - 1];
    bond_pol[b](b, b) += charge;
    bond_pol[b] -= (charge / L) * cmat::Identity(L, L);
  }

  const Eigen::Index n = L;
  for (int k = 0; k < L; ++k) {
    const double q = 2.0 * M_PI * k / L;
    cmat jq = cmat::Zero(n, n), pq = cmat::Zero(n, n);
    for (int b = 0; b < L; ++b) {
      const cplx ph = std::polar(1.0, -q * b) / V;
      jq += ph * bond_current[b];
      pq += ph * bond_pol[b];
    }
    Vec3Ops jv = detail::zero_ops(n), pv = detail::zero_ops(n);
    jv[0] = Operator(jq, k == 0);
    pv[0] = Operator(pq, k == 0);
    mm.para_current[k] = jv;
    mm.pol_transverse[k] = pv;
  }
  mm.dipole = detail::zero_ops(n);
  cmat dtot = cmat::Zero(n, n);
  for (int b = 0; b < L; ++b) dtot += bond_pol[b];
  mm.dipole[0] = Operator(dtot, true);

  // Lattice f-sum: e^2 N/m is replaced by -e^2 <0|H_kin|0>.
  const EigenSystem es = eigh_lowest(mm.h_m, 1);
  const double ekin = es.values(0);
  mm.dia_weight(0, 0) = -charge * charge * ekin;

  mm.params.N = 1;
  mm.params.charge = charge;
  mm.params.V = V;
  mm.params.sites = L;
  mm.params.hopping = hopping;
  mm.params.bond_scale = bond_scale;
  return mm;
}

/// One-site translation |j> -> |j+1> on the ring.
inline Operator ring_translation(int sites) {
  cmat t = cmat::Zero(sites, sites);
  for (int j = 0; j < sites; ++j) t((j + 1) % sites, j) = 1.0;
  return Operator(t);
}

/// Eigen-data of H_m plus the matrix elements of every coupling operator in its eigenbasis.
struct MatterSpectrum {
  Eigen::VectorXd energies;
  cmat vectors;
  int ground_degeneracy = 1;
  double V = 1;
  std::map<std::string, Vec3Mats> tables;

  Eigen::Index size() const { return energies.size(); }
  bool has(const std::string& label) const { return tables.count(label) != 0; }
  const Vec3Mats& table(const std::string& label) const {
    auto it = tables.find(label);
    if (it == tables.end()) throw ArgumentError("matter spectrum has no table '" + label + "'");
    return it->second;
  }
};

inline std::string current_label(int q_index) { return "jp:" + std::to_string(q_index); }
inline std::string polarization_label(int q_index) { return "pt:" + std::to_string(q_index); }

inline int count_ground_degeneracy(const Eigen::VectorXd& e, double tol = 1e-10) {
  int g = 1;
  while (g < e.size() && e(g) - e(0) <= tol) ++g;
  return g;
}

namespace detail {

inline bool is_diagonal(const cmat& h) {
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      if (i != j && h(i, j) != 0.0) return false;
  return true;
}

inline EigenSystem diagonal_eigensystem(const cmat& h) {
  const Eigen::Index n = h.rows();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return h(a, a).real() < h(b, b).real(); });
  EigenSystem es;
  es.values.resize(n);
  es.vectors = cmat::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    es.values(k) = h(idx[k], idx[k]).real();
    es.vectors(idx[k], k) = 1.0;
  }
  return es;
}

} // namespace detail

/// Spectrum of an explicit matter Hamiltonian (for example H_m plus a gauge self-energy).
inline MatterSpectrum matter_spectrum(const MatterModel& model, const Operator& h) {
  require_same_dim(model.h_m, h);
  const EigenSystem es = detail::is_diagonal(h.matrix()) ? detail::diagonal_eigensystem(h.matrix()) : eigh(h);
  MatterSpectrum sp;
  sp.energies = es.values;
  sp.vectors = es.vectors;
  sp.ground_degeneracy = count_ground_degeneracy(es.values);
  sp.V = model.params.V;
  const cmat& U = es.vectors;
  auto conj3 = [&](const Vec3Ops& ops) {
    Vec3Mats t;
    for (int i = 0; i < 3; ++i) t[i] = ops[i].is_zero() ? cmat::Zero(U.cols(), U.cols()) : cmat(U.adjoint() * ops[i].matrix() * U);
    return t;
  };
  sp.tables["d"] = conj3(model.dipole);
  if (model.momentum) sp.tables["p"] = conj3(*model.momentum);
  for (const auto& [k, ops] : model.para_current) sp.tables[current_label(k)] = conj3(ops);
  for (const auto& [k, ops] : model.pol_transverse) sp.tables[polarization_label(k)] = conj3(ops);
  return sp;
}

inline MatterSpectrum matter_spectrum(const MatterModel& model) { return matter_spectrum(model, model.h_m); }

/// Largest deviation of the site density of eigenstate n from the uniform value N/L.
/// Members of a degenerate multiplet are replaced by the matching momentum eigenstate.
inline double check_uniform_density(const MatterModel& model, int n) {
  if (model.kind != ModelKind::RingLattice) throw ArgumentError("uniform density check needs a ring lattice model");
  const EigenSystem es = eigh(model.h_m);
  const int L = model.params.sites;
  if (n < 0 || n >= L) throw ArgumentError("eigenstate index out of range");
  int lo = n, hi = n;
  while (lo > 0 && es.values(n) - es.values(lo - 1) <= 1e-10) --lo;
  while (hi + 1 < L && es.values(hi + 1) - es.values(n) <= 1e-10) ++hi;
  cvec psi = es.vectors.col(n);
  if (hi > lo) {
    const cmat sub = es.vectors.middleCols(lo, hi - lo + 1);
    const cmat T = ring_translation(L).matrix();
    const cmat k = sub.adjoint() * (cplx(0, 0.5) * (T - T.adjoint())) * sub;
    const EigenSystem ks = eigh(Operator(0.5 * (k + k.adjoint()), true));
    psi = sub * ks.vectors.col(n - lo);
  }
  double dev = 0;
  for (int j = 0; j < L; ++j) dev = std::max(dev, std::abs(std::norm(psi(j)) - model.params.N / L));
  return dev;
}

/// Thomas-Reiche-Kuhn sum  sum_{n != n'} |<n|P_i|n'>|^2 / (e_n - e_n'), which equals m N / 2.
inline double trk_sum(const MatterSpectrum& spectrum, int axis, int reference) {
  if (!spectrum.has("p")) throw UnsupportedError("TRK sum needs a model with a canonical momentum representation");
  if (axis < 0 || axis > 2) throw ArgumentError("axis must be 0, 1 or 2");
  if (reference < 0 || reference >= spectrum.size()) throw ArgumentError("reference level out of range");
  const cmat& P = spectrum.table("p")[axis];
  detail::KahanSum<double> s;
  for (Eigen::Index n = 0; n < spectrum.size(); ++n) {
    if (n == reference) continue;
    const double de = spectrum.energies(n) - spectrum.energies(reference);
    if (std::abs(de) <= 1e-10) continue;
    s.add(std::norm(P(n, reference)) / de);
  }
  return s.value();
}

} // namespace photoncond

#endif // PHOTONCOND_MATTER_MODELS_HPP
