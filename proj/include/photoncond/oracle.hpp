#ifndef PHOTONCOND_ORACLE_HPP
#define PHOTONCOND_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bogoliubov.hpp"
#include "errors.hpp"
#include "gauge.hpp"
#include "matter_models.hpp"
#include "operator_core.hpp"
#include "response.hpp"

namespace photoncond {

namespace detail {
// Dense Hamiltonian, eigenvectors and solver workspace are each about n^2 complex entries.
inline std::size_t physical_memory() {
  const long pages = ::sysconf(_SC_PHYS_PAGES), page = ::sysconf(_SC_PAGE_SIZE);
  if (pages <= 0 || page <= 0) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(pages) * static_cast<std::size_t>(page);
}
} // namespace detail

/// One photon oscillator of the truncated field: a polarization of a cavity mode.
struct PhotonMode {
  ModeSpec mode;
  int sigma = 0;
  int cutoff = 20;
};

struct FullSystemOptions {
  std::size_t max_dim = kDefaultMaxDim;
  // Transverse self-energy alpha^2 (eps . d)^2 / (2V). Defaults to on for the anharmonic dipole; the
  // two-level truncation keeps only its per-dipole constant part, which is dropped.
  std::optional<bool> dipole_self_energy;
};

/// H = H_m + sum_k nu_k (a_k^dagger a_k + 1/2) + sum_k A_k (F_k^dagger a_k + F_k a_k^dagger)
///     + sum_{k l} Delta D_{kl} (a_k + a_k^dagger)(a_l + a_l^dagger) [+ dipole self-energy].
/// The matter index is the slowest, then the photon modes in order.
struct FullSystem {
  GaugeSpec gauge;
  std::vector<PhotonMode> modes;
  Eigen::Index matter_dim = 0;
  Operator H;
  std::vector<Operator> eps_d; // eps_k . d on the matter space, per photon mode
  std::vector<Operator> coupling; // F_k on the matter space

  Eigen::Index dim() const { return H.dim(); }
  Eigen::Index photon_dim() const {
    Eigen::Index n = 1;
    for (const auto& m : modes) n *= m.cutoff;
    return n;
  }
  Eigen::Index stride(size_t k) const {
    Eigen::Index s = 1;
    for (size_t l = k + 1; l < modes.size(); ++l) s *= modes[l].cutoff;
    return s;
  }
  int occupation(Eigen::Index index, size_t k) const {
    return static_cast<int>((index / stride(k)) % modes[k].cutoff);
  }
};

namespace detail {

struct Entry {
  Eigen::Index r, c;
  cplx v;
};
using Entries = std::vector<Entry>;

inline Entries entries_of(const cmat& m) {
  Entries e;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0) e.push_back({i, j, m(i, j)});
  return e;
}

inline Entries identity_entries(Eigen::Index n) {
  Entries e;
  for (Eigen::Index i = 0; i < n; ++i) e.push_back({i, i, 1.0});
  return e;
}

/// out += coef * (f_0 kron f_1 kron ... ), with factors given by their nonzero entries.
inline void add_kron(cmat& out, cplx coef, const std::vector<const Entries*>& f, const std::vector<Eigen::Index>& dims) {
  const size_t n = f.size();
  std::vector<Eigen::Index> stride(n, 1);
  for (size_t k = n - 1; k-- > 0;) stride[k] = stride[k + 1] * dims[k + 1];
  std::function<void(size_t, Eigen::Index, Eigen::Index, cplx)> rec = [&](size_t k, Eigen::Index r, Eigen::Index c, cplx v) {
    if (k == n) {
      out(r, c) += v;
      return;
    }
    for (const Entry& e : *f[k]) rec(k + 1, r + e.r * stride[k], c + e.c * stride[k], v * e.v);
  };
  rec(0, 0, 0, coef);
}

inline bool same_mode(const ModeSpec& a, const ModeSpec& b) {
  return a.q_index == b.q_index && (a.q_hat - b.q_hat).norm() < 1e-12 && a.nu == b.nu && a.V == b.V;
}

inline void require_oracle_model(const MatterModel& model) {
  if (model.kind == ModelKind::RingLattice)
    throw UnsupportedError("the exact-diagonalization oracle covers long-wavelength models only");
}

inline bool use_dipole_self_energy(const MatterModel& model, const FullSystemOptions& opts) {
  return opts.dipole_self_energy.value_or(model.kind == ModelKind::AnharmonicDipole);
}

/// Matter Hamiltonian including the transverse self-energy of the included photon modes.
inline Operator oracle_matter_hamiltonian(const MatterModel& model, const GaugeSpec& g, const std::vector<PhotonMode>& modes,
                                          const FullSystemOptions& opts) {
  cmat h = model.h_m.matrix();
  if (use_dipole_self_energy(model, opts) && g.pol_weight() != 0.0) {
    for (const auto& pm : modes) {
      const cmat ed = detail::project(model.dipole, pm.mode.eps[pm.sigma]).matrix();
      h += (g.pol_weight() * g.pol_weight() / (2.0 * pm.mode.V)) * ed * ed;
    }
  }
  return Operator(h, true);
}

/// Delta D between photon modes k and l (zero across different cavity modes).
inline Eigen::MatrixXd diamagnetic_couplings(const MatterModel& model, const GaugeSpec& g, const std::vector<PhotonMode>& modes) {
  const size_t n = modes.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (size_t k = 0; k < n; ++k) {
    const DiamagneticMatrix dm = diamagnetic_D(model, g, modes[k].mode);
    for (size_t l = 0; l < n; ++l)
      if (same_mode(modes[k].mode, modes[l].mode)) c(k, l) = dm.Delta * dm.D(modes[k].sigma, modes[l].sigma);
  }
  return c;
}

} // namespace detail

inline FullSystem full_hamiltonian(const MatterModel& model, const GaugeSpec& g, const std::vector<PhotonMode>& modes,
                                   const FullSystemOptions& opts = {}) {
  detail::require_oracle_model(model);
  if (modes.empty()) throw ArgumentError("full system needs at least one photon mode");
  if (modes.size() > 3) throw UnsupportedError("oracle runs are limited to three photon modes");
  FullSystem fs;
  fs.gauge = g;
  fs.modes = modes;
  fs.matter_dim = model.dim();
  std::vector<Eigen::Index> dims{model.dim()};
  std::size_t total = static_cast<std::size_t>(model.dim());
  for (const auto& pm : modes) {
    if (pm.cutoff < 2) throw ArgumentError("Fock cutoff must be at least 2");
    if (pm.sigma != 0 && pm.sigma != 1) throw ArgumentError("polarization index must be 0 or 1");
    dims.push_back(pm.cutoff);
    total *= static_cast<std::size_t>(pm.cutoff);
    if (total > opts.max_dim)
      throw ResourceError("full system dimension exceeds limit " + std::to_string(opts.max_dim));
  }
  if (total * total * sizeof(cplx) * 3 > detail::physical_memory())
    throw ResourceError("full system dimension " + std::to_string(total) + " needs more memory than is installed");
  const Eigen::Index n = static_cast<Eigen::Index>(total);
  cmat h = cmat::Zero(n, n);

  const Operator hm = detail::oracle_matter_hamiltonian(model, g, modes, opts);
  const detail::Entries hm_e = detail::entries_of(hm.matrix()), id_m = detail::identity_entries(model.dim());
  std::vector<detail::Entries> id_p, a_e, ad_e, n_e, x_e;
  for (const auto& pm : modes) {
    auto [a, ad] = boson_ladder(pm.cutoff);
    id_p.push_back(detail::identity_entries(pm.cutoff));
    a_e.push_back(detail::entries_of(a.matrix()));
    ad_e.push_back(detail::entries_of(ad.matrix()));
    n_e.push_back(detail::entries_of(ad.matrix() * a.matrix()));
    x_e.push_back(detail::entries_of(a.matrix() + ad.matrix()));
  }
  auto factors = [&](const detail::Entries* m) {
    std::vector<const detail::Entries*> f{m};
    for (const auto& e : id_p) f.push_back(&e);
    return f;
  };

  detail::add_kron(h, 1.0, factors(&hm_e), dims);
  for (size_t k = 0; k < modes.size(); ++k) {
    const ModeSpec& ms = modes[k].mode;
    auto f = factors(&id_m);
    f[k + 1] = &n_e[k];
    detail::add_kron(h, ms.nu, f, dims);
    h.diagonal().array() += 0.5 * ms.nu;

    const Operator F = coupling_f(model, g, ms, modes[k].sigma);
    fs.coupling.push_back(F);
    fs.eps_d.push_back(detail::project(model.dipole, ms.eps[modes[k].sigma]));
    const detail::Entries fe = detail::entries_of(F.matrix()), fde = detail::entries_of(F.matrix().adjoint());
    f = factors(&fde);
    f[k + 1] = &a_e[k];
    detail::add_kron(h, ms.A, f, dims);
    f = factors(&fe);
    f[k + 1] = &ad_e[k];
    detail::add_kron(h, ms.A, f, dims);
  }
  const Eigen::MatrixXd dia = detail::diamagnetic_couplings(model, g, modes);
  for (size_t k = 0; k < modes.size(); ++k)
    for (size_t l = 0; l < modes.size(); ++l) {
      if (dia(k, l) == 0.0) continue;
      if (k == l) {
        auto [a, ad] = boson_ladder(modes[k].cutoff);
        const cmat x = a.matrix() + ad.matrix();
        const detail::Entries x2 = detail::entries_of(x * x);
        auto f = factors(&id_m);
        f[k + 1] = &x2;
        detail::add_kron(h, dia(k, l), f, dims);
      } else {
        auto f = factors(&id_m);
        f[k + 1] = &x_e[k];
        f[l + 1] = &x_e[l];
        detail::add_kron(h, dia(k, l), f, dims);
      }
    }
  fs.H = Operator(std::move(h), true);
  return fs;
}

namespace detail {

/// Index sets of the connected components of the nonzero pattern of h (symmetry sectors such as parity).
inline std::vector<std::vector<Eigen::Index>> coupled_blocks(const cmat& h) {
  const Eigen::Index n = h.rows();
  std::vector<int> label(n, -1);
  std::vector<std::vector<Eigen::Index>> blocks;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    const int b = static_cast<int>(blocks.size());
    blocks.emplace_back();
    std::vector<Eigen::Index> stack{s};
    label[s] = b;
    while (!stack.empty()) {
      const Eigen::Index j = stack.back();
      stack.pop_back();
      blocks[b].push_back(j);
      for (Eigen::Index i = 0; i < n; ++i)
        if (label[i] < 0 && h(i, j) != 0.0) {
          label[i] = b;
          stack.push_back(i);
        }
    }
    std::sort(blocks[b].begin(), blocks[b].end());
  }
  return blocks;
}

} // namespace detail

/// The k lowest eigenpairs of the full system, solved sector by sector when H is block diagonal.
inline EigenSystem lowest_states(const FullSystem& fs, int k) {
  if (k < 1) throw ArgumentError("lowest_states needs k >= 1");
  const cmat& h = fs.H.matrix();
  const auto blocks = detail::coupled_blocks(h);
  if (blocks.size() == 1) return eigh_lowest(fs.H, k);
  struct Pair {
    double value;
    size_t block;
    Eigen::Index col;
  };
  std::vector<Pair> pairs;
  std::vector<EigenSystem> sol;
  for (size_t b = 0; b < blocks.size(); ++b) {
    const auto& idx = blocks[b];
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
    cmat sub(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < m; ++i) sub(i, j) = h(idx[i], idx[j]);
    sol.push_back(eigh_lowest(Operator(std::move(sub)), static_cast<int>(std::min<Eigen::Index>(k, m))));
    for (Eigen::Index c = 0; c < sol.back().values.size(); ++c) pairs.push_back({sol.back().values(c), b, c});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.value < b.value; });
  const int found = std::min<int>(k, static_cast<int>(pairs.size()));
  EigenSystem es;
  es.values.resize(found);
  es.vectors = cmat::Zero(fs.dim(), found);
  for (int c = 0; c < found; ++c) {
    const Pair& p = pairs[c];
    es.values(c) = p.value;
    const auto& idx = blocks[p.block];
    for (size_t i = 0; i < idx.size(); ++i) es.vectors(idx[i], c) = sol[p.block].vectors(i, p.col);
  }
  detail::fix_phases(es.vectors);
  return es;
}

struct GroundState {
  double energy = 0;
  Statevector state;
};

inline GroundState ground_state(const FullSystem& fs) {
  const EigenSystem es = lowest_states(fs, 1);
  if (!std::isfinite(es.values(0))) throw NumericError("ground-state solver returned a non-finite energy");
  return {es.values(0), Statevector::normalized(es.vectors.col(0))};
}

struct Coherence {
  cplx a;       // <a>
  double n = 0; // <a^dagger a>
};

inline Coherence photon_coherence(const Statevector& psi, const FullSystem& fs, size_t k) {
  if (k >= fs.modes.size()) throw ArgumentError("photon mode index out of range");
  if (psi.dim() != fs.dim()) throw ArgumentError("state does not belong to this system");
  const cvec& v = psi.amplitudes();
  const Eigen::Index s = fs.stride(k);
  Coherence c;
  c.a = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const int occ = fs.occupation(i, k);
    if (occ == 0) continue;
    c.a += std::conj(v(i - s)) * std::sqrt(double(occ)) * v(i);
    c.n += occ * std::norm(v(i));
  }
  return c;
}

/// <O_m (x) 1> for a matter operator.
inline cplx matter_expectation(const Statevector& psi, const FullSystem& fs, const Operator& om) {
  if (om.dim() != fs.matter_dim) throw ArgumentError("matter operator dimension mismatch");
  const Eigen::Index np = fs.photon_dim();
  const Eigen::Map<const cmat> m(psi.amplitudes().data(), np, fs.matter_dim); // column = matter index
  return (m.conjugate() * om.matrix()).cwiseProduct(m).sum();
}

/// <eps_k . E_T> = i nu A <a - a^dagger> - alpha <eps_k . d> / V for every photon mode.
inline std::vector<double> transverse_field_expectation(const Statevector& psi, const FullSystem& fs) {
  std::vector<double> out;
  for (size_t k = 0; k < fs.modes.size(); ++k) {
    const ModeSpec& ms = fs.modes[k].mode;
    const Coherence c = photon_coherence(psi, fs, k);
    const cplx pi = cplx(0, ms.nu * ms.A) * (c.a - std::conj(c.a));
    const cplx pt = fs.gauge.pol_weight() == 0.0 ? cplx(0) : fs.gauge.pol_weight() * matter_expectation(psi, fs, fs.eps_d[k]) / ms.V;
    out.push_back((pi - pt).real());
  }
  return out;
}

struct CutoffResult {
  int cutoff = 0;
  EigenSystem states;
};

/// Raises the Fock cutoff in steps until the k lowest energies move by less than tol.
inline CutoffResult converge_cutoff(const std::function<FullSystem(int)>& build, int start, int k = 1, int step = 10,
                                    int max_cutoff = 400, double tol = 1e-9) {
  if (start < 2 || step < 1) throw ArgumentError("cutoff schedule needs start >= 2 and step >= 1");
  CutoffResult prev{start, lowest_states(build(start), k)};
  for (int c = start + step; c <= max_cutoff; c += step) {
    CutoffResult cur{c, lowest_states(build(c), k)};
    if ((cur.states.values - prev.states.values).cwiseAbs().maxCoeff() < tol) return cur;
    prev = std::move(cur);
  }
  throw NumericError("Fock cutoff did not converge below " + std::to_string(max_cutoff));
}

struct VariationalResult {
  cplx beta_star = 0;
  double energy_star = 0;
  double energy_zero = 0;
  std::vector<double> energies;
};

/// Minimizes <beta, psi_m| H |beta, psi_m> over coherent amplitudes on the grid, with the matter
/// state relaxed to the ground state of the photon-averaged Hamiltonian at every beta.
inline VariationalResult variational_scan(const MatterModel& model, const GaugeSpec& g, const PhotonMode& pm,
                                          const std::vector<cplx>& grid, const FullSystemOptions& opts = {}) {
  detail::require_oracle_model(model);
  if (grid.empty()) throw ArgumentError("variational grid is empty");
  const std::vector<PhotonMode> modes{pm};
  const Operator hm = detail::oracle_matter_hamiltonian(model, g, modes, opts);
  const cmat F = coupling_f(model, g, pm.mode, pm.sigma).matrix();
  const double dia = detail::diamagnetic_couplings(model, g, modes)(0, 0);
  const ModeSpec& ms = pm.mode;
  auto energy = [&](cplx b) {
    const double x = 2.0 * b.real();
    cmat h = hm.matrix() + ms.A * (std::conj(b) * F + b * F.adjoint());
    h.diagonal().array() += ms.nu * (std::norm(b) + 0.5) + dia * (x * x + 1.0);
    return eigh_lowest(Operator(h, true), 1).values(0);
  };
  VariationalResult r;
  r.energy_zero = energy(0.0);
  r.energy_star = std::numeric_limits<double>::infinity();
  for (cplx b : grid) {
    const double e = energy(b);
    r.energies.push_back(e);
    if (e < r.energy_star) {
      r.energy_star = e;
      r.beta_star = b;
    }
  }
  return r;
}

/// Mean-field displacement of the two-level (Dicke) model above threshold: |beta|^2 = N gap (g - 1/g) / (4 nu).
inline double dicke_mean_field_beta(int count, double gap, double nu, double g) {
  return g <= 1.0 ? 0.0 : std::sqrt(count * gap * (g - 1.0 / g) / (4.0 * nu));
}

struct ConstrainedMin {
  double energy = 0;     // min <H_m>
  double excess = 0;     // min <H_m> - E_0
  cplx field = 0;        // u + i v of H_m + u X + v Y
  cplx achieved = 0;     // <beta_hat>
  double residual = 0;
  int iterations = 0;
};

/// min <H_m> subject to <beta_hat> = <0|beta_hat|0> + delta_beta, by finding the Lagrange field of
/// H_m + u X + v Y with X = (b + b^dagger)/2 and Y = (b - b^dagger)/(2i).
inline ConstrainedMin constrained_min(const MatterSpectrum& sp, const Operator& beta_hat, cplx delta_beta, double tol = 1e-12,
                                      int max_iter = 200) {
  require_unique_ground(sp);
  const cmat B = to_eigenbasis(sp, beta_hat);
  const cmat X = 0.5 * (B + B.adjoint()), Y = cplx(0, -0.5) * (B - B.adjoint());
  const Eigen::Index n = sp.size();
  const Eigen::VectorXd eps = sp.energies.array() - sp.energies(0);
  const cplx target = B(0, 0) + delta_beta;
  const bool has_x = max_abs(X) > 0.0, has_y = max_abs(Y) > 0.0;
  if ((!has_x && delta_beta.real() != 0.0) || (!has_y && delta_beta.imag() != 0.0))
    throw NumericError("constraint target lies outside the range of the displacement operator");

  struct State {
    cvec psi;
    Eigen::Vector2d value, residual;
    Eigen::Matrix2d jac;
  };
  auto solve = [&](double u, double v) {
    cmat h = u * X + v * Y;
    h.diagonal() += eps.cast<cplx>();
    const EigenSystem es = eigh(Operator(h, true));
    if (n > 1 && es.values(1) - es.values(0) <= kDegeneracyTol)
      throw NumericError("constrained ground state became degenerate at field (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    State s;
    s.psi = es.vectors.col(0);
    const cvec x0 = es.vectors.adjoint() * (X * s.psi), y0 = es.vectors.adjoint() * (Y * s.psi);
    s.value = {x0(0).real(), y0(0).real()};
    s.residual = s.value - Eigen::Vector2d(target.real(), target.imag());
    s.jac.setZero();
    for (Eigen::Index k = 1; k < n; ++k) {
      const double de = es.values(k) - es.values(0);
      const cplx xs = x0(k), ys = y0(k);
      s.jac(0, 0) -= 2.0 * std::norm(xs) / de;
      s.jac(1, 1) -= 2.0 * std::norm(ys) / de;
      s.jac(0, 1) -= 2.0 * (std::conj(xs) * ys).real() / de;
    }
    s.jac(1, 0) = s.jac(0, 1);
    return s;
  };
  auto finish = [&](const State& s, double u, double v, int it) {
    ConstrainedMin r;
    r.excess = (s.psi.cwiseAbs2().array() * eps.array()).sum();
    r.energy = sp.energies(0) + r.excess;
    r.field = cplx(u, v);
    r.achieved = cplx(s.value(0), s.value(1));
    r.residual = s.residual.norm();
    r.iterations = it;
    return r;
  };

  if (has_x != has_y) {
    // One-dimensional constraint: the constrained expectation is monotone in the field, so bracket and refine.
    const int c = has_x ? 0 : 1;
    auto at = [&](double f) { return c == 0 ? solve(f, 0.0) : solve(0.0, f); };
    State s0 = at(0.0);
    double r0 = s0.residual(c);
    if (std::abs(r0) <= tol) return finish(s0, 0, 0, 0);
    const double slope = s0.jac(c, c);
    if (slope == 0.0) throw NumericError("constraint operator has no static response");
    double f0 = 0.0, f1 = -r0 / slope;
    State s1 = at(f1);
    double r1 = s1.residual(c);
    int it = 1;
    while (r0 * r1 > 0) {
      f1 = f0 + 2.0 * (f1 - f0);
      s1 = at(f1);
      r1 = s1.residual(c);
      if (++it > 60)
        throw NumericError("could not bracket the Lagrange field: f in [0, " + std::to_string(f1) + "], residuals " +
                           std::to_string(r0) + ", " + std::to_string(r1));
    }
    // Illinois regula falsi on [f0, f1].
    while (it < max_iter) {
      const double f = f1 - r1 * (f1 - f0) / (r1 - r0);
      State s = at(f);
      const double r = s.residual(c);
      ++it;
      if (std::abs(r) <= tol) return finish(s, c == 0 ? f : 0, c == 1 ? f : 0, it);
      if (r * r1 < 0) {
        f0 = f1;
        r0 = r1;
      } else {
        r0 *= 0.5;
      }
      f1 = f;
      r1 = r;
    }
    throw NumericError("Lagrange field search did not converge: bracket [" + std::to_string(f0) + ", " + std::to_string(f1) +
                       "], residuals " + std::to_string(r0) + ", " + std::to_string(r1));
  }

  // Two components: Newton iteration with the analytic static-response Jacobian.
  double u = 0, v = 0;
  State s = solve(u, v);
  for (int it = 0; it < max_iter; ++it) {
    if (s.residual.norm() <= tol) return finish(s, u, v, it);
    const Eigen::Vector2d step = -s.jac.completeOrthogonalDecomposition().solve(s.residual);
    double t = 1.0;
    for (;;) {
      State trial = solve(u + t * step(0), v + t * step(1));
      if (trial.residual.norm() < s.residual.norm() || t < 1e-6) {
        u += t * step(0);
        v += t * step(1);
        s = std::move(trial);
        break;
      }
      t *= 0.5;
    }
  }
  throw NumericError("Lagrange field Newton iteration did not converge (residual " + std::to_string(s.residual.norm()) + ")");
}

struct GaugeInvarianceRow {
  int levels = 0;
  int cutoff = 0;
  double energy_coulomb = 0;
  double energy_dipole = 0;
  double relative_difference = 0;
  double field_coulomb = 0;
  double field_dipole = 0;
};

/// Coulomb and dipole gauge ground energies of the same matter model at each (levels, cutoff) pair.
inline std::vector<GaugeInvarianceRow> gauge_invariance_report(const std::function<MatterModel(int)>& build,
                                                               const ModeSpec& mode, int sigma,
                                                               const std::vector<std::pair<int, int>>& schedule) {
  std::vector<GaugeInvarianceRow> rows;
  for (auto [levels, cutoff] : schedule) {
    const MatterModel m = build(levels);
    if (m.kind != ModelKind::AnharmonicDipole) throw UnsupportedError("gauge invariance report needs an anharmonic dipole model");
    GaugeInvarianceRow r;
    r.levels = levels;
    r.cutoff = cutoff;
    const std::vector<PhotonMode> modes{{mode, sigma, cutoff}};
    const FullSystem c = full_hamiltonian(m, make_gauge(GaugePreset::Coulomb), modes);
    const FullSystem d = full_hamiltonian(m, make_gauge(GaugePreset::Dipole), modes);
    const GroundState gc = ground_state(c), gd = ground_state(d);
    r.energy_coulomb = gc.energy;
    r.energy_dipole = gd.energy;
    r.relative_difference = std::abs(gc.energy - gd.energy) / std::max(std::abs(gc.energy), std::abs(gd.energy));
    r.field_coulomb = transverse_field_expectation(gc.state, c)[0];
    r.field_dipole = transverse_field_expectation(gd.state, d)[0];
    rows.push_back(r);
  }
  return rows;
}

struct ScaledGapPoint {
  size_t index = 0;
  double x = 0;
  std::array<double, 2> gap{};        // E_1 - E_0 at the small and large size
  std::array<double, 2> occupation{}; // <a^dagger a> / N
  double signal = 0;                  // n_s^{1/3} gap_s - n_l^{1/3} gap_l
};

struct CrossingResult {
  bool found = false;
  size_t index = 0;   // first grid index with signal >= 0
  double value = 0;   // linear interpolation of the crossing between grid points
  std::vector<ScaledGapPoint> evaluated;
};

/// Finite-size crossing of the scaled parity gap N^{1/3} (E_1 - E_0) between two sizes along a grid.
/// The grid is scanned upwards in coarse strides and the first sign change is refined by bisection.
inline CrossingResult finite_size_crossing(const std::function<FullSystem(int size, double x, int cutoff)>& build,
                                           const std::vector<double>& grid, int n_small, int n_large, int start_cutoff = 30) {
  if (grid.size() < 2) throw ArgumentError("crossing search needs at least two grid points");
  if (!(n_small < n_large)) throw ArgumentError("crossing search needs n_small < n_large");
  CrossingResult res;
  std::map<size_t, ScaledGapPoint> cache;
  auto eval = [&](size_t i) -> const ScaledGapPoint& {
    auto it = cache.find(i);
    if (it != cache.end()) return it->second;
    ScaledGapPoint p;
    p.index = i;
    p.x = grid[i];
    const int sizes[2] = {n_small, n_large};
    for (int s = 0; s < 2; ++s) {
      const int n = sizes[s];
      const CutoffResult cr = converge_cutoff([&](int c) { return build(n, grid[i], c); }, start_cutoff, 2);
      p.gap[s] = cr.states.values(1) - cr.states.values(0);
      const FullSystem fs = build(n, grid[i], cr.cutoff);
      p.occupation[s] = photon_coherence(Statevector::normalized(cr.states.vectors.col(0)), fs, 0).n / n;
    }
    p.signal = std::cbrt(double(n_small)) * p.gap[0] - std::cbrt(double(n_large)) * p.gap[1];
    return cache.emplace(i, p).first->second;
  };
  const size_t stride = std::max<size_t>(1, grid.size() / 20);
  size_t lo = 0;
  if (eval(0).signal >= 0) {
    res.found = true;
  } else {
    size_t hi = lo;
    bool bracketed = false;
    while (hi + 1 < grid.size()) {
      hi = std::min(grid.size() - 1, lo + stride);
      if (eval(hi).signal >= 0) {
        bracketed = true;
        break;
      }
      lo = hi;
    }
    if (bracketed) {
      while (hi - lo > 1) {
        const size_t mid = lo + (hi - lo) / 2;
        (eval(mid).signal >= 0 ? hi : lo) = mid;
      }
      res.found = true;
      res.index = hi;
      const double s0 = eval(lo).signal, s1 = eval(hi).signal;
      res.value = grid[lo] + (grid[hi] - grid[lo]) * (-s0) / (s1 - s0);
    }
  }
  for (auto& [i, p] : cache) res.evaluated.push_back(p);
  return res;
}

/// Photon part of the Hamiltonian projected on a fixed matter state: E_m + sum nu (n + 1/2)
/// + A sum_sigma (<f_sigma>^* a_sigma + <f_sigma> a_sigma^dagger) + Delta sum D (a + a^dagger)(a + a^dagger),
/// on both polarizations of one mode.
inline Operator effective_photon_hamiltonian(double matter_energy, const ModeSpec& mode, const DiamagneticMatrix& dm,
                                             const std::array<cplx, 2>& f_mean, int cutoff) {
  if (cutoff < 2) throw ArgumentError("Fock cutoff must be at least 2");
  auto [a, ad] = boson_ladder(cutoff);
  const cmat a1 = tensor(a, Operator::identity(cutoff)).matrix(), a2 = tensor(Operator::identity(cutoff), a).matrix();
  const std::array<cmat, 2> ops{a1, a2};
  const Eigen::Index n = cutoff * cutoff;
  cmat h = cmat::Identity(n, n) * (matter_energy + mode.nu);
  for (int s = 0; s < 2; ++s) {
    h += mode.nu * ops[s].adjoint() * ops[s];
    h += mode.A * (std::conj(f_mean[s]) * ops[s] + f_mean[s] * ops[s].adjoint());
  }
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t)
      if (dm.D(s, t) != 0.0)
        h += dm.Delta * dm.D(s, t) * (ops[s] + ops[s].adjoint()) * (ops[t] + ops[t].adjoint());
  return Operator(h, true);
}

} // namespace photoncond

#endif // PHOTONCOND_ORACLE_HPP
