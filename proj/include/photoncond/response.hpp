#ifndef PHOTONCOND_RESPONSE_HPP
#define PHOTONCOND_RESPONSE_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "detail/sum.hpp"
#include "errors.hpp"
#include "gauge.hpp"
#include "matter_models.hpp"
#include "operator_core.hpp"

namespace photoncond {

inline constexpr double kDegeneracyTol = 1e-10;

using Matrix3c = Eigen::Matrix3cd;

/// Static response tensor chi_{q i, -q' j} of operator O (at q) to C (at -q').
struct SlrfTensor {
  Matrix3c chi = Matrix3c::Zero();
  int q_index = 0;
  int q_index_c = 0;
  std::string o_label, c_label;
  std::optional<double> transverse_scalar;
};

inline void require_unique_ground(const MatterSpectrum& sp) {
  if (sp.size() > 1 && sp.energies(1) - sp.energies(0) <= kDegeneracyTol)
    throw UnsupportedError("static response needs a non-degenerate ground state (gap " +
                           std::to_string(sp.energies(1) - sp.energies(0)) + ", degeneracy " +
                           std::to_string(sp.ground_degeneracy) + ")");
}

/// Operator in the eigenbasis of the spectrum: <n|O|n'>.
inline cmat to_eigenbasis(const MatterSpectrum& sp, const Operator& op) {
  if (op.dim() != sp.size()) throw ArgumentError("operator dimension does not match the matter spectrum");
  return sp.vectors.adjoint() * op.matrix() * sp.vectors;
}

/// -2V sum_{n != 0} <0|O|n><n|C|0> / (e_n - e_0) for operators given in the eigenbasis.
inline cplx lehmann_sum(const MatterSpectrum& sp, const cmat& o, const cmat& c) {
  require_unique_ground(sp);
  detail::KahanSum<cplx> s;
  for (Eigen::Index n = 1; n < sp.size(); ++n) {
    const cplx num = o(0, n) * c(n, 0);
    if (num == 0.0) continue;
    s.add(num / (sp.energies(n) - sp.energies(0)));
  }
  return -2.0 * sp.V * s.value();
}

inline cplx lehmann_sum(const MatterSpectrum& sp, const Operator& o, const Operator& c) {
  return lehmann_sum(sp, to_eigenbasis(sp, o), to_eigenbasis(sp, c));
}

namespace detail {

inline std::string table_key(const std::string& label, int q_index, int modes) {
  if ((label == "jp" || label == "pt") && modes == 1 && q_index != 0)
    throw ArgumentError("long-wavelength spectrum only carries q index 0");
  if (label == "jp" || label == "pt") return label + ":" + std::to_string(((q_index % modes) + modes) % modes);
  if (label == "d" || label == "p") {
    if (q_index != 0) throw ArgumentError("operator '" + label + "' has no momentum dependence; use q index 0");
    return label;
  }
  throw ArgumentError("unknown operator label '" + label + "' (expected jp, pt, d or p)");
}

} // namespace detail

inline int spectrum_modes(const MatterSpectrum& sp) {
  int modes = 0;
  while (sp.has("jp:" + std::to_string(modes))) ++modes;
  return std::max(modes, 1);
}

/// chi_{q i, -q' j} = -2V sum_n <0|O_{q i}|n><n|C_{-q' j}|0> / (e_n - e_0).
inline SlrfTensor slrf_cross(const MatterSpectrum& sp, const std::string& o_label, int q_index, const std::string& c_label,
                             int q_index_c) {
  const int modes = spectrum_modes(sp);
  const Vec3Mats& O = sp.table(detail::table_key(o_label, q_index, modes));
  const Vec3Mats& C = sp.table(detail::table_key(c_label, -q_index_c, modes));
  SlrfTensor t;
  t.q_index = q_index;
  t.q_index_c = q_index_c;
  t.o_label = o_label;
  t.c_label = c_label;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.chi(i, j) = lehmann_sum(sp, O[i], C[j]);
  return t;
}

inline SlrfTensor slrf(const MatterSpectrum& sp, const std::string& o_label, const std::string& c_label, int q_index) {
  return slrf_cross(sp, o_label, q_index, c_label, q_index);
}

struct TransverseProjection {
  double scalar = 0;  // eps1 . chi . eps1
  double second = 0;  // eps2 . chi . eps2
  double off_diag = 0;
  bool isotropic = false;
};

inline TransverseProjection transverse_project(SlrfTensor& t, const ModeSpec& mode) {
  auto proj = [&](int s, int u) -> cplx {
    const Eigen::Vector3cd a = mode.eps[s].cast<cplx>(), b = mode.eps[u].cast<cplx>();
    return a.dot(t.chi * b);
  };
  TransverseProjection p;
  p.scalar = proj(0, 0).real();
  p.second = proj(1, 1).real();
  p.off_diag = std::max(std::abs(proj(0, 1)), std::abs(proj(1, 0)));
  p.isotropic = std::abs(p.scalar - p.second) <= 1e-10 * std::max(1.0, std::abs(p.scalar)) && p.off_diag <= 1e-10;
  if (p.isotropic)
    t.transverse_scalar = p.scalar;
  else
    t.transverse_scalar.reset();
  return p;
}

/// Diamagnetic response -e^2 N / (m V nu^2).
inline double chi_md(double charge, double mass, double count, double volume, double nu) {
  if (!(nu > 0)) throw ArgumentError("chi_md needs a positive mode frequency");
  if (!(mass > 0) || !(volume > 0)) throw ArgumentError("chi_md needs positive mass and volume");
  return -charge * charge * count / (mass * volume * nu * nu);
}

/// Ground-state polarizability tensor alpha_ij(omega).
inline Eigen::Matrix3d polarizability(const MatterSpectrum& sp, double omega) {
  require_unique_ground(sp);
  const Vec3Mats& d = sp.table("d");
  double nearest = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 1; n < sp.size(); ++n) {
    const double e = sp.energies(n) - sp.energies(0);
    if (std::abs(std::abs(omega) - e) < std::abs(std::abs(omega) - nearest)) nearest = e;
  }
  if (std::abs(std::abs(omega) - nearest) <= 1e-9)
    throw ArgumentError("polarizability frequency " + std::to_string(omega) + " is on the pole at " + std::to_string(nearest));
  Eigen::Matrix3d alpha;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      detail::KahanSum<double> s;
      for (Eigen::Index n = 1; n < sp.size(); ++n) {
        const double e = sp.energies(n) - sp.energies(0);
        const cplx a = d[i](0, n) * d[j](n, 0), b = d[j](0, n) * d[i](n, 0);
        if (a == 0.0 && b == 0.0) continue;
        s.add((a / (e - omega) + b / (e + omega)).real());
      }
      alpha(i, j) = s.value();
    }
  return alpha;
}

/// Largest entry of the cross-momentum response of the current and polarization operators.
/// The q = 0 polarization is origin dependent and only enters through the current.
inline double check_translational_invariance(const MatterSpectrum& sp, int q_index, int q_index2) {
  const int modes = spectrum_modes(sp);
  const bool uniform = (q_index % modes) == 0 || (q_index2 % modes) == 0;
  double worst = 0;
  for (const char* label : {"jp", "pt"}) {
    if (uniform && std::string(label) == "pt") continue;
    const SlrfTensor t = slrf_cross(sp, label, q_index, label, q_index2);
    worst = std::max(worst, t.chi.cwiseAbs().maxCoeff());
  }
  return worst;
}

} // namespace photoncond

#endif // PHOTONCOND_RESPONSE_HPP
