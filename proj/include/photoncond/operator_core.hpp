#ifndef PHOTONCOND_OPERATOR_CORE_HPP
#define PHOTONCOND_OPERATOR_CORE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "detail/lapack.hpp"
#include "errors.hpp"

namespace photoncond {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;

inline constexpr std::size_t kDefaultMaxDim = 20000;

inline double max_abs(const cmat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const cmat& m) { return max_abs(m - m.adjoint()); }

/// Dense square operator on a finite Hilbert space.
/// With the hermitian flag set the stored matrix is exactly self-adjoint.
class Operator {
public:
  Operator() = default;

  explicit Operator(cmat m, bool hermitian = false) : m_(std::move(m)), hermitian_(hermitian) {
    if (m_.rows() != m_.cols())
      throw ArgumentError("operator matrix must be square, got " + std::to_string(m_.rows()) + "x" +
                          std::to_string(m_.cols()));
    if (hermitian_) {
      const double defect = hermiticity_defect(m_);
      if (defect > 1e-10 * std::max(1.0, max_abs(m_)))
        throw ArgumentError("operator flagged hermitian has defect " + std::to_string(defect));
      m_ = 0.5 * (m_ + m_.adjoint()).eval();
    }
  }

  static Operator identity(Eigen::Index n) { return Operator(cmat::Identity(n, n), true); }
  static Operator zero(Eigen::Index n) { return Operator(cmat::Zero(n, n), true); }

  Eigen::Index dim() const { return m_.rows(); }
  const cmat& matrix() const { return m_; }
  bool hermitian() const { return hermitian_; }
  bool is_zero(double tol = 0.0) const { return max_abs(m_) <= tol; }

  Operator adjoint() const { return Operator(m_.adjoint(), hermitian_); }

private:
  cmat m_;
  bool hermitian_ = false;
};

inline void require_same_dim(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim())
    throw ArgumentError("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

inline Operator operator+(const Operator& a, const Operator& b) {
  require_same_dim(a, b);
  return Operator(a.matrix() + b.matrix(), a.hermitian() && b.hermitian());
}
inline Operator operator-(const Operator& a, const Operator& b) {
  require_same_dim(a, b);
  return Operator(a.matrix() - b.matrix(), a.hermitian() && b.hermitian());
}
inline Operator operator*(const Operator& a, const Operator& b) {
  require_same_dim(a, b);
  return Operator(a.matrix() * b.matrix());
}
inline Operator operator*(double s, const Operator& a) { return Operator(s * a.matrix(), a.hermitian()); }
inline Operator operator*(cplx s, const Operator& a) {
  return Operator(s * a.matrix(), a.hermitian() && s.imag() == 0.0);
}

/// Column eigenvectors with ascending eigenvalues.
struct EigenSystem {
  Eigen::VectorXd values;
  cmat vectors;
};

/// Normalized state vector.
class Statevector {
public:
  Statevector() = default;
  explicit Statevector(cvec amplitudes) : amp_(std::move(amplitudes)) {
    if (std::abs(amp_.norm() - 1.0) > 1e-12)
      throw ArgumentError("state vector is not normalized (norm " + std::to_string(amp_.norm()) + ")");
  }
  static Statevector normalized(const cvec& v) {
    const double n = v.norm();
    if (n == 0.0) throw ArgumentError("cannot normalize the zero vector");
    return Statevector(v / n);
  }
  static Statevector basis(Eigen::Index dim, Eigen::Index k) {
    cvec v = cvec::Zero(dim);
    v(k) = 1.0;
    return Statevector(v);
  }
  Eigen::Index dim() const { return amp_.size(); }
  const cvec& amplitudes() const { return amp_; }

private:
  cvec amp_;
};

inline Operator tensor(const Operator& a, const Operator& b, std::size_t max_dim = kDefaultMaxDim) {
  const auto na = a.dim(), nb = b.dim();
  if (static_cast<std::size_t>(na) * static_cast<std::size_t>(nb) > max_dim)
    throw ResourceError("tensor product dimension " + std::to_string(na * nb) + " exceeds limit " +
                        std::to_string(max_dim));
  cmat out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j) out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
  return Operator(std::move(out), a.hermitian() && b.hermitian());
}

/// Truncated bosonic annihilation and creation operators.
inline std::pair<Operator, Operator> boson_ladder(int cutoff) {
  if (cutoff < 2) throw ArgumentError("Fock cutoff must be at least 2, got " + std::to_string(cutoff));
  cmat a = cmat::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  cmat ad = a.adjoint();
  return {Operator(std::move(a)), Operator(std::move(ad))};
}

inline Operator number_operator(int cutoff) {
  cmat n = cmat::Zero(cutoff, cutoff);
  for (int k = 0; k < cutoff; ++k) n(k, k) = k;
  return Operator(std::move(n), true);
}

namespace detail {

// Make the largest-magnitude component of every column real positive.
// Near-ties are resolved towards the lowest index so the choice is stable.
inline void fix_phases(cmat& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double vmax = v.col(j).cwiseAbs().maxCoeff();
    if (vmax == 0.0) continue;
    Eigen::Index k = 0;
    while (std::abs(v(k, j)) < vmax * (1.0 - 1e-12)) ++k;
    const cplx phase = std::conj(v(k, j)) / std::abs(v(k, j));
    v.col(j) *= phase;
    v(k, j) = std::abs(v(k, j));
  }
}

inline void require_hermitian(const Operator& h) {
  const double defect = hermiticity_defect(h.matrix());
  if (defect > 1e-10 * std::max(1.0, max_abs(h.matrix())))
    throw ArgumentError("eigh requires a Hermitian matrix (defect " + std::to_string(defect) + ")");
}

} // namespace detail

inline EigenSystem eigh(const Operator& h) {
  detail::require_hermitian(h);
  EigenSystem es;
  detail::heev_full(h.matrix(), es.values, es.vectors);
  detail::fix_phases(es.vectors);
  return es;
}

/// The k lowest eigenpairs; cheaper than eigh when only the bottom of the spectrum is needed.
inline EigenSystem eigh_lowest(const Operator& h, int k) {
  if (k < 1) throw ArgumentError("eigh_lowest needs k >= 1");
  detail::require_hermitian(h);
  EigenSystem es;
  detail::heev_lowest(h.matrix(), k, es.values, es.vectors);
  detail::fix_phases(es.vectors);
  return es;
}

/// D(beta) = exp(beta c^dagger - beta^* c) on a truncated Fock space.
inline Operator displacement(cplx beta, int cutoff) {
  auto [c, cd] = boson_ladder(cutoff);
  // K = i(beta c^dagger - beta^* c) is Hermitian and D = exp(-iK).
  const cmat k = cplx(0, 1) * (beta * cd.matrix() - std::conj(beta) * c.matrix());
  const EigenSystem es = eigh(Operator(k, true));
  const cvec phases = (-cplx(0, 1) * es.values.cast<cplx>()).array().exp();
  return Operator(es.vectors * phases.asDiagonal() * es.vectors.adjoint());
}

inline cplx expectation(const Statevector& state, const Operator& op) {
  if (state.dim() != op.dim())
    throw ArgumentError("state dimension " + std::to_string(state.dim()) + " does not match operator dimension " +
                        std::to_string(op.dim()));
  const cplx v = state.amplitudes().dot(op.matrix() * state.amplitudes());
  return op.hermitian() ? cplx(v.real(), 0.0) : v;
}

} // namespace photoncond

#endif // PHOTONCOND_OPERATOR_CORE_HPP
