#ifndef PHOTONCOND_BOGOLIUBOV_HPP
#define PHOTONCOND_BOGOLIUBOV_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "gauge.hpp"
#include "operator_core.hpp"

namespace photoncond {

/// Two-polarization Bogoliubov block of one mode. Index tau = 0 is the + branch, tau = 1 the - branch.
/// c_tau = w a_1 + x a_2 + y a_1^dagger + z a_2^dagger.
struct BogoliubovBlock {
  enum class Branch { Symmetric, General, Decoupled };

  double nu = 1.0;
  DiamagneticMatrix dia;
  std::array<double, 2> lambda{1.0, 1.0};
  std::array<double, 2> nu_tau{1.0, 1.0};
  std::array<double, 2> w{}, x{}, y{}, z{};
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero(); // h(sigma, tau)
  double d_q = 0.0;
  Branch branch = Branch::Symmetric;

  double lambda_plus() const { return lambda[0]; }
  double lambda_minus() const { return lambda[1]; }
  /// Lambda_{tau tau'} = sum_sigma h_{sigma tau} h_{sigma tau'}
  Eigen::Matrix2d Lambda() const { return h.transpose() * h; }
};

inline int tau_sign(int tau) { return tau == 0 ? 1 : -1; }

inline BogoliubovBlock diagonalize_block(const DiamagneticMatrix& dm, double nu) {
  if (!(nu > 0)) throw ArgumentError("mode frequency must be positive");
  if (!(dm.Delta >= 0)) throw ArgumentError("Delta_q must be nonnegative");
  const Eigen::Matrix2d& D = dm.D;
  const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
  if (std::abs(D(0, 1) - D(1, 0)) > 1e-12 * scale) throw ArgumentError("diamagnetic matrix must be symmetric");
  const double dmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(D, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (dmin < -1e-12) throw ArgumentError("diamagnetic matrix has negative eigenvalue " + std::to_string(dmin));

  BogoliubovBlock b;
  b.nu = nu;
  b.dia = dm;
  const double D11 = D(0, 0), D22 = D(1, 1), D12 = 0.5 * (D(0, 1) + D(1, 0));
  const double s = std::sqrt((D11 - D22) * (D11 - D22) + 4.0 * D12 * D12);
  const double r = 2.0 * dm.Delta / nu;
  for (int t = 0; t < 2; ++t) {
    b.lambda[t] = std::sqrt(std::max(1.0, 1.0 + r * (D11 + D22 + tau_sign(t) * s)));
    b.nu_tau[t] = nu * b.lambda[t];
  }

  const double tiny = 1e-14 * scale;
  if (std::abs(D12) <= tiny && std::abs(D11 - D22) <= tiny) {
    b.branch = BogoliubovBlock::Branch::Symmetric;
    b.d_q = 0.0;
    for (int t = 0; t < 2; ++t) {
      const double l = b.lambda[t], n = 2.0 * std::sqrt(2.0 * l), ts = tau_sign(t);
      b.y[t] = -ts * (l - 1) / n;
      b.w[t] = -ts * (l + 1) / n;
      b.x[t] = -(l + 1) / n;
      b.z[t] = -(l - 1) / n;
    }
  } else if (std::abs(D12) <= tiny) {
    // Polarizations decouple; the + branch belongs to the polarization with the larger D.
    b.branch = BogoliubovBlock::Branch::Decoupled;
    const int sig_plus = D11 >= D22 ? 0 : 1;
    b.d_q = D11 > D22 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 2; ++t) {
      const double l = b.lambda[t], n = 2.0 * std::sqrt(l);
      const int sig = t == 0 ? sig_plus : 1 - sig_plus;
      const double ca = -(l + 1) / n, cc = -(l - 1) / n;
      b.w[t] = sig == 0 ? ca : 0.0;
      b.y[t] = sig == 0 ? cc : 0.0;
      b.x[t] = sig == 1 ? ca : 0.0;
      b.z[t] = sig == 1 ? cc : 0.0;
    }
  } else {
    b.branch = BogoliubovBlock::Branch::General;
    const double d = (D11 - D22) / (2.0 * D12);
    b.d_q = d;
    const double root = std::sqrt(1.0 + d * d);
    const double sd = d >= 0 ? 1.0 : -1.0;
    const double phi_big = d + sd * root; // root without cancellation; the other is -1/phi_big
    const double sg = D12 > 0 ? 1.0 : -1.0;
    for (int t = 0; t < 2; ++t) {
      const double l = b.lambda[t];
      // The eigenvector (Phi, 1) of D with eigenvalue (D11 + D22 + tau s)/2 has Phi = d + tau sgn(D12) sqrt(1 + d^2).
      const double phi = (tau_sign(t) * sg == sd) ? phi_big : -1.0 / phi_big;
      const double n = std::sqrt(8.0 * l * (1.0 + d * phi));
      b.w[t] = -phi * (1 + l) / n;
      b.x[t] = -(1 + l) / n;
      b.y[t] = -phi * (l - 1) / n;
      b.z[t] = -(l - 1) / n;
    }
  }
  for (int t = 0; t < 2; ++t) {
    b.h(0, t) = b.w[t] - b.y[t];
    b.h(1, t) = b.x[t] - b.z[t];
  }
  return b;
}

/// The 4x4 block [[zeta, -eta], [eta*, -zeta*]] whose eigenvalues are +-nu_tau/2.
inline Eigen::Matrix4d bogoliubov_matrix(const DiamagneticMatrix& dm, double nu) {
  const double al = 2.0 * dm.Delta * dm.D(0, 0), be = 2.0 * dm.Delta * dm.D(1, 1),
               ga = 2.0 * dm.Delta * 0.5 * (dm.D(0, 1) + dm.D(1, 0));
  Eigen::Matrix2d zeta, eta;
  zeta << nu + al, ga, ga, nu + be;
  eta << al, ga, ga, be;
  zeta *= 0.5;
  eta *= 0.5;
  Eigen::Matrix4d m;
  m << zeta, -eta, eta, -zeta;
  return m;
}

struct NumericBlock {
  Eigen::Vector4d values;  // ascending
  Eigen::Matrix4cd vectors; // matching eigenvector columns
  std::array<double, 2> lambda{};
};

inline NumericBlock numeric_block_eigen(const DiamagneticMatrix& dm, double nu) {
  if (!(nu > 0)) throw ArgumentError("mode frequency must be positive");
  const Eigen::Matrix4d m = bogoliubov_matrix(dm, nu);
  Eigen::EigenSolver<Eigen::Matrix4d> es(m);
  if (es.info() != Eigen::Success) throw NumericError("4x4 Bogoliubov eigenproblem did not converge");
  const Eigen::Vector4cd ev = es.eigenvalues();
  const double sc = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (ev.imag().cwiseAbs().maxCoeff() > 1e-9 * sc) throw NumericError("Bogoliubov block has complex eigenvalues");
  const Eigen::Matrix4cd vec = es.eigenvectors();
  Eigen::FullPivLU<Eigen::Matrix4cd> lu(vec);
  if (lu.rank() < 4) throw NumericError("Bogoliubov block is defective");
  std::array<int, 4> idx{0, 1, 2, 3};
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return ev(a).real() < ev(b).real(); });
  NumericBlock nb;
  for (int k = 0; k < 4; ++k) {
    nb.values(k) = ev(idx[k]).real();
    nb.vectors.col(k) = vec.col(idx[k]);
  }
  nb.lambda = {2.0 * nb.values(3) / nu, 2.0 * nb.values(2) / nu};
  return nb;
}

inline Eigen::Matrix4d symplectic_matrix(const BogoliubovBlock& b) {
  Eigen::Matrix2d u, v;
  u << b.w[0], b.x[0], b.w[1], b.x[1];
  v << b.y[0], b.z[0], b.y[1], b.z[1];
  Eigen::Matrix4d M;
  M << u, v, v, u;
  return M;
}

/// max |M K M^dagger - K| with K = diag(1, 1, -1, -1).
inline double verify_symplectic(const BogoliubovBlock& b) {
  const Eigen::Matrix4d M = symplectic_matrix(b);
  const Eigen::Matrix4d K = Eigen::Vector4d(1, 1, -1, -1).asDiagonal();
  return (M * K * M.transpose() - K).cwiseAbs().maxCoeff();
}

/// g_tau = sum_sigma h_{sigma tau} (eps_sigma . f)
inline std::array<Operator, 2> coupling_g(const BogoliubovBlock& b, const std::array<Operator, 2>& f) {
  require_same_dim(f[0], f[1]);
  std::array<Operator, 2> g;
  for (int t = 0; t < 2; ++t) g[t] = Operator(b.h(0, t) * f[0].matrix() + b.h(1, t) * f[1].matrix());
  return g;
}

/// g_tau = sum over polarizations of (w f_q - y f_{-q}^dagger), with (x, z) on the second polarization.
/// Equals the h form above when f_{-q} = f_q^dagger; needed when the coupling has an anti-Hermitian part.
inline std::array<Operator, 2> coupling_g(const BogoliubovBlock& b, const std::array<Operator, 2>& f,
                                          const std::array<Operator, 2>& f_partner) {
  require_same_dim(f[0], f[1]);
  require_same_dim(f[0], f_partner[0]);
  require_same_dim(f[0], f_partner[1]);
  std::array<Operator, 2> g;
  for (int t = 0; t < 2; ++t)
    g[t] = Operator(b.w[t] * f[0].matrix() - b.y[t] * f_partner[0].matrix().adjoint() + b.x[t] * f[1].matrix() -
                    b.z[t] * f_partner[1].matrix().adjoint());
  return g;
}

} // namespace photoncond

#endif // PHOTONCOND_BOGOLIUBOV_HPP
