#ifndef PHOTONCOND_DETAIL_LAPACK_HPP
#define PHOTONCOND_DETAIL_LAPACK_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#include <lapacke.h>

#include <Eigen/Dense>

#include "../errors.hpp"

namespace photoncond::detail {

inline bool is_real(const Eigen::MatrixXcd& h) {
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      if (h(i, j).imag() != 0.0) return false;
  return true;
}

inline void check_info(lapack_int info, const char* routine) {
  if (info != 0)
    throw NumericError(std::string(routine) + " failed with info = " + std::to_string(info));
}

// Largest residual |H v - w v| over a few eigenpairs, relative to the matrix scale.
inline double eigen_residual(const Eigen::MatrixXcd& h, const Eigen::VectorXd& w, const Eigen::MatrixXcd& v) {
  const Eigen::Index m = v.cols();
  if (m == 0) return 0.0;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  double worst = 0;
  for (Eigen::Index j : {Eigen::Index(0), m / 2, m - 1}) {
    const Eigen::VectorXcd r = h * v.col(j) - w(j) * v.col(j);
    worst = std::max(worst, r.cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

inline void check_residual(const Eigen::MatrixXcd& h, const Eigen::VectorXd& w, const Eigen::MatrixXcd& v, const char* routine) {
  const double r = eigen_residual(h, w, v);
  if (!(r <= 1e-9 * std::sqrt(double(std::max<Eigen::Index>(1, h.rows())))))
    throw NumericError(std::string(routine) + " returned eigenvectors with residual " + std::to_string(r));
}

// Real symmetric input also goes through the complex drivers, and divide and conquer (zheevd) is
// avoided: it calls the double-precision gemm kernels, which some OpenBLAS builds get wrong on
// AVX-512 hardware. Every solve is residual-checked.
inline void heev_full(const Eigen::MatrixXcd& h, Eigen::VectorXd& w, Eigen::MatrixXcd& v) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  w.resize(n);
  if (n == 0) {
    v.resize(0, 0);
    return;
  }
  Eigen::MatrixXcd a = h;
  v.resize(n, n);
  lapack_int found = 0;
  std::vector<lapack_int> isuppz(2 * static_cast<size_t>(n));
  check_info(LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'A', 'L', n, a.data(), n, 0.0, 0.0, 0, 0, 2.0 * LAPACKE_dlamch('S'), &found,
                            w.data(), v.data(), n, isuppz.data()),
             "zheevr");
  if (found != n) throw NumericError("eigensolver returned " + std::to_string(found) + " of " + std::to_string(n) + " pairs");
  check_residual(h, w, v, "zheevr");
}

// The k lowest eigenpairs (ascending).
inline void heev_lowest(const Eigen::MatrixXcd& h, int k, Eigen::VectorXd& w, Eigen::MatrixXcd& v) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  if (k >= n) {
    heev_full(h, w, v);
    return;
  }
  lapack_int found = 0;
  std::vector<lapack_int> isuppz(2 * static_cast<size_t>(k));
  Eigen::VectorXd wall(n);
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  Eigen::MatrixXcd a = h;
  Eigen::MatrixXcd z(n, k);
  check_info(LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, k, abstol, &found, wall.data(),
                            z.data(), n, isuppz.data()),
             "zheevr");
  if (found != k) throw NumericError("eigensolver returned " + std::to_string(found) + " of " + std::to_string(k) + " pairs");
  w = wall.head(found);
  v = z.leftCols(found);
  check_residual(h, w, v, "zheevr");
}

} // namespace photoncond::detail

#endif // PHOTONCOND_DETAIL_LAPACK_HPP
