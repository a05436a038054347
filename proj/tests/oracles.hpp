#ifndef SBP_TESTS_ORACLES_HPP
#define SBP_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "sbp/linalg.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const sbp::DenseMatrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  return e;
}

inline Eigen::MatrixXd to_eigen(const sbp::SparseMatrix& a) { return to_eigen(a.to_dense()); }

inline Eigen::VectorXd diag_vec(const sbp::Vec& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

// Stencil weights c on offsets s with sum c_k s_k^m = (m == order ? order! : 0), m < s.size().
inline Eigen::VectorXd taylor_stencil(const std::vector<double>& offsets, int order) {
  const int n = static_cast<int>(offsets.size());
  Eigen::MatrixXd V(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) V(m, k) = std::pow(offsets[k], m);
  b(order) = std::tgamma(order + 1.0);
  return V.fullPivLu().solve(b);
}

inline sbp::Vec random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  sbp::Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

inline double smallest_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace oracle

#endif
