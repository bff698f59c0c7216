#ifndef TVGP_TEST_UTIL_HPP
#define TVGP_TEST_UTIL_HPP

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <numbers>
#include <random>
#include <vector>

#include "tvgp/covariance.hpp"
#include "tvgp/tensor.hpp"

namespace tvgp_test {

// Random well-conditioned SPD matrix.
inline Eigen::MatrixXd random_spd(int dim, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = nd(gen);
  return a * a.transpose() + 0.5 * dim * Eigen::MatrixXd::Identity(dim, dim);
}

inline tvgp::DenseTensor random_tensor(const std::vector<int>& shape,
                                       std::mt19937_64& gen) {
  tvgp::DenseTensor t(shape);
  std::normal_distribution<double> nd;
  for (long i = 0; i < t.size(); ++i) t[i] = nd(gen);
  return t;
}

// Kronecker product of the per-mode covariances in the documented vec
// order: mode 1 slowest, so K = Sigma_1 (x) Sigma_2 (x) ... (x) Sigma_k.
inline Eigen::MatrixXd kron_covariance(
    const std::vector<Eigen::MatrixXd>& sigmas) {
  Eigen::MatrixXd k = sigmas[0];
  for (size_t p = 1; p < sigmas.size(); ++p)
    k = Eigen::kroneckerProduct(k, sigmas[p]).eval();
  return k;
}

// Dense multivariate-normal log-density: the independent oracle for the
// tensor-normal implementation.
inline double dense_mvn_logpdf(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& mu,
                               const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::VectorXd z = l.triangularView<Eigen::Lower>().solve(x - mu);
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  return -0.5 * x.size() * std::log(2.0 * std::numbers::pi) - 0.5 * log_det -
         0.5 * z.squaredNorm();
}

// The matrix I (x) ... (x) M (x) ... (x) I (M in 1-based slot `mode`) that
// realizes a mode product on vec(t) under the documented convention.
inline Eigen::MatrixXd mode_product_as_kron(const Eigen::MatrixXd& m,
                                            const std::vector<int>& shape,
                                            int mode) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(1, 1);
  for (size_t p = 0; p < shape.size(); ++p) {
    const Eigen::MatrixXd next =
        (static_cast<int>(p) == mode - 1)
            ? m
            : Eigen::MatrixXd::Identity(shape[p], shape[p]);
    k = Eigen::kroneckerProduct(k, next).eval();
  }
  return k;
}

inline Eigen::MatrixXd random_orthogonal(int dim, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = nd(gen);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

}  // namespace tvgp_test

#endif  // TVGP_TEST_UTIL_HPP
