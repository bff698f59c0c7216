#include "tvgp/covariance.hpp"

#include <cmath>

namespace tvgp {

SpdFactor::SpdFactor(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  Eigen::LLT<Eigen::MatrixXd> llt(matrix_);
  if (llt.info() != Eigen::Success)
    throw FactorizationError(
        "Cholesky factorization failed; matrix is not positive definite "
        "(consider adding jitter)");
  chol_ = llt.matrixL();
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

SpdFactor::SpdFactor(Eigen::MatrixXd matrix, Eigen::MatrixXd chol,
                     double log_det)
    : matrix_(std::move(matrix)), chol_(std::move(chol)), log_det_(log_det) {}

SpdFactor SpdFactor::identity(int dim) {
  return SpdFactor(Eigen::MatrixXd::Identity(dim, dim),
                   Eigen::MatrixXd::Identity(dim, dim), 0.0);
}

SpdFactor sqe_kernel(const std::vector<Eigen::VectorXd>& points,
                     const SqeParams& params, double jitter) {
  const int n = static_cast<int>(points.size());
  if (n < 1) throw std::invalid_argument("sqe_kernel: need at least one point");
  const auto d = params.q.size();
  for (const auto& p : points)
    if (p.size() != d)
      throw std::invalid_argument(
          "sqe_kernel: point dimension does not match q length");

  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = 1.0 + jitter;
    for (int j = 0; j < i; ++j) {
      const Eigen::VectorXd diff = points[i] - points[j];
      const double dist = (params.q.array() * diff.array().square()).sum();
      k(i, j) = k(j, i) = std::exp(-dist);
    }
  }
  return SpdFactor(std::move(k));
}

SpdFactor sigma3_from_factor(const FreeFactor2x2& f) {
  const double det = f.det();
  if (std::abs(det) < 1e-12)
    throw SingularFactorError("free factor is singular (|det| < 1e-12)");
  const Eigen::Matrix2d a = f.matrix();
  Eigen::MatrixXd sigma = a * a.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw SingularFactorError("A A^T is numerically indefinite");
  return SpdFactor(std::move(sigma), llt.matrixL(),
                   2.0 * std::log(std::abs(det)));
}

DenseTensor whiten(const DenseTensor& t,
                   const std::vector<SpdFactor>& factors) {
  if (static_cast<int>(factors.size()) != t.order())
    throw std::invalid_argument("whiten: need one factor per mode");
  DenseTensor out = t;
  for (int p = 0; p < t.order(); ++p) {
    if (factors[p].dim() != t.shape()[p])
      throw std::invalid_argument("whiten: factor dimension mismatch on mode " +
                                  std::to_string(p + 1));
    Eigen::MatrixXd u = unfold(out, p + 1);
    factors[p].chol().triangularView<Eigen::Lower>().solveInPlace(u);
    out = fold(u, out.shape(), p + 1);
  }
  return out;
}

DenseTensor color(const DenseTensor& t,
                  const std::vector<SpdFactor>& factors) {
  if (static_cast<int>(factors.size()) != t.order())
    throw std::invalid_argument("color: need one factor per mode");
  DenseTensor out = t;
  for (int p = 0; p < t.order(); ++p)
    out = mode_n_product(out, factors[p].chol(), p + 1);
  return out;
}

}  // namespace tvgp
