#ifndef TVGP_COVARIANCE_HPP
#define TVGP_COVARIANCE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "tvgp/tensor.hpp"

namespace tvgp {

/// Cholesky factorization could not be completed (matrix not numerically PD).
struct FactorizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A proposed free factor is (numerically) singular.
struct SingularFactorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symmetric positive-definite matrix with its lower Cholesky factor and
/// log-determinant cached at construction.
class SpdFactor {
 public:
  /// Factorizes `matrix`; throws FactorizationError if LLT fails.
  explicit SpdFactor(Eigen::MatrixXd matrix);

  /// Uses a precomputed lower-triangular factor and log-determinant.
  SpdFactor(Eigen::MatrixXd matrix, Eigen::MatrixXd chol, double log_det);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  double log_det() const { return log_det_; }

  static SpdFactor identity(int dim);

 private:
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd chol_;  // lower triangular
  double log_det_;
};

/// Diagonal of a smoothness matrix Q for the squared-exponential kernel.
struct SqeParams {
  Eigen::VectorXd q;

  bool positive() const { return (q.array() > 0.0).all(); }
};

/// Unrestricted 2x2 factor A; the covariance it induces is A A^T.
struct FreeFactor2x2 {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d a;
    a << a11, a12, a21, a22;
    return a;
  }
  double det() const { return a11 * a22 - a12 * a21; }
};

/// Squared-exponential kernel matrix over the given points:
/// entry (i,j) = exp(-(s_i-s_j)^T Q (s_i-s_j)) + jitter*[i==j],
/// with Q = diag(params.q).
SpdFactor sqe_kernel(const std::vector<Eigen::VectorXd>& points,
                     const SqeParams& params, double jitter);

/// Covariance A A^T built from the free 2x2 factor, with
/// log_det = 2*log|det(A)|.  Throws SingularFactorError when |det(A)| is
/// below 1e-12.
SpdFactor sigma3_from_factor(const FreeFactor2x2& f);

/// t x_1 L_1^{-1} x_2 ... x_k L_k^{-1} via triangular solves on the
/// unfoldings; no inverse is formed.
DenseTensor whiten(const DenseTensor& t, const std::vector<SpdFactor>& factors);

/// Inverse of whiten: mode products by the Cholesky factors.
DenseTensor color(const DenseTensor& t, const std::vector<SpdFactor>& factors);

constexpr double kDefaultJitter = 1e-8;

}  // namespace tvgp

#endif  // TVGP_COVARIANCE_HPP
