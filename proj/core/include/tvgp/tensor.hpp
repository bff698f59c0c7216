#ifndef TVGP_TENSOR_HPP
#define TVGP_TENSOR_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace tvgp {

/// Dense k-mode real tensor, row-major storage (last index fastest).
///
/// Vectorization convention used throughout: vec(t) is the raw storage
/// order, so index i1 varies slowest.  Under this convention the
/// covariance of vec of a tensor-normal draw is Sigma_1 (x) Sigma_2 (x)
/// ... (x) Sigma_k, and a mode-n product by M acts on vec as
/// I (x) ... (x) M (x) ... (x) I with M in slot n.
class DenseTensor {
 public:
  DenseTensor() : shape_{1}, values_{0.0} {}
  explicit DenseTensor(std::vector<int> shape);
  DenseTensor(std::vector<int> shape, std::vector<double> values);

  int order() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  long size() const { return static_cast<long>(values_.size()); }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double operator[](long i) const { return values_[i]; }
  double& operator[](long i) { return values_[i]; }

  /// Linear offset of a multi-index (row-major, last index fastest).
  long offset(const std::vector<int>& idx) const;
  double at(const std::vector<int>& idx) const { return values_[offset(idx)]; }

  DenseTensor operator-(const DenseTensor& other) const;

 private:
  std::vector<int> shape_;
  std::vector<double> values_;
};

/// Mode-n unfolding: m_n x (m/m_n) matrix.  Row r holds all entries with
/// i_n == r; columns enumerate the remaining indices in row-major order
/// (original mode order with mode n removed, last fastest).
/// `mode` is 1-based to match the x_n notation.
Eigen::MatrixXd unfold(const DenseTensor& t, int mode);

/// Inverse of unfold for a tensor of the given shape.
DenseTensor fold(const Eigen::MatrixXd& m, const std::vector<int>& shape,
                 int mode);

/// Tucker mode-n product t x_n mat; mat is r x m_n, result replaces mode n
/// size by r.  Realized as unfold -> multiply -> fold.
DenseTensor mode_n_product(const DenseTensor& t, const Eigen::MatrixXd& mat,
                           int mode);

double frobenius_norm_sq(const DenseTensor& t);

/// vec under the documented convention: the raw row-major storage.
Eigen::VectorXd vec(const DenseTensor& t);

}  // namespace tvgp

#endif  // TVGP_TENSOR_HPP
