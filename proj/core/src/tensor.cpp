#include "tvgp/tensor.hpp"

#include <numeric>

namespace tvgp {

namespace {

long checked_size(const std::vector<int>& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor order must be >= 1");
  long m = 1;
  for (int s : shape) {
    if (s < 1) throw std::invalid_argument("tensor mode sizes must be >= 1");
    m *= s;
  }
  return m;
}

void check_mode(const DenseTensor& t, int mode) {
  if (mode < 1 || mode > t.order())
    throw std::invalid_argument("mode index " + std::to_string(mode) +
                                " out of range for order-" +
                                std::to_string(t.order()) + " tensor");
}

}  // namespace

DenseTensor::DenseTensor(std::vector<int> shape)
    : shape_(std::move(shape)), values_(checked_size(shape_), 0.0) {}

DenseTensor::DenseTensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (static_cast<long>(values_.size()) != checked_size(shape_))
    throw std::invalid_argument("tensor value count does not match shape");
}

long DenseTensor::offset(const std::vector<int>& idx) const {
  long off = 0;
  for (int p = 0; p < order(); ++p) off = off * shape_[p] + idx[p];
  return off;
}

DenseTensor DenseTensor::operator-(const DenseTensor& other) const {
  if (shape_ != other.shape_)
    throw std::invalid_argument("tensor shape mismatch in subtraction");
  DenseTensor out(shape_);
  for (long i = 0; i < size(); ++i) out[i] = values_[i] - other.values_[i];
  return out;
}

Eigen::MatrixXd unfold(const DenseTensor& t, int mode) {
  check_mode(t, mode);
  const auto& shape = t.shape();
  const int n = mode - 1;
  const int mn = shape[n];
  // inner: product of mode sizes after n (faster-running), outer: before n.
  long inner = 1, outer = 1;
  for (int p = n + 1; p < t.order(); ++p) inner *= shape[p];
  for (int p = 0; p < n; ++p) outer *= shape[p];

  Eigen::MatrixXd out(mn, outer * inner);
  for (long o = 0; o < outer; ++o)
    for (int r = 0; r < mn; ++r)
      for (long i = 0; i < inner; ++i)
        out(r, o * inner + i) = t[(o * mn + r) * inner + i];
  return out;
}

DenseTensor fold(const Eigen::MatrixXd& m, const std::vector<int>& shape,
                 int mode) {
  DenseTensor t(shape);
  check_mode(t, mode);
  const int n = mode - 1;
  const int mn = shape[n];
  if (m.rows() != mn)
    throw std::invalid_argument("fold: matrix rows do not match mode " +
                                std::to_string(mode) + " size");
  long inner = 1, outer = 1;
  for (int p = n + 1; p < t.order(); ++p) inner *= shape[p];
  for (int p = 0; p < n; ++p) outer *= shape[p];
  if (m.cols() != outer * inner)
    throw std::invalid_argument("fold: matrix columns do not match shape");

  for (long o = 0; o < outer; ++o)
    for (int r = 0; r < mn; ++r)
      for (long i = 0; i < inner; ++i)
        t[(o * mn + r) * inner + i] = m(r, o * inner + i);
  return t;
}

DenseTensor mode_n_product(const DenseTensor& t, const Eigen::MatrixXd& mat,
                           int mode) {
  check_mode(t, mode);
  if (mat.cols() != t.shape()[mode - 1])
    throw std::invalid_argument(
        "mode_n_product: matrix columns (" + std::to_string(mat.cols()) +
        ") do not match size of mode " + std::to_string(mode) + " (" +
        std::to_string(t.shape()[mode - 1]) + ")");
  std::vector<int> out_shape = t.shape();
  out_shape[mode - 1] = static_cast<int>(mat.rows());
  return fold(mat * unfold(t, mode), out_shape, mode);
}

double frobenius_norm_sq(const DenseTensor& t) {
  double s = 0.0;
  for (long i = 0; i < t.size(); ++i) s += t[i] * t[i];
  return s;
}

Eigen::VectorXd vec(const DenseTensor& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.values().data(), t.size());
}

}  // namespace tvgp
