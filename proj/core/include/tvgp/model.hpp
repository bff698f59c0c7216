#ifndef TVGP_MODEL_HPP
#define TVGP_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "tvgp/covariance.hpp"
#include "tvgp/tensor.hpp"

namespace tvgp {

/// The 8 learnable covariance parameters, plus the unknown design point
/// s_test in prediction mode.  Flattened order:
/// q11_1, q22_1, q11_2, q22_2, a11_3, a12_3, a21_3, a22_3 [, s_test...].
struct CovParams {
  SqeParams q1;  // smoothness diagonal for the design-point kernel
  SqeParams q2;  // smoothness diagonal for the star-feature kernel
  FreeFactor2x2 a3;
  std::optional<Eigen::VectorXd> s_test;

  Eigen::VectorXd flatten() const;
  static CovParams unflatten(const Eigen::VectorXd& v, int s_test_dim = 0);
  static std::vector<std::string> names(int s_test_dim = 0);
};

struct TrainingSet {
  std::vector<Eigen::VectorXd> design;     // n design points in R^d
  DenseTensor data;                        // shape (n, m2, ..., mk)
  std::vector<Eigen::VectorXd> star_features;  // m2 vectors in R^2

  int n() const { return static_cast<int>(design.size()); }
  int d() const { return design.empty() ? 0 : static_cast<int>(design[0].size()); }
};

/// Per-star mean velocity across design points; the fixed inputs of the
/// mode-2 kernel.
std::vector<Eigen::VectorXd> derive_star_features(const DenseTensor& data);

struct PriorBounds {
  double q_max = 1e6;
  Eigen::VectorXd s_test_lo;  // empty unless prediction mode
  Eigen::VectorXd s_test_hi;
};

/// Everything a posterior evaluation needs, fixed before sampling.  In
/// prediction mode the test slice is stacked onto mode 1 of the data and
/// the mean slice broadcast accordingly.
struct PosteriorSpec {
  TrainingSet training;
  std::optional<DenseTensor> test_slice;
  DenseTensor mean;       // same shape as eval_data
  DenseTensor eval_data;  // training data, or training + test stacked
  double jitter = kDefaultJitter;
  PriorBounds bounds;

  bool prediction_mode() const { return test_slice.has_value(); }
};

PosteriorSpec make_training_spec(TrainingSet training,
                                 double jitter = kDefaultJitter,
                                 PriorBounds bounds = {});

/// Prediction mode: the s_test prior box defaults to the bounding box of
/// the training design points when `bounds` leaves it empty.
PosteriorSpec make_prediction_spec(TrainingSet training, DenseTensor test_slice,
                                   double jitter = kDefaultJitter,
                                   PriorBounds bounds = {});

/// Tensor-normal log-density of v:
///   -(m/2) log 2pi - sum_p (m/(2 m_p)) log|Sigma_p| - ||whiten(v-mean)||^2/2.
double log_likelihood(const DenseTensor& v, const DenseTensor& mean,
                      const std::vector<SpdFactor>& factors);

/// Mode-1 average of the data slices, broadcast back over mode 1.
DenseTensor mle_mean(const TrainingSet& training);

/// Truncated-uniform priors on the q's, |Sigma_3|^{-1/2} on the free
/// factor block, uniform box on s_test; -inf outside support.
double log_prior(const CovParams& p, const PriorBounds& bounds);

/// Full log-posterior; -inf whenever the prior or a factorization fails.
/// Prior support is checked before any kernel is built.
double log_posterior(const PosteriorSpec& spec, const CovParams& p);

/// Data-driven chain starting point: inverse mean squared coordinate
/// distances for the q's, residual-variance-scaled identity for the
/// factor, box center for s_test.
CovParams default_init(const PosteriorSpec& spec);

/// Chain starting points for prediction mode: the first is default_init;
/// the rest restart its s_test at the next-best well-separated basins of a
/// coarse conditional-posterior grid.  The s_test landscape can be sharply
/// multimodal, and chains rarely cross between basins, so running one
/// chain per candidate basin and comparing posterior levels afterwards is
/// far more reliable than a single chain.  Returns min(k, #basins) inits.
std::vector<CovParams> prediction_inits(const PosteriorSpec& spec, int k);

}  // namespace tvgp

#endif  // TVGP_MODEL_HPP
