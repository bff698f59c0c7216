#include "tvgp/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace tvgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

DenseTensor broadcast_mode1(const std::vector<double>& slice, int n,
                            const std::vector<int>& slice_shape) {
  std::vector<int> shape;
  shape.push_back(n);
  shape.insert(shape.end(), slice_shape.begin(), slice_shape.end());
  DenseTensor out(shape);
  const long sz = static_cast<long>(slice.size());
  for (int j = 0; j < n; ++j)
    for (long i = 0; i < sz; ++i) out[j * sz + i] = slice[i];
  return out;
}

std::vector<double> mean_slice(const DenseTensor& data) {
  const int n = data.shape()[0];
  const long sz = data.size() / n;
  std::vector<double> slice(sz, 0.0);
  for (int j = 0; j < n; ++j)
    for (long i = 0; i < sz; ++i) slice[i] += data[j * sz + i];
  for (double& v : slice) v /= n;
  return slice;
}

}  // namespace

Eigen::VectorXd CovParams::flatten() const {
  const int d = s_test ? static_cast<int>(s_test->size()) : 0;
  Eigen::VectorXd v(8 + d);
  v.head(8) << q1.q(0), q1.q(1), q2.q(0), q2.q(1), a3.a11, a3.a12, a3.a21,
      a3.a22;
  if (s_test) v.tail(d) = *s_test;
  return v;
}

CovParams CovParams::unflatten(const Eigen::VectorXd& v, int s_test_dim) {
  if (v.size() != 8 + s_test_dim)
    throw std::invalid_argument("CovParams: expected vector of length " +
                                std::to_string(8 + s_test_dim));
  CovParams p;
  p.q1.q = v.segment(0, 2);
  p.q2.q = v.segment(2, 2);
  p.a3 = {v(4), v(5), v(6), v(7)};
  if (s_test_dim > 0) p.s_test = v.tail(s_test_dim);
  return p;
}

std::vector<std::string> CovParams::names(int s_test_dim) {
  std::vector<std::string> out = {"q11_1", "q22_1", "q11_2", "q22_2",
                                  "a11_3", "a12_3", "a21_3", "a22_3"};
  for (int i = 0; i < s_test_dim; ++i)
    out.push_back("s_test_" + std::to_string(i + 1));
  return out;
}

std::vector<Eigen::VectorXd> derive_star_features(const DenseTensor& data) {
  if (data.order() != 3)
    throw std::invalid_argument("star features require a 3-mode data tensor");
  const int n = data.shape()[0];
  const int m2 = data.shape()[1];
  const int m3 = data.shape()[2];
  std::vector<Eigen::VectorXd> feats(m2, Eigen::VectorXd::Zero(m3));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m2; ++i)
      for (int c = 0; c < m3; ++c)
        feats[i](c) += data[(static_cast<long>(j) * m2 + i) * m3 + c];
  for (auto& f : feats) f /= n;
  return feats;
}

PosteriorSpec make_training_spec(TrainingSet training, double jitter,
                                 PriorBounds bounds) {
  if (training.n() != training.data.shape()[0])
    throw std::invalid_argument(
        "design point count does not match data mode-1 size");
  DenseTensor mean = mle_mean(training);
  DenseTensor data = training.data;
  return PosteriorSpec{std::move(training), std::nullopt, std::move(mean),
                       std::move(data), jitter, std::move(bounds)};
}

PosteriorSpec make_prediction_spec(TrainingSet training, DenseTensor test_slice,
                                   double jitter, PriorBounds bounds) {
  const auto& dshape = training.data.shape();
  std::vector<int> slice_shape(dshape.begin() + 1, dshape.end());
  if (test_slice.shape() != slice_shape)
    throw std::invalid_argument(
        "test slice shape does not match a mode-1 slice of the training data");

  const int n = training.n();
  std::vector<int> stacked_shape = dshape;
  stacked_shape[0] = n + 1;
  DenseTensor stacked(stacked_shape);
  const long sz = test_slice.size();
  for (long i = 0; i < training.data.size(); ++i) stacked[i] = training.data[i];
  for (long i = 0; i < sz; ++i) stacked[n * sz + i] = test_slice[i];

  DenseTensor mean =
      broadcast_mode1(mean_slice(training.data), n + 1, slice_shape);

  if (bounds.s_test_lo.size() == 0) {
    const int d = training.d();
    bounds.s_test_lo = Eigen::VectorXd::Constant(d, 1e300);
    bounds.s_test_hi = Eigen::VectorXd::Constant(d, -1e300);
    for (const auto& s : training.design) {
      bounds.s_test_lo = bounds.s_test_lo.cwiseMin(s);
      bounds.s_test_hi = bounds.s_test_hi.cwiseMax(s);
    }
  }
  return PosteriorSpec{std::move(training), std::move(test_slice),
                       std::move(mean),     std::move(stacked),
                       jitter,              std::move(bounds)};
}

double log_likelihood(const DenseTensor& v, const DenseTensor& mean,
                      const std::vector<SpdFactor>& factors) {
  if (v.shape() != mean.shape())
    throw std::invalid_argument("log_likelihood: mean shape mismatch");
  for (long i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]) || !std::isfinite(mean[i]))
      throw std::invalid_argument("log_likelihood: non-finite input value");

  const double m = static_cast<double>(v.size());
  double out = -0.5 * m * std::log(2.0 * std::numbers::pi);
  for (int p = 0; p < v.order(); ++p)
    out -= m / (2.0 * v.shape()[p]) * factors[p].log_det();
  out -= 0.5 * frobenius_norm_sq(whiten(v - mean, factors));
  return out;
}

DenseTensor mle_mean(const TrainingSet& training) {
  const auto& dshape = training.data.shape();
  std::vector<int> slice_shape(dshape.begin() + 1, dshape.end());
  return broadcast_mode1(mean_slice(training.data), dshape[0], slice_shape);
}

double log_prior(const CovParams& p, const PriorBounds& bounds) {
  for (const auto* sq : {&p.q1, &p.q2})
    for (int i = 0; i < sq->q.size(); ++i)
      if (!(sq->q(i) > 0.0 && sq->q(i) <= bounds.q_max)) return kNegInf;
  const double det = p.a3.det();
  if (std::abs(det) < 1e-12) return kNegInf;
  double out = -std::log(std::abs(det));  // -log|Sigma_3|/2
  if (p.s_test) {
    if (bounds.s_test_lo.size() != p.s_test->size())
      throw std::invalid_argument("log_prior: s_test box dimension mismatch");
    for (int i = 0; i < p.s_test->size(); ++i)
      if ((*p.s_test)(i) < bounds.s_test_lo(i) ||
          (*p.s_test)(i) > bounds.s_test_hi(i))
        return kNegInf;
  }
  return out;
}

namespace {

// Rows form an orthonormal basis of the complement of the ones direction.
Eigen::MatrixXd helmert_contrast(int n) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n - 1, n);
  for (int k = 1; k < n; ++k) {
    const double norm = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
    for (int j = 0; j < k; ++j) h(k - 1, j) = norm;
    h(k - 1, k) = -static_cast<double>(k) * norm;
  }
  return h;
}

}  // namespace

double log_posterior(const PosteriorSpec& spec, const CovParams& p) {
  if (spec.prediction_mode() != p.s_test.has_value())
    throw std::invalid_argument(
        spec.prediction_mode()
            ? "prediction-mode spec requires params with s_test"
            : "training-only spec cannot take params with s_test");

  const double lp = log_prior(p, spec.bounds);
  if (!std::isfinite(lp)) return kNegInf;

  try {
    std::vector<Eigen::VectorXd> design = spec.training.design;
    if (p.s_test) design.push_back(*p.s_test);
    std::vector<SpdFactor> factors;
    factors.reserve(3);
    const SpdFactor sigma1 = sqe_kernel(design, p.q1, spec.jitter);
    const int n_rows = spec.eval_data.shape()[0];
    if (n_rows < 2) {
      // single mode-1 slice: nothing to restrict, residual is zero
      factors.push_back(sigma1);
      factors.push_back(
          sqe_kernel(spec.training.star_features, p.q2, spec.jitter));
      factors.push_back(sigma3_from_factor(p.a3));
      return lp + log_likelihood(spec.eval_data, spec.mean, factors);
    }
    // Restricted (residual) likelihood: the mean is the plug-in mode-1
    // average, so the centered data carries no information in the mode-1
    // ones direction.  Evaluating the full likelihood there biases the
    // q^(1) posterior; instead project mode 1 onto the complement of the
    // ones direction and restrict Sigma_1 accordingly.  The contrast
    // annihilates the broadcast mean, so it drops out exactly.
    const Eigen::MatrixXd h = helmert_contrast(n_rows);
    factors.emplace_back(h * sigma1.matrix() * h.transpose());
    factors.push_back(
        sqe_kernel(spec.training.star_features, p.q2, spec.jitter));
    factors.push_back(sigma3_from_factor(p.a3));
    const DenseTensor projected = mode_n_product(spec.eval_data, h, 1);
    const DenseTensor zero(projected.shape());
    return lp + log_likelihood(projected, zero, factors);
  } catch (const FactorizationError&) {
    return kNegInf;
  } catch (const SingularFactorError&) {
    return kNegInf;
  }
}

CovParams default_init(const PosteriorSpec& spec) {
  CovParams init;
  auto inv_msd = [](const std::vector<Eigen::VectorXd>& pts) {
    const int d = static_cast<int>(pts[0].size());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    long count = 0;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = 0; j < i; ++j) {
        acc += (pts[i] - pts[j]).array().square().matrix();
        ++count;
      }
    Eigen::VectorXd q(d);
    for (int l = 0; l < d; ++l) {
      const double msd = count > 0 ? acc(l) / count : 1.0;
      q(l) = msd > 1e-12 ? 1.0 / msd : 1.0;
    }
    return q;
  };
  init.q1.q = inv_msd(spec.training.design);
  init.q2.q = inv_msd(spec.training.star_features);
  DenseTensor resid = spec.training.data - mle_mean(spec.training);
  const double var =
      frobenius_norm_sq(resid) / static_cast<double>(resid.size());
  const double scale = std::sqrt(std::max(var, 1e-8));
  init.a3 = {scale, 0.0, 0.0, scale};
  if (spec.prediction_mode())
    init.s_test = 0.5 * (spec.bounds.s_test_lo + spec.bounds.s_test_hi);

  // coarse scale search over q: the inverse-mean-squared-distance guess can
  // be an order of magnitude off, which costs thousands of burn-in
  // iterations; a handful of posterior evaluations fixes the decade
  const Eigen::VectorXd base1 = init.q1.q, base2 = init.q2.q;
  double best = log_posterior(spec, init);
  CovParams best_params = init;
  for (double f1 : {0.25, 1.0, 4.0, 16.0, 64.0})
    for (double f2 : {0.25, 1.0, 4.0, 16.0, 64.0}) {
      CovParams cand = init;
      cand.q1.q = f1 * base1;
      cand.q2.q = f2 * base2;
      const double lp = log_posterior(spec, cand);
      if (lp > best) {
        best = lp;
        best_params = cand;
      }
    }

  // in prediction mode, also locate the dominant s_test basin: the
  // conditional posterior in s can be sharply multimodal, and a chain
  // started in the wrong basin rarely escapes it
  if (spec.prediction_mode()) {
    const int d = spec.training.d();
    const int grid = 9;
    Eigen::VectorXd idx = Eigen::VectorXd::Zero(d);
    std::vector<int> at(d, 0);
    bool done = false;
    while (!done) {
      CovParams cand = best_params;
      Eigen::VectorXd s(d);
      for (int l = 0; l < d; ++l)
        s(l) = spec.bounds.s_test_lo(l) +
               (spec.bounds.s_test_hi(l) - spec.bounds.s_test_lo(l)) *
                   (at[l] + 0.5) / grid;
      cand.s_test = s;
      const double lp = log_posterior(spec, cand);
      if (lp > best) {
        best = lp;
        best_params = cand;
      }
      int l = 0;
      for (; l < d; ++l) {
        if (++at[l] < grid) break;
        at[l] = 0;
      }
      done = (l == d);
    }
  }
  return best_params;
}

std::vector<CovParams> prediction_inits(const PosteriorSpec& spec, int k) {
  if (!spec.prediction_mode())
    throw std::invalid_argument("prediction_inits: spec is training-only");
  CovParams base = default_init(spec);
  const int d = spec.training.d();
  const int grid = 9;

  std::vector<std::pair<double, Eigen::VectorXd>> cells;
  std::vector<int> at(d, 0);
  bool done = false;
  while (!done) {
    CovParams cand = base;
    Eigen::VectorXd s(d);
    for (int l = 0; l < d; ++l)
      s(l) = spec.bounds.s_test_lo(l) +
             (spec.bounds.s_test_hi(l) - spec.bounds.s_test_lo(l)) *
                 (at[l] + 0.5) / grid;
    cand.s_test = s;
    cells.emplace_back(log_posterior(spec, cand), s);
    int l = 0;
    for (; l < d; ++l) {
      if (++at[l] < grid) break;
      at[l] = 0;
    }
    done = (l == d);
  }
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double min_sep =
      0.15 * (spec.bounds.s_test_hi - spec.bounds.s_test_lo).norm();
  std::vector<CovParams> inits{base};
  std::vector<Eigen::VectorXd> chosen{*base.s_test};
  for (const auto& [lp, s] : cells) {
    if (static_cast<int>(inits.size()) >= k) break;
    if (!std::isfinite(lp)) continue;
    bool separated = true;
    for (const auto& c : chosen)
      if ((c - s).norm() < min_sep) separated = false;
    if (!separated) continue;
    CovParams cand = base;
    cand.s_test = s;
    inits.push_back(cand);
    chosen.push_back(s);
  }
  return inits;
}

}  // namespace tvgp
