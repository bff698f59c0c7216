#include "tvgp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tvgp {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / std::max<size_t>(v.size() - 1, 1));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double silverman_bandwidth(std::vector<double> samples) {
  const size_t n = samples.size();
  std::sort(samples.begin(), samples.end());
  const double range = samples.back() - samples.front();
  const double iqr =
      samples[static_cast<size_t>(0.75 * (n - 1))] -
      samples[static_cast<size_t>(0.25 * (n - 1))];
  const double sd = sd_of(samples);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  // the +1 keeps the floor resolvable in double precision when all
  // samples coincide (range 0)
  const double floor = 1e-6 * (range + 1.0);
  return std::max(h, floor);
}

std::vector<double> kde_on_grid(const std::vector<double>& samples, double h,
                                const std::vector<double>& grid) {
  std::vector<double> density(grid.size(), 0.0);
  const double norm =
      1.0 / (samples.size() * h * std::sqrt(2.0 * std::numbers::pi));
  for (size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double x : samples) {
      const double z = (grid[g] - x) / h;
      acc += std::exp(-0.5 * z * z);
    }
    density[g] = acc * norm;
  }
  return density;
}

std::vector<double> subsample(const std::vector<double>& v, size_t target) {
  const size_t stride = std::max<size_t>(1, v.size() / target);
  std::vector<double> out;
  out.reserve(v.size() / stride + 1);
  for (size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
  return out;
}

}  // namespace

std::vector<std::pair<long, double>> trace(
    const std::vector<ChainRecord>& records) {
  if (records.empty()) throw std::invalid_argument("trace: empty chain");
  std::vector<std::pair<long, double>> out;
  out.reserve(records.size());
  for (const auto& r : records) out.emplace_back(r.iteration, r.log_post);
  return out;
}

MarginalDensity kde_marginal(const std::vector<double>& samples, int grid_size,
                             const std::string& name) {
  if (samples.size() < 30)
    throw std::invalid_argument(
        "kde_marginal: need at least 30 samples, got " +
        std::to_string(samples.size()));
  if (grid_size < 2)
    throw std::invalid_argument("kde_marginal: grid_size must be >= 2");

  const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
  const double h = silverman_bandwidth(samples);
  const double lo = *mn_it - 3.0 * h, hi = *mx_it + 3.0 * h;

  MarginalDensity out;
  out.name = name;
  out.bandwidth = h;
  out.grid.resize(grid_size);
  for (int g = 0; g < grid_size; ++g)
    out.grid[g] = lo + (hi - lo) * g / (grid_size - 1);
  out.density = kde_on_grid(samples, h, out.grid);
  return out;
}

double ks_statistic_normal(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = normal_cdf(samples[i]);
    d = std::max(d, std::abs(f - (i + 1) / n));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    // advance past ties in both samples before comparing the ECDFs, so
    // identical samples yield exactly zero
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_p_value(double d, double n_eff) {
  const double sn = std::sqrt(n_eff);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  // the alternating series does not converge for tiny lambda; the limit is 1
  if (lambda < 0.2) return 1.0;
  double p = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    p += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

SymmetryReport symmetry_report(const std::vector<double>& a12,
                               const std::vector<double>& a21,
                               double p_threshold) {
  if (a12.size() < 30 || a21.size() < 30)
    throw std::invalid_argument("symmetry_report: need at least 30 samples");

  // TV distance between the signed-sample KDEs on a shared grid
  const double lo = std::min(*std::min_element(a12.begin(), a12.end()),
                             *std::min_element(a21.begin(), a21.end()));
  const double hi = std::max(*std::max_element(a12.begin(), a12.end()),
                             *std::max_element(a21.begin(), a21.end()));
  const double h1 = silverman_bandwidth(a12);
  const double h2 = silverman_bandwidth(a21);
  const double pad = 3.0 * std::max(h1, h2);
  const int gs = 256;
  std::vector<double> grid(gs);
  for (int g = 0; g < gs; ++g)
    grid[g] = (lo - pad) + (hi - lo + 2 * pad) * g / (gs - 1);
  const auto f1 = kde_on_grid(a12, h1, grid);
  const auto f2 = kde_on_grid(a21, h2, grid);
  double tv = 0.0;
  for (int g = 1; g < gs; ++g)
    tv += 0.5 * (std::abs(f1[g] - f2[g]) + std::abs(f1[g - 1] - f2[g - 1])) *
          0.5 * (grid[g] - grid[g - 1]);

  // The factor orbit A -> A R (R orthogonal) leaves the model invariant and
  // flips off-diagonal signs, so the comparison uses magnitudes; streams are
  // subsampled because KS assumes independent draws.
  std::vector<double> m1 = subsample(a12, 200);
  std::vector<double> m2 = subsample(a21, 200);
  for (double& x : m1) x = std::abs(x);
  for (double& x : m2) x = std::abs(x);
  const double d = ks_statistic_two_sample(m1, m2);
  const double n_eff = static_cast<double>(m1.size()) * m2.size() /
                       static_cast<double>(m1.size() + m2.size());
  const double p = ks_p_value(d, n_eff);

  return SymmetryReport{tv, d, p, p < p_threshold};
}

StationarityReport stationarity_check(const std::vector<double>& series,
                                      double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 0.5))
    throw std::invalid_argument(
        "stationarity_check: window_fraction must be in (0, 0.5]");
  const size_t n = series.size();
  const size_t w = static_cast<size_t>(window_fraction * n);
  if (w < 8)
    throw std::invalid_argument(
        "stationarity_check: insufficient data for two windows");

  auto window_stats = [](const std::vector<double>& v) {
    // batch means standard error, robust to autocorrelation
    const size_t nb = std::max<size_t>(4, std::min<size_t>(20, v.size() / 4));
    const size_t bs = v.size() / nb;
    std::vector<double> bm(nb);
    for (size_t b = 0; b < nb; ++b) {
      double s = 0.0;
      for (size_t i = b * bs; i < (b + 1) * bs; ++i) s += v[i];
      bm[b] = s / bs;
    }
    const double mu = mean_of(bm);
    const double se = sd_of(bm) / std::sqrt(static_cast<double>(nb));
    return std::pair<double, double>(mu, se);
  };

  const std::vector<double> first(series.begin(), series.begin() + w);
  const std::vector<double> last(series.end() - w, series.end());
  const auto [mu_a, se_a] = window_stats(first);
  const auto [mu_b, se_b] = window_stats(last);
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  const double z = (mu_a - mu_b) / std::max(se, 1e-300);
  return StationarityReport{z, mu_a, mu_b, std::abs(z) < 2.0};
}

}  // namespace tvgp
