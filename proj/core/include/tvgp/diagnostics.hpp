#ifndef TVGP_DIAGNOSTICS_HPP
#define TVGP_DIAGNOSTICS_HPP

#include <string>
#include <utility>
#include <vector>

#include "tvgp/tmcmc.hpp"

namespace tvgp {

/// (iteration, log-posterior) pairs ready for CSV / plotting.
std::vector<std::pair<long, double>> trace(
    const std::vector<ChainRecord>& records);

struct MarginalDensity {
  std::string name;
  std::vector<double> grid;     // ascending
  std::vector<double> density;  // nonnegative, integrates to ~1
  double bandwidth;
};

/// Gaussian-kernel density with Silverman bandwidth (floored at
/// 1e-6*(range+eps)) over [min-3h, max+3h]; needs >= 30 samples.
MarginalDensity kde_marginal(const std::vector<double>& samples,
                             int grid_size, const std::string& name = "");

/// One-sample Kolmogorov-Smirnov statistic against the standard normal CDF.
double ks_statistic_normal(std::vector<double> samples);
/// Two-sample KS statistic.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic Kolmogorov distribution tail: p-value for statistic d at
/// effective sample size n_eff.
double ks_p_value(double d, double n_eff);

struct SymmetryReport {
  double tv_distance;       // between the two signed-sample KDEs
  double ks_statistic;      // two-sample KS on |a12| vs |a21|
  double ks_p_value;
  bool asymmetry_detected;
};

/// Compares the chains of the two off-diagonal factor entries.  The flag
/// fires when the KS test on the magnitude streams (subsampled to tame
/// autocorrelation) falls below p_threshold.
SymmetryReport symmetry_report(const std::vector<double>& a12,
                               const std::vector<double>& a21,
                               double p_threshold = 1e-3);

struct StationarityReport {
  double z_score;       // Geweke-style first-vs-last window comparison
  double first_mean;
  double last_mean;
  bool pass;            // |z| < 2
};

/// Splits off the first and last `window_fraction` of the series and
/// compares their means with batch-means standard errors.
StationarityReport stationarity_check(const std::vector<double>& series,
                                      double window_fraction = 0.25);

}  // namespace tvgp

#endif  // TVGP_DIAGNOSTICS_HPP
