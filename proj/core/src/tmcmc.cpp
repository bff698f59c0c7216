#include "tvgp/tmcmc.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tvgp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t chain_seed(std::uint64_t master_seed, int chain_index) {
  return splitmix64(master_seed ^
                    splitmix64(static_cast<std::uint64_t>(chain_index) + 1));
}

Rng Rng::for_chain(std::uint64_t master_seed, int chain_index) {
  return Rng(chain_seed(master_seed, chain_index));
}

double Rng::uniform() {
  // 53-bit mantissa; value in [0,1)
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::exponential() { return -std::log1p(-uniform()); }

double Rng::normal() {
  // Box-Muller, one value per call (second draw discarded for simplicity)
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

void TmcmcConfig::validate(int n_params) const {
  if (betas.size() != n_params || forward_probs.size() != n_params)
    throw std::invalid_argument(
        "TmcmcConfig: betas and forward_probs must match parameter count");
  for (int i = 0; i < n_params; ++i) {
    if (betas(i) < 0.0)
      throw std::invalid_argument("TmcmcConfig: betas must be nonnegative");
    if (!(forward_probs(i) > 0.0 && forward_probs(i) < 1.0))
      throw std::invalid_argument(
          "TmcmcConfig: forward probabilities must lie strictly in (0,1)");
  }
  if (iterations < 1)
    throw std::invalid_argument("TmcmcConfig: iterations must be positive");
  if (burn_in < 0 || burn_in > iterations)
    throw std::invalid_argument("TmcmcConfig: burn_in out of range");
  if (thinning < 1)
    throw std::invalid_argument("TmcmcConfig: thinning must be positive");
}

std::pair<Eigen::VectorXd, std::vector<int>> propose(
    const Eigen::VectorXd& state, const TmcmcConfig& cfg, Rng& rng) {
  const int n = static_cast<int>(state.size());
  Eigen::VectorXd proposal(n);
  std::vector<int> signs(n);
  double shared_e = cfg.shared_innovation ? rng.exponential() : 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = cfg.shared_innovation ? shared_e : rng.exponential();
    const double u = rng.uniform();
    signs[i] = (u < cfg.forward_probs(i)) ? 1 : -1;
    proposal(i) = state(i) + signs[i] * cfg.betas(i) * e;
  }
  return {std::move(proposal), std::move(signs)};
}

double acceptance_log_ratio(const std::vector<int>& move_signs,
                            const TmcmcConfig& cfg, double log_post_new,
                            double log_post_old) {
  if (log_post_new == kNegInf) return kNegInf;
  double ratio = log_post_new - log_post_old;
  for (size_t i = 0; i < move_signs.size(); ++i) {
    const double p = cfg.forward_probs(static_cast<int>(i));
    // backward moves form set D and contribute p/(1-p); forward the inverse
    ratio += (move_signs[i] < 0) ? std::log(p / (1.0 - p))
                                 : std::log((1.0 - p) / p);
  }
  return ratio;
}

std::vector<ChainRecord> run_chain(const LogTarget& log_target,
                                   Eigen::VectorXd init,
                                   const TmcmcConfig& cfg) {
  const int n = static_cast<int>(init.size());
  cfg.validate(n);

  double lp = log_target(init);
  if (!std::isfinite(lp))
    throw std::runtime_error(
        "run_chain: log-posterior at the initial state is not finite");

  Rng rng(cfg.seed);
  Eigen::VectorXd state = std::move(init);
  std::vector<ChainRecord> records;
  if (cfg.iterations > cfg.burn_in)
    records.reserve((cfg.iterations - cfg.burn_in) / cfg.thinning + 1);

  long accepted_total = 0;
  bool warned = false;
  for (long it = 1; it <= cfg.iterations; ++it) {
    auto [proposal, signs] = propose(state, cfg, rng);
    const double lp_new = log_target(proposal);
    const double log_ratio = acceptance_log_ratio(signs, cfg, lp_new, lp);
    bool accept = false;
    if (log_ratio >= 0.0) {
      accept = true;
    } else if (log_ratio > kNegInf) {
      accept = std::log(rng.uniform() + 1e-300) < log_ratio;
    }
    if (accept) {
      state = std::move(proposal);
      lp = lp_new;
      ++accepted_total;
    }
    if (accepted_total == 0 && it == cfg.warn_after && !warned) {
      std::cerr << "tmcmc: no accepted proposals after " << it
                << " iterations; step scales may be too large\n";
      warned = true;
    }
    if (it > cfg.burn_in && (it - cfg.burn_in - 1) % cfg.thinning == 0)
      records.push_back({it, state, lp, accept});
  }
  return records;
}

std::vector<ChainRecord> run_chain(const PosteriorSpec& spec,
                                   const CovParams& init,
                                   const TmcmcConfig& cfg) {
  const int d = spec.prediction_mode() ? spec.training.d() : 0;
  LogTarget target = [&spec, d](const Eigen::VectorXd& v) {
    return log_posterior(spec, CovParams::unflatten(v, d));
  };
  return run_chain(target, init.flatten(), cfg);
}

Eigen::VectorXd tune_betas(const LogTarget& log_target,
                           const Eigen::VectorXd& init, TmcmcConfig cfg,
                           long pilot_iterations, int max_rounds) {
  cfg.iterations = pilot_iterations;
  cfg.burn_in = 0;
  cfg.thinning = 1;
  cfg.warn_after = pilot_iterations + 1;
  // carry the pilot end state across rounds: acceptance measured from a
  // far-away start reflects the uphill transient, not equilibrium, and
  // leads to badly oversized steps
  Eigen::VectorXd state = init;
  const long dim = init.size();
  for (int round = 0; round < max_rounds; ++round) {
    cfg.seed = splitmix64(cfg.seed ^ 0x7e75b9u);
    const auto pilot = run_chain(log_target, state, cfg);
    const double acc = acceptance_rate(pilot);
    state = pilot.back().params;

    // shape betas to the per-coordinate pilot spread so that one global
    // acceptance-driven factor suffices; badly mismatched relative scales
    // otherwise force every coordinate down to the stiffest one's step
    if (acc > 0.02) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
      for (const auto& r : pilot) mean += r.params;
      mean /= static_cast<double>(pilot.size());
      Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
      for (const auto& r : pilot)
        var += (r.params - mean).array().square().matrix();
      var /= static_cast<double>(pilot.size());
      Eigen::VectorXd sd = var.cwiseSqrt();
      const double sd_floor = 1e-4 * (state.cwiseAbs().mean() + 1e-4);
      for (long i = 0; i < dim; ++i) sd(i) = std::max(sd(i), sd_floor);
      // keep the overall magnitude, change only the shape
      const double old_scale = std::exp(cfg.betas.array().log().mean());
      const double sd_scale = std::exp(sd.array().log().mean());
      cfg.betas = sd * (old_scale / sd_scale);
    }

    if (acc < 0.15)
      cfg.betas *= 0.55;
    else if (acc > 0.40)
      cfg.betas *= 1.7;
    else if (round > 0)
      break;  // require one confirming round away from the start point
  }
  return cfg.betas;
}

double acceptance_rate(const std::vector<ChainRecord>& records) {
  if (records.empty()) return 0.0;
  long acc = 0;
  for (const auto& r : records) acc += r.accepted ? 1 : 0;
  return static_cast<double>(acc) / static_cast<double>(records.size());
}

}  // namespace tvgp
