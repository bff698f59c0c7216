#ifndef TVGP_TMCMC_HPP
#define TVGP_TMCMC_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "tvgp/model.hpp"

namespace tvgp {

/// Seedable generator with explicit, reproducible draw primitives.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Deterministic substream for chain `chain_index` of a multi-chain run.
  static Rng for_chain(std::uint64_t master_seed, int chain_index);

  double uniform();      // U(0,1)
  double exponential();  // Gamma(1,1)
  double normal();       // N(0,1)

 private:
  std::mt19937_64 gen_;
};

struct TmcmcConfig {
  Eigen::VectorXd betas;          // per-parameter step scales
  Eigen::VectorXd forward_probs;  // per-parameter p_i in (0,1)
  long iterations = 20000;
  long burn_in = 0;
  std::uint64_t seed = 0;
  long thinning = 1;
  bool shared_innovation = false;  // one Gamma(1,1) draw shared by all moves
  long warn_after = 1000;  // zero acceptances past this -> stderr warning

  void validate(int n_params) const;
};

struct ChainRecord {
  long iteration;
  Eigen::VectorXd params;
  double log_post;
  bool accepted;
};

using LogTarget = std::function<double(const Eigen::VectorXd&)>;

/// One additive +- move per parameter: e_i ~ Gamma(1,1), u_i ~ U(0,1);
/// forward (+beta_i e_i) when u_i < p_i, backward otherwise.  Returns the
/// proposal and the per-parameter move signs.
std::pair<Eigen::VectorXd, std::vector<int>> propose(
    const Eigen::VectorXd& state, const TmcmcConfig& cfg, Rng& rng);

/// log of the acceptance ratio: the direction-probability correction
/// sum_{backward} log(p_i/(1-p_i)) + sum_{forward} log((1-p_i)/p_i)
/// plus the posterior log-ratio.
double acceptance_log_ratio(const std::vector<int>& move_signs,
                            const TmcmcConfig& cfg, double log_post_new,
                            double log_post_old);

/// Metropolis loop over an arbitrary log-target; retains every
/// `thinning`-th post-burn-in state.  Identical seed, config and target
/// give identical output.
std::vector<ChainRecord> run_chain(const LogTarget& log_target,
                                   Eigen::VectorXd init,
                                   const TmcmcConfig& cfg);

/// Chain over the model posterior (parameters flattened per CovParams).
std::vector<ChainRecord> run_chain(const PosteriorSpec& spec,
                                   const CovParams& init,
                                   const TmcmcConfig& cfg);

/// Pilot-run scale heuristic: rescales betas until the acceptance rate of
/// a short pilot chain lands in [0.15, 0.40].
Eigen::VectorXd tune_betas(const LogTarget& log_target,
                           const Eigen::VectorXd& init, TmcmcConfig cfg,
                           long pilot_iterations = 500, int max_rounds = 12);

double acceptance_rate(const std::vector<ChainRecord>& records);

/// Deterministic per-chain seed derivation from a master seed.
std::uint64_t chain_seed(std::uint64_t master_seed, int chain_index);

}  // namespace tvgp

#endif  // TVGP_TMCMC_HPP
