#include <benchmark/benchmark.h>

#include "tvgp/data.hpp"
#include "tvgp/model.hpp"
#include "tvgp/tmcmc.hpp"

namespace {

using namespace tvgp;

PosteriorSpec make_spec(int n, int m2, int m3) {
  SyntheticSpec sspec = default_synthetic_spec({n, m2, m3}, 17);
  Rng rng(sspec.seed);
  std::vector<Eigen::VectorXd> design;
  for (int i = 0; i < n; ++i)
    design.push_back(Eigen::Vector2d(2.0 * rng.uniform(), 2.0 * rng.uniform()));
  std::vector<SpdFactor> factors{
      sqe_kernel(design, sspec.truth.q1, kDefaultJitter),
      SpdFactor::identity(m2), sigma3_from_factor(sspec.truth.a3)};
  TrainingSet ts;
  ts.design = design;
  ts.data = sample_tensor_normal(DenseTensor({n, m2, m3}), factors, rng);
  ts.star_features = derive_star_features(ts.data);
  return make_training_spec(std::move(ts));
}

void BM_ModeProduct(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DenseTensor t({n, 50, 2});
  for (long i = 0; i < t.size(); ++i) t[i] = 0.01 * (i % 97);
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(mode_n_product(t, m, 1));
}
BENCHMARK(BM_ModeProduct)->Arg(32)->Arg(216);

void BM_LogPosterior(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  PosteriorSpec spec = make_spec(n, 50, 2);
  CovParams p = default_synthetic_spec({n, 50, 2}, 17).truth;
  for (auto _ : state) benchmark::DoNotOptimize(log_posterior(spec, p));
}
BENCHMARK(BM_LogPosterior)->Arg(32)->Arg(216)->Unit(benchmark::kMillisecond);

void BM_ChainIterations(benchmark::State& state) {
  PosteriorSpec spec = make_spec(32, 10, 2);
  CovParams p = default_synthetic_spec({32, 10, 2}, 17).truth;
  TmcmcConfig cfg;
  cfg.iterations = 100;
  cfg.betas = Eigen::VectorXd::Constant(8, 0.02);
  cfg.forward_probs = Eigen::VectorXd::Constant(8, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(run_chain(spec, p, cfg));
}
BENCHMARK(BM_ChainIterations)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
