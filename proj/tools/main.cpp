// tvgp command-line tool: simulate / fit / predict / diagnose.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "tvgp/data.hpp"
#include "tvgp/diagnostics.hpp"
#include "tvgp/model.hpp"
#include "tvgp/tmcmc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tvgp;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;
constexpr int kSchemaVersion = 1;

struct CliOptions {
  std::string manifest;
  std::string out;
  std::string shape_str = "16,5,2";
  long iterations = 20000;
  long burn_in = 2000;
  long thinning = 1;
  std::uint64_t seed = 0;
  int chains = 1;
  int threads = 1;
  double q_max = 1e6;
  double jitter = kDefaultJitter;
  double forward_prob = 0.5;
  bool shared_innovation = false;
  bool misspecified = false;
  double symmetry_p_threshold = 1e-3;
};

std::vector<int> parse_shape(const std::string& s) {
  std::vector<int> shape;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) shape.push_back(std::stoi(tok));
  if (shape.size() != 3)
    throw CLI::ValidationError("--shape", "expected three comma-separated sizes");
  return shape;
}

fs::path resolve_out(const CliOptions& opt) {
  if (!opt.out.empty()) return opt.out;
  if (const char* root = std::getenv("TVGP_OUTPUT_ROOT")) return root;
  return "tvgp_out";
}

void write_csv_header(std::ofstream& out, const std::vector<std::string>& names) {
  out << "iteration,accepted,log_posterior";
  for (const auto& n : names) out << "," << n;
  out << "\n";
}

void write_chain_csv(const fs::path& path, const std::vector<ChainRecord>& recs,
                     const std::vector<std::string>& names) {
  std::ofstream out(path);
  write_csv_header(out, names);
  out.precision(17);
  for (const auto& r : recs) {
    out << r.iteration << "," << (r.accepted ? 1 : 0) << "," << r.log_post;
    for (int i = 0; i < r.params.size(); ++i) out << "," << r.params(i);
    out << "\n";
  }
}

void write_marginal_csv(const fs::path& path, const MarginalDensity& m) {
  std::ofstream out(path);
  out << "grid,density\n";
  out.precision(17);
  for (size_t i = 0; i < m.grid.size(); ++i)
    out << m.grid[i] << "," << m.density[i] << "\n";
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

json echo_config(const CliOptions& opt, const std::string& command) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["manifest"] = opt.manifest;
  j["iterations"] = opt.iterations;
  j["burn_in"] = opt.burn_in;
  j["thinning"] = opt.thinning;
  j["seed"] = opt.seed;
  j["chains"] = opt.chains;
  j["threads"] = opt.threads;
  j["q_max"] = opt.q_max;
  j["jitter"] = opt.jitter;
  j["forward_prob"] = opt.forward_prob;
  j["shared_innovation"] = opt.shared_innovation;
  return j;
}

int cmd_simulate(const CliOptions& opt) {
  SyntheticSpec spec = default_synthetic_spec(parse_shape(opt.shape_str), opt.seed);
  spec.misspecified = opt.misspecified;
  const fs::path out_dir = resolve_out(opt);
  make_benchmark(spec, out_dir);
  std::cout << "benchmark written to " << out_dir.string() << "\n";
  return 0;
}

int run_fit(const CliOptions& opt, bool prediction, const std::string& command) {
  if (opt.iterations <= opt.burn_in) {
    std::cerr << "error: iterations must exceed burn_in\n";
    return kExitUsage;
  }
  const Manifest manifest = load_manifest(opt.manifest);
  const LoadedTraining loaded = load_training(manifest);

  PriorBounds bounds;
  bounds.q_max = opt.q_max;
  PosteriorSpec spec;
  if (prediction) {
    if (!loaded.test_slice) {
      std::cerr << "error: predict requires a test slice in the manifest\n";
      return kExitData;
    }
    spec = make_prediction_spec(loaded.training, *loaded.test_slice,
                                opt.jitter, bounds);
  } else {
    spec = make_training_spec(loaded.training, opt.jitter, bounds);
  }

  const int d = prediction ? spec.training.d() : 0;
  const auto names = CovParams::names(d);
  const int n_params = static_cast<int>(names.size());

  const CovParams init = default_init(spec);
  const Eigen::VectorXd init_flat = init.flatten();
  LogTarget target = [&spec, d](const Eigen::VectorXd& v) {
    return log_posterior(spec, CovParams::unflatten(v, d));
  };
  if (!std::isfinite(target(init_flat))) {
    std::cerr << "error: posterior not finite at the initial state\n";
    return kExitNumerical;
  }

  TmcmcConfig cfg;
  cfg.iterations = opt.iterations;
  cfg.burn_in = opt.burn_in;
  cfg.thinning = opt.thinning;
  cfg.shared_innovation = opt.shared_innovation;
  cfg.forward_probs = Eigen::VectorXd::Constant(n_params, opt.forward_prob);
  cfg.seed = opt.seed;

  const fs::path out_dir = resolve_out(opt);
  fs::create_directories(out_dir);

  // In prediction mode the conditional posterior over s_test is typically
  // multimodal; start each chain in a distinct candidate basin.
  std::vector<Eigen::VectorXd> chain_inits(opt.chains, init_flat);
  if (prediction && opt.chains > 1) {
    const std::vector<CovParams> basins = prediction_inits(spec, opt.chains);
    for (int c = 0; c < opt.chains && c < static_cast<int>(basins.size()); ++c)
      chain_inits[c] = basins[c].flatten();
  }

  std::vector<std::vector<ChainRecord>> chains(opt.chains);
  std::vector<Eigen::VectorXd> tuned_betas(opt.chains);
  {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int workers = std::max(1, std::min(opt.threads, opt.chains));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int c; (c = next.fetch_add(1)) < opt.chains;) {
          TmcmcConfig ccfg = cfg;
          ccfg.seed = chain_seed(opt.seed, c);
          ccfg.betas = 0.1 * (chain_inits[c].cwiseAbs().array() + 0.1).matrix();
          ccfg.betas = tune_betas(target, chain_inits[c], ccfg);
          tuned_betas[c] = ccfg.betas;
          chains[c] = run_chain(target, chain_inits[c], ccfg);
        }
      });
    for (auto& t : pool) t.join();
  }

  // Chains stuck in a dominated basin would pollute pooled summaries; keep
  // only the chains whose second-half mean log posterior matches the best.
  std::vector<bool> keep(opt.chains, true);
  if (opt.chains > 1) {
    std::vector<double> level(opt.chains);
    for (int c = 0; c < opt.chains; ++c) {
      const auto& recs = chains[c];
      double s = 0.0;
      const std::size_t half = recs.size() / 2;
      for (std::size_t i = half; i < recs.size(); ++i) s += recs[i].log_post;
      level[c] = s / static_cast<double>(recs.size() - half);
    }
    const double best = *std::max_element(level.begin(), level.end());
    for (int c = 0; c < opt.chains; ++c) keep[c] = level[c] > best - 0.05;
  }

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["parameter_names"] = names;
  for (int c = 0; c < opt.chains; ++c) {
    write_chain_csv(out_dir / ("chain_" + std::to_string(c) + ".csv"),
                    chains[c], names);
    summary["acceptance_rate"].push_back(acceptance_rate(chains[c]));
  }

  {
    std::ofstream out(out_dir / "trace.csv");
    out << "iteration,log_posterior\n";
    out.precision(17);
    for (const auto& [it, lp] : trace(chains[0])) out << it << "," << lp << "\n";
  }

  // marginals and summaries over the pooled post-burn-in draws of the
  // dominant-level chains
  for (int i = 0; i < n_params; ++i) {
    std::vector<double> samples;
    for (int c = 0; c < opt.chains; ++c) {
      if (!keep[c]) continue;
      for (const auto& r : chains[c]) samples.push_back(r.params(i));
    }
    const MarginalDensity kde = kde_marginal(samples, 256, names[i]);
    write_marginal_csv(out_dir / ("marginal_" + names[i] + ".csv"), kde);
    json stat;
    {
      double s = 0;
      for (double x : samples) s += x;
      stat["mean"] = s / samples.size();
    }
    stat["q05"] = quantile(samples, 0.05);
    stat["q25"] = quantile(samples, 0.25);
    stat["median"] = quantile(samples, 0.50);
    stat["q75"] = quantile(samples, 0.75);
    stat["q95"] = quantile(samples, 0.95);
    summary["parameters"][names[i]] = stat;
  }

  for (int c = 0; c < opt.chains; ++c) {
    summary["tuned_betas"].push_back(std::vector<double>(
        tuned_betas[c].data(), tuned_betas[c].data() + n_params));
    summary["chain_pooled"].push_back(static_cast<bool>(keep[c]));
  }

  json config = echo_config(opt, command);
  config["input_digests"]["design"] = loaded.design_digest;
  config["input_digests"]["data"] = loaded.data_digest;
  {
    std::ofstream out(out_dir / "config.json");
    out << config.dump(2) << "\n";
  }
  {
    std::ofstream out(out_dir / "summary.json");
    out << summary.dump(2) << "\n";
  }
  std::cout << command << " complete; outputs in " << out_dir.string() << "\n";
  return 0;
}

std::vector<std::vector<double>> read_chain_csv(const fs::path& path,
                                                std::vector<std::string>& names) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  names.clear();
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) names.push_back(tok);
  }
  std::vector<std::vector<double>> columns(names.size());
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    size_t col = 0;
    while (std::getline(ss, tok, ',')) {
      if (col >= columns.size())
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": too many columns");
      columns[col++].push_back(std::stod(tok));
    }
    if (col != columns.size())
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": short row");
  }
  return columns;
}

int cmd_diagnose(const CliOptions& opt) {
  const fs::path dir = opt.manifest;
  const fs::path chain_path = dir / "chain_0.csv";
  std::vector<std::string> names;
  const auto columns = read_chain_csv(chain_path, names);
  if (columns.empty() || columns[0].size() < 64)
    throw ParseError(chain_path.string() +
                     ": insufficient chain data for diagnostics");

  auto col_index = [&names](const std::string& name) {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw ParseError("chain file lacks column " + name);
  };

  const auto& log_post = columns[col_index("log_posterior")];
  const StationarityReport st = stationarity_check(log_post, 0.25);
  const SymmetryReport sym =
      symmetry_report(columns[col_index("a12_3")], columns[col_index("a21_3")],
                      opt.symmetry_p_threshold);

  json j;
  j["schema_version"] = kSchemaVersion;
  j["stationarity"] = {{"z_score", st.z_score},
                       {"first_mean", st.first_mean},
                       {"last_mean", st.last_mean},
                       {"pass", st.pass}};
  j["symmetry"] = {{"tv_distance", sym.tv_distance},
                   {"ks_statistic", sym.ks_statistic},
                   {"ks_p_value", sym.ks_p_value},
                   {"asymmetry_detected", sym.asymmetry_detected}};
  const fs::path out_dir = opt.out.empty() ? dir : fs::path(opt.out);
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "diagnostics.json");
    out << j.dump(2) << "\n";
  }
  std::cout << "stationarity: " << (st.pass ? "pass" : "FAIL")
            << " (z=" << st.z_score << ")\n"
            << "symmetry: "
            << (sym.asymmetry_detected ? "asymmetry detected" : "no asymmetry")
            << " (ks_p=" << sym.ks_p_value << ", tv=" << sym.tv_distance
            << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kronecker-separable covariance learning for tensor-variate "
               "GP data via transformation-based MCMC"};
  app.require_subcommand(1);
  CliOptions opt;

  auto add_sampler_opts = [&opt](CLI::App* cmd) {
    cmd->add_option("--manifest", opt.manifest, "manifest JSON path")
        ->required();
    cmd->add_option("--out", opt.out, "output directory");
    cmd->add_option("--iterations", opt.iterations, "chain length");
    cmd->add_option("--burn-in", opt.burn_in, "discarded initial iterations");
    cmd->add_option("--thinning", opt.thinning, "record every k-th state");
    cmd->add_option("--seed", opt.seed, "master RNG seed");
    cmd->add_option("--chains", opt.chains, "number of chains");
    cmd->add_option("--threads", opt.threads, "worker threads for chains");
    cmd->add_option("--q-max", opt.q_max, "upper prior bound for q parameters");
    cmd->add_option("--jitter", opt.jitter, "kernel diagonal jitter");
    cmd->add_option("--forward-prob", opt.forward_prob,
                    "TMCMC forward-move probability");
    cmd->add_flag("--shared-innovation", opt.shared_innovation,
                  "share one Gamma(1,1) draw across parameters per move");
  };

  auto* sim = app.add_subcommand("simulate", "generate a synthetic benchmark");
  sim->add_option("--shape", opt.shape_str, "n,m2,m3");
  sim->add_option("--seed", opt.seed, "generator seed");
  sim->add_option("--out", opt.out, "output directory");
  sim->add_flag("--misspecified", opt.misspecified,
                "use a non-SQE mode-1 covariance");

  auto* fit = app.add_subcommand("fit", "sample the training posterior");
  add_sampler_opts(fit);
  auto* pred = app.add_subcommand(
      "predict", "joint posterior including the unknown design point");
  add_sampler_opts(pred);

  auto* diag = app.add_subcommand("diagnose", "reports from stored chains");
  diag->add_option("--chains-dir", opt.manifest, "directory with chain_*.csv")
      ->required();
  diag->add_option("--out", opt.out, "report output directory");
  diag->add_option("--symmetry-p-threshold", opt.symmetry_p_threshold,
                   "KS p-value below which asymmetry is flagged");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(opt);
    if (fit->parsed()) return run_fit(opt, false, "fit");
    if (pred->parsed()) return run_fit(opt, true, "predict");
    if (diag->parsed()) return cmd_diagnose(opt);
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
