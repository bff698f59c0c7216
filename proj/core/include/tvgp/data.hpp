#ifndef TVGP_DATA_HPP
#define TVGP_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tvgp/model.hpp"
#include "tvgp/tmcmc.hpp"

namespace tvgp {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Describes where a training set lives on disk and what shape to expect.
struct Manifest {
  std::filesystem::path design_path;
  std::filesystem::path data_path;
  std::vector<int> shape;  // (n, m2, ..., mk)
  int d = 0;
  std::optional<std::filesystem::path> test_path;
  std::optional<Eigen::VectorXd> true_s_test;  // benchmark truth, if declared
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& m, const std::filesystem::path& path);

/// Delimited text, one design point per row, d columns.
std::vector<Eigen::VectorXd> load_design(const std::filesystem::path& path,
                                         int d);
void save_design(const std::vector<Eigen::VectorXd>& design,
                 const std::filesystem::path& path);

/// Delimited text with a one-line shape header ("m1 m2 ... mk"), then the
/// entries in row-major order, one mode-k row per line.
DenseTensor load_tensor(const std::filesystem::path& path);
void save_tensor(const DenseTensor& t, const std::filesystem::path& path);

/// FNV-1a over the file bytes; recorded for run provenance.
std::uint64_t file_digest(const std::filesystem::path& path);

struct LoadedTraining {
  TrainingSet training;
  std::optional<DenseTensor> test_slice;
  std::uint64_t design_digest = 0;
  std::uint64_t data_digest = 0;
};

/// Loads and validates the files named by the manifest; star features are
/// derived here (per-star mean velocity across design points).
LoadedTraining load_training(const Manifest& m);

/// Parameters of the synthetic tensor-normal benchmark generator.
struct SyntheticSpec {
  std::vector<int> shape;  // (n, m2, m3)
  CovParams truth;         // q1, q2, a3; s_test used for the held-out slice
  Eigen::VectorXd box_lo;  // design-point sampling box
  Eigen::VectorXd box_hi;
  Eigen::VectorXd feature_lo;  // star-feature sampling box
  Eigen::VectorXd feature_hi;
  std::uint64_t seed = 0;
  bool misspecified = false;  // replace the SQE Sigma_1 with a non-SQE one
};

/// mean + Z x_1 L_1 ... x_k L_k with Z i.i.d. standard normal.
DenseTensor sample_tensor_normal(const DenseTensor& mean,
                                 const std::vector<SpdFactor>& factors,
                                 Rng& rng);

struct BenchmarkTruth {
  CovParams params;
  Eigen::VectorXd s_test;
};

/// One draw from the synthetic generator, before anything touches disk.
struct SyntheticDraw {
  std::vector<Eigen::VectorXd> design;
  std::vector<Eigen::VectorXd> features;  // generating star features
  DenseTensor data;                       // (n, m2, m3)
  DenseTensor test_slice;                 // (m2, m3), drawn jointly
  Eigen::VectorXd s_test;

  /// TrainingSet as ingestion would build it (star features re-derived
  /// from the data, not the generating ones).
  TrainingSet training() const;
};

SyntheticDraw generate_synthetic(const SyntheticSpec& spec);

/// Writes design.txt, data.txt, test.txt, manifest.json and truth.json
/// into out_dir; returns the generating truth.
BenchmarkTruth make_benchmark(const SyntheticSpec& spec,
                              const std::filesystem::path& out_dir);

/// A ready-to-use default truth/boxes for the given shape, derived
/// deterministically; used by the CLI and the test suites.
SyntheticSpec default_synthetic_spec(const std::vector<int>& shape,
                                     std::uint64_t seed);

}  // namespace tvgp

#endif  // TVGP_DATA_HPP
