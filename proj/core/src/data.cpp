#include "tvgp/data.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tvgp {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_value(const std::string& tok, const std::filesystem::path& path,
                   long line_no) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size())
    throw ParseError(path.string() + ":" + std::to_string(line_no) +
                     ": malformed value '" + tok + "'");
  if (!std::isfinite(v))
    throw ParseError(path.string() + ":" + std::to_string(line_no) +
                     ": non-finite value '" + tok + "'");
  return v;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": invalid manifest: " + e.what());
  }
  const auto base = path.parent_path();
  Manifest m;
  try {
    m.design_path = base / j.at("design").get<std::string>();
    m.data_path = base / j.at("data").get<std::string>();
    m.shape = j.at("shape").get<std::vector<int>>();
    m.d = j.at("d").get<int>();
    if (j.contains("test"))
      m.test_path = base / j["test"].get<std::string>();
    if (j.contains("true_s_test")) {
      const auto v = j["true_s_test"].get<std::vector<double>>();
      m.true_s_test = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": invalid manifest: " + e.what());
  }
  return m;
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  json j;
  j["design"] = m.design_path.filename().string();
  j["data"] = m.data_path.filename().string();
  j["shape"] = m.shape;
  j["d"] = m.d;
  if (m.test_path) j["test"] = m.test_path->filename().string();
  if (m.true_s_test)
    j["true_s_test"] = std::vector<double>(
        m.true_s_test->data(), m.true_s_test->data() + m.true_s_test->size());
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

std::vector<Eigen::VectorXd> load_design(const std::filesystem::path& path,
                                         int d) {
  std::ifstream in = open_or_throw(path);
  std::vector<Eigen::VectorXd> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) row.push_back(parse_value(tok, path, line_no));
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) != d)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(d) + " columns, got " +
                       std::to_string(row.size()));
    out.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), d));
  }
  return out;
}

void save_design(const std::vector<Eigen::VectorXd>& design,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  for (const auto& s : design) {
    for (int i = 0; i < s.size(); ++i) out << (i ? " " : "") << fmt(s(i));
    out << "\n";
  }
}

DenseTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path.string() + ":1: missing shape header");
  std::vector<int> shape;
  {
    std::istringstream ss(line);
    int v;
    while (ss >> v) shape.push_back(v);
    if (shape.empty() || !ss.eof())
      throw ParseError(path.string() + ":1: malformed shape header '" + line +
                       "'");
  }
  long m = 1;
  for (int s : shape) {
    if (s < 1)
      throw ParseError(path.string() + ":1: nonpositive mode size in header");
    m *= s;
  }
  std::vector<double> values;
  values.reserve(m);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) values.push_back(parse_value(tok, path, line_no));
  }
  if (static_cast<long>(values.size()) != m)
    throw ParseError(path.string() + ": expected " + std::to_string(m) +
                     " entries for declared shape, got " +
                     std::to_string(values.size()));
  return DenseTensor(std::move(shape), std::move(values));
}

void save_tensor(const DenseTensor& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  const auto& shape = t.shape();
  for (size_t i = 0; i < shape.size(); ++i)
    out << (i ? " " : "") << shape[i];
  out << "\n";
  const int mk = shape.back();
  for (long i = 0; i < t.size(); ++i) {
    out << fmt(t[i]);
    out << (((i + 1) % mk == 0) ? "\n" : " ");
  }
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

LoadedTraining load_training(const Manifest& m) {
  if (m.shape.size() < 2)
    throw ParseError("manifest shape must have at least 2 modes");
  const int n = m.shape[0];
  auto design = load_design(m.design_path, m.d);
  if (static_cast<int>(design.size()) != n)
    throw ParseError(m.design_path.string() + ": declared n=" +
                     std::to_string(n) + " but file has " +
                     std::to_string(design.size()) + " design points");
  DenseTensor data = load_tensor(m.data_path);
  if (data.shape() != m.shape) {
    std::string got, want;
    for (int s : data.shape()) got += std::to_string(s) + " ";
    for (int s : m.shape) want += std::to_string(s) + " ";
    throw ParseError(m.data_path.string() + ": tensor shape [" + got +
                     "] does not match manifest shape [" + want + "]");
  }

  LoadedTraining out;
  out.training.design = std::move(design);
  out.training.star_features = derive_star_features(data);
  out.training.data = std::move(data);
  out.design_digest = file_digest(m.design_path);
  out.data_digest = file_digest(m.data_path);

  if (m.test_path) {
    DenseTensor slice = load_tensor(*m.test_path);
    const std::vector<int> want(m.shape.begin() + 1, m.shape.end());
    if (slice.shape() != want)
      throw ParseError(m.test_path->string() +
                       ": test slice shape does not match a mode-1 slice");
    out.test_slice = std::move(slice);
  }
  return out;
}

DenseTensor sample_tensor_normal(const DenseTensor& mean,
                                 const std::vector<SpdFactor>& factors,
                                 Rng& rng) {
  DenseTensor z(mean.shape());
  for (long i = 0; i < z.size(); ++i) z[i] = rng.normal();
  DenseTensor out = color(z, factors);
  for (long i = 0; i < out.size(); ++i) out[i] += mean[i];
  return out;
}

SyntheticSpec default_synthetic_spec(const std::vector<int>& shape,
                                     std::uint64_t seed) {
  SyntheticSpec spec;
  spec.shape = shape;
  spec.seed = seed;
  // q2 is kept small (long length scales) so that Sigma_2 built from
  // ingestion-derived star features stays close to the generating one.
  // q1 is kept large enough that Sigma_1 stays well-conditioned (a smooth
  // SQE kernel over the design box would otherwise hit the jitter floor,
  // collapsing predictive variances to ~1e-8)
  spec.truth.q1.q = Eigen::Vector2d(10.0, 15.0);
  spec.truth.q2.q = Eigen::Vector2d(0.05, 0.08);
  spec.truth.a3 = {0.7, 0.0, 0.25, 0.6};
  spec.box_lo = Eigen::Vector2d(0.0, 0.0);
  spec.box_hi = Eigen::Vector2d(2.0, 2.0);
  spec.feature_lo = Eigen::Vector2d(-2.0, -2.0);
  spec.feature_hi = Eigen::Vector2d(2.0, 2.0);
  return spec;
}

TrainingSet SyntheticDraw::training() const {
  TrainingSet ts;
  ts.design = design;
  ts.star_features = derive_star_features(data);
  ts.data = data;
  return ts;
}

SyntheticDraw generate_synthetic(const SyntheticSpec& spec) {
  if (spec.shape.size() != 3)
    throw std::invalid_argument("synthetic generator expects a 3-mode shape");
  const int n = spec.shape[0];
  const int m2 = spec.shape[1];
  const int m3 = spec.shape[2];

  Rng rng(spec.seed);
  auto uniform_in = [&rng](const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi) {
    Eigen::VectorXd v(lo.size());
    for (int i = 0; i < lo.size(); ++i)
      v(i) = lo(i) + (hi(i) - lo(i)) * rng.uniform();
    return v;
  };

  std::vector<Eigen::VectorXd> design;
  design.reserve(n);
  for (int i = 0; i < n; ++i) design.push_back(uniform_in(spec.box_lo, spec.box_hi));

  std::vector<Eigen::VectorXd> features;
  features.reserve(m2);
  for (int i = 0; i < m2; ++i)
    features.push_back(uniform_in(spec.feature_lo, spec.feature_hi));

  Eigen::VectorXd s_test = spec.truth.s_test
                               ? *spec.truth.s_test
                               : uniform_in(spec.box_lo, spec.box_hi);

  // The held-out slice is drawn jointly with the training tensor: one
  // (n+1)-slice draw over design + s_test, split afterwards.
  auto aug_design = design;
  aug_design.push_back(s_test);

  SpdFactor sigma1 = [&] {
    if (!spec.misspecified)
      return sqe_kernel(aug_design, spec.truth.q1, kDefaultJitter);
    // misspecified variant: exponential (Ornstein-Uhlenbeck) kernel
    const int na = static_cast<int>(aug_design.size());
    Eigen::MatrixXd k(na, na);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j <= i; ++j) {
        Eigen::VectorXd diff = aug_design[i] - aug_design[j];
        double dist = std::sqrt(
            (spec.truth.q1.q.array() * diff.array().square()).sum());
        k(i, j) = k(j, i) = std::exp(-dist) + (i == j ? kDefaultJitter : 0.0);
      }
    return SpdFactor(std::move(k));
  }();
  SpdFactor sigma3 = sigma3_from_factor(spec.truth.a3);

  // mean slice puts each star at its feature location
  DenseTensor mean({n + 1, m2, m3});
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < m2; ++i)
      for (int c = 0; c < m3; ++c)
        mean[(static_cast<long>(j) * m2 + i) * m3 + c] = features[i](c);

  // Sigma_2 is built from star features, but at ingestion the features are
  // re-derived from the data (per-star mean velocity).  Iterate the draw to
  // the fixed point where the derived features equal the ones that built
  // Sigma_2, so the benchmark is exactly tensor-normal under the covariance
  // the fit will assemble.  The noise tensor z is drawn once and reused.
  DenseTensor z({n + 1, m2, m3});
  for (long i = 0; i < z.size(); ++i) z[i] = rng.normal();

  std::vector<Eigen::VectorXd> gen_features = features;
  DenseTensor full;
  for (int it = 0; it < 64; ++it) {
    SpdFactor sigma2 = sqe_kernel(gen_features, spec.truth.q2, kDefaultJitter);
    full = color(z, {sigma1, sigma2, sigma3});
    for (long i = 0; i < full.size(); ++i) full[i] += mean[i];
    std::vector<Eigen::VectorXd> derived(m2, Eigen::VectorXd::Zero(m3));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m2; ++i)
        for (int c = 0; c < m3; ++c)
          derived[i](c) += full[(static_cast<long>(j) * m2 + i) * m3 + c];
    double delta = 0.0;
    for (int i = 0; i < m2; ++i) {
      derived[i] /= static_cast<double>(n);
      delta = std::max(delta,
                       (derived[i] - gen_features[i]).cwiseAbs().maxCoeff());
    }
    gen_features = std::move(derived);
    if (delta < 1e-12) break;
  }
  features = gen_features;

  DenseTensor data({n, m2, m3});
  DenseTensor test({m2, m3});
  const long sz = static_cast<long>(m2) * m3;
  for (long i = 0; i < data.size(); ++i) data[i] = full[i];
  for (long i = 0; i < sz; ++i) test[i] = full[static_cast<long>(n) * sz + i];

  return SyntheticDraw{std::move(design), std::move(features), std::move(data),
                       std::move(test), std::move(s_test)};
}

BenchmarkTruth make_benchmark(const SyntheticSpec& spec,
                              const std::filesystem::path& out_dir) {
  const int d = static_cast<int>(spec.box_lo.size());
  SyntheticDraw draw = generate_synthetic(spec);
  const Eigen::VectorXd& s_test = draw.s_test;

  std::filesystem::create_directories(out_dir);
  save_design(draw.design, out_dir / "design.txt");
  save_tensor(draw.data, out_dir / "data.txt");
  save_tensor(draw.test_slice, out_dir / "test.txt");

  Manifest m;
  m.design_path = out_dir / "design.txt";
  m.data_path = out_dir / "data.txt";
  m.test_path = out_dir / "test.txt";
  m.shape = spec.shape;
  m.d = d;
  m.true_s_test = s_test;
  save_manifest(m, out_dir / "manifest.json");

  BenchmarkTruth truth{spec.truth, s_test};
  truth.params.s_test = s_test;
  {
    json j;
    const auto names = CovParams::names();
    CovParams base = spec.truth;
    base.s_test.reset();
    const Eigen::VectorXd flat = base.flatten();
    for (size_t i = 0; i < names.size(); ++i) j["params"][names[i]] = flat(i);
    j["s_test"] = std::vector<double>(s_test.data(), s_test.data() + d);
    j["seed"] = spec.seed;
    j["misspecified"] = spec.misspecified;
    j["digests"]["design"] = file_digest(out_dir / "design.txt");
    j["digests"]["data"] = file_digest(out_dir / "data.txt");
    j["digests"]["test"] = file_digest(out_dir / "test.txt");
    std::ofstream out(out_dir / "truth.json");
    out << j.dump(2) << "\n";
  }
  return truth;
}

}  // namespace tvgp
