#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "tvgp/data.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = TVGP_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("tvgp_cli_" + name);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const int rc = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("simulate writes a loadable benchmark, deterministically") {
  TempDir dir("sim");
  const std::string out_a = (dir.path / "a").string();
  const std::string out_b = (dir.path / "b").string();
  CHECK(run("simulate --shape 16,5,2 --seed 7 --out " + out_a) == 0);
  CHECK(run("simulate --shape 16,5,2 --seed 7 --out " + out_b) == 0);
  for (const char* f : {"design.txt", "data.txt", "test.txt", "manifest.json",
                        "truth.json"})
    CHECK(fs::exists(dir.path / "a" / f));
  CHECK(tvgp::file_digest(dir.path / "a" / "data.txt") ==
        tvgp::file_digest(dir.path / "b" / "data.txt"));
  // loads cleanly
  auto t = tvgp::load_training(
      tvgp::load_manifest(dir.path / "a" / "manifest.json"));
  CHECK(t.training.n() == 16);
}

TEST_CASE("fit then predict then diagnose on a small benchmark") {
  TempDir dir("fit");
  const std::string bench = (dir.path / "bench").string();
  REQUIRE(run("simulate --shape 12,4,2 --seed 3 --out " + bench) == 0);
  const std::string manifest = bench + "/manifest.json";

  const std::string fit_out = (dir.path / "fit").string();
  CHECK(run("fit --manifest " + manifest +
            " --iterations 1500 --burn-in 300 --seed 5 --out " + fit_out) == 0);
  CHECK(fs::exists(dir.path / "fit" / "chain_0.csv"));
  CHECK(fs::exists(dir.path / "fit" / "trace.csv"));
  CHECK(fs::exists(dir.path / "fit" / "summary.json"));
  CHECK(fs::exists(dir.path / "fit" / "config.json"));
  for (const char* p : {"q11_1", "q22_1", "q11_2", "q22_2", "a11_3", "a12_3",
                        "a21_3", "a22_3"})
    CHECK(fs::exists(dir.path / "fit" / ("marginal_" + std::string(p) + ".csv")));

  const std::string pred_out = (dir.path / "pred").string();
  CHECK(run("predict --manifest " + manifest +
            " --iterations 1500 --burn-in 300 --seed 5 --out " + pred_out) ==
        0);
  CHECK(fs::exists(dir.path / "pred" / "marginal_s_test_1.csv"));
  CHECK(fs::exists(dir.path / "pred" / "marginal_s_test_2.csv"));
  // chain has exactly 10 sampled scalars
  std::ifstream chain(dir.path / "pred" / "chain_0.csv");
  std::string header;
  std::getline(chain, header);
  CHECK(std::count(header.begin(), header.end(), ',') == 2 + 10);

  CHECK(run("diagnose --chains-dir " + fit_out) == 0);
  CHECK(fs::exists(dir.path / "fit" / "diagnostics.json"));
  // purity: rerunning produces the identical report
  const auto digest = tvgp::file_digest(dir.path / "fit" / "diagnostics.json");
  CHECK(run("diagnose --chains-dir " + fit_out) == 0);
  CHECK(tvgp::file_digest(dir.path / "fit" / "diagnostics.json") == digest);
}

TEST_CASE("usage and data errors use distinct exit codes") {
  TempDir dir("err");
  const std::string bench = (dir.path / "bench").string();
  REQUIRE(run("simulate --shape 8,3,2 --seed 1 --out " + bench) == 0);
  const std::string manifest = bench + "/manifest.json";

  // iterations <= burn_in -> usage error (1)
  CHECK(run("fit --manifest " + manifest +
            " --iterations 100 --burn-in 100 --out " +
            (dir.path / "x").string()) == 1);
  // missing subcommand / unknown flag -> usage error (1)
  CHECK(run("fit --no-such-flag") == 1);
  // bad manifest path -> data error (2)
  CHECK(run("fit --manifest " + (dir.path / "nope.json").string() + " --out " +
            (dir.path / "y").string()) == 2);
  // predict without a test slice -> data error (2)
  {
    std::ofstream m(dir.path / "bench" / "no_test.json");
    m << R"({"design":"design.txt","data":"data.txt","shape":[8,3,2],"d":2})";
  }
  CHECK(run("predict --manifest " + bench + "/no_test.json --iterations 200 "
            "--burn-in 10 --out " + (dir.path / "z").string()) == 2);
  // diagnose on a truncated chain -> data error (2)
  {
    fs::create_directories(dir.path / "short");
    std::ofstream c(dir.path / "short" / "chain_0.csv");
    c << "iteration,accepted,log_posterior,q11_1\n1,1,-3.5,0.2\n";
  }
  CHECK(run("diagnose --chains-dir " + (dir.path / "short").string()) == 2);
}
