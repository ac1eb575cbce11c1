#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kpkvb/cli.hpp"

namespace fs = std::filesystem;
using kpkvb::run_cli;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kpkvb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "kpkvb_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const fs::path kFixtures = KPKVB_FIXTURES_DIR;
const fs::path kConfigs = KPKVB_CONFIGS_DIR;

}  // namespace

TEST_CASE("generate writes the golden header") {
  const fs::path dir = scratch("generate");
  const auto r = cli({"generate", "--model", "kpkvb", "--n", "200", "--alpha", "0.8", "--nu", "1.3", "--seed", "7",
                      "--out", (dir / "g.txt").string()});
  REQUIRE(r.code == 0);
  const std::string text = slurp(dir / "g.txt");
  const auto at = text.find("# R=");
  REQUIRE(at != std::string::npos);
  const double R = std::stod(text.substr(at + 4, text.find('\n', at) - at - 4));
  CHECK(R == doctest::Approx(2.0 * std::log(200 / 1.3)).epsilon(1e-11));
  CHECK(std::round(R * 1000) / 1000 == doctest::Approx(10.072));
  CHECK(text.find("# seed=7\n") != std::string::npos);
  CHECK(text.find("# version=") != std::string::npos);
  CHECK(text.find("\nvertices 200\n") != std::string::npos);
  CHECK(r.err.find("R=10.0719") != std::string::npos);
  CHECK(r.err.find("lambda=0.331") != std::string::npos);
}

TEST_CASE("generate is deterministic for every model and thread count") {
  const fs::path dir = scratch("determinism");
  for (const char* model : {"kpkvb", "poisson", "idealized"}) {
    auto run = [&](const std::string& file, const char* threads) {
      return cli({"--threads", threads, "generate", "--model", model, "--n", "500", "--seed", "3", "--out",
                  (dir / file).string()});
    };
    REQUIRE(run("a.txt", "1").code == 0);
    REQUIRE(run("b.txt", "4").code == 0);
    CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
    CHECK(slurp(dir / "a.txt").find(std::string("# model=") + model) != std::string::npos);
  }
  const auto stdout_run = cli({"generate", "--n", "50", "--seed", "1", "--out", "-"});
  CHECK(stdout_run.out.rfind("# kpkvb graph", 0) == 0);
}

TEST_CASE("generate with N = 1") {
  const fs::path dir = scratch("n1");
  REQUIRE(cli({"generate", "--n", "1", "--nu", "0.5", "--out", (dir / "one.txt").string()}).code == 0);
  const std::string text = slurp(dir / "one.txt");
  CHECK(text.find("\nvertices 1\n") != std::string::npos);
  CHECK(text.find("\nedges 0\n") != std::string::npos);
  const auto d = cli({"analyze", "--in", (dir / "one.txt").string(), "--report", "diameter"});
  REQUIRE(d.code == 0);
  CHECK(nlohmann::json::parse(d.out)["max"] == 0);
}

TEST_CASE("usage errors exit 2") {
  const fs::path out = scratch("usage") / "x.txt";
  const auto nu = cli({"generate", "--n", "200", "--nu", "300", "--out", out.string()});
  CHECK(nu.code == 2);
  CHECK(nu.err.find("N must exceed nu") != std::string::npos);
  CHECK(!fs::exists(out));
  CHECK(cli({"generate", "--out", out.string()}).code == 2);
  CHECK(cli({"generate", "--n", "10", "--model", "erdos", "--out", out.string()}).code == 2);
  CHECK(cli({"generate", "--n", "10", "--alpha", "abc", "--out", out.string()}).code == 2);
  CHECK(cli({"generate", "--n", "10", "--alpha", "0", "--out", out.string()}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"analyze", "--in", (kFixtures / "triangle.txt").string(), "--report", "nope"}).code == 2);
  CHECK(cli({"verify", "--suite", "nope"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("analyze reports") {
  const auto c = cli({"analyze", "--in", (kFixtures / "triangle.txt").string(), "--report", "clustering"});
  REQUIRE(c.code == 0);
  const auto j = nlohmann::json::parse(c.out);
  CHECK(j["value"] == 1.0);
  CHECK(j["report"] == "clustering");
  CHECK(j["graph"]["vertices"] == 3);

  const auto comps = nlohmann::json::parse(
      cli({"analyze", "--in", (kFixtures / "triangle.txt").string(), "--report", "components"}).out);
  CHECK(comps["count"] == 1);
  const auto deg =
      nlohmann::json::parse(cli({"analyze", "--in", (kFixtures / "triangle.txt").string(), "--report", "degrees"}).out);
  CHECK(deg["mean"] == 2.0);
  CHECK(deg["fit"].is_null());
  const auto fw = nlohmann::json::parse(cli({"analyze", "--in", (kFixtures / "triangle.txt").string(), "--report",
                                             "diameter", "--method", "floyd-warshall"})
                                            .out);
  CHECK(fw["max"] == 1);
  CHECK(fw["method"] == "floyd_warshall");
}

TEST_CASE("analyze is byte-identical across runs") {
  const fs::path dir = scratch("analyze");
  REQUIRE(cli({"generate", "--n", "200", "--seed", "7", "--out", (dir / "g.txt").string()}).code == 0);
  for (const char* report : {"diameter", "degrees", "clustering", "components"}) {
    REQUIRE(cli({"analyze", "--in", (dir / "g.txt").string(), "--report", report, "--out",
                 (dir / "a.json").string()})
                .code == 0);
    REQUIRE(cli({"--threads", "3", "analyze", "--in", (dir / "g.txt").string(), "--report", report, "--out",
                 (dir / "b.json").string()})
                .code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(nlohmann::json::parse(slurp(dir / "a.json"))["graph"]["seed"] == 7);
  }
}

TEST_CASE("analyze input errors exit 3") {
  const fs::path dir = scratch("analyze_bad");
  CHECK(cli({"analyze", "--in", (dir / "missing.txt").string(), "--report", "diameter"}).code == 3);
  std::ofstream(dir / "bad.txt") << "# kpkvb graph\nvertices 2\n0\n1\nedges 1\n0 7\n";
  const auto r = cli({"analyze", "--in", (dir / "bad.txt").string(), "--report", "diameter"});
  CHECK(r.code == 3);
  CHECK(!r.err.empty());
}

TEST_CASE("experiment smoke run, rerun determinism and output directory") {
  const fs::path dir = scratch("experiment");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli({"experiment", "--config", (kConfigs / "smoke.json").string(), "--out-dir", (dir / "a").string()});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(r.code == 0);
  CHECK(seconds < 10.0);
  CHECK(fs::exists(dir / "a" / "degree.csv"));
  CHECK(fs::exists(dir / "a" / "degree.summary.json"));
  CHECK(fs::exists(dir / "a" / "summary.json"));

  REQUIRE(cli({"--threads", "2", "experiment", "--config", (kConfigs / "smoke.json").string(), "--out-dir",
               (dir / "b").string()})
              .code == 0);
  for (const char* f : {"degree.csv", "degree.summary.json", "summary.json"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));

  ::setenv("KPKVB_OUT_DIR", (dir / "env").string().c_str(), 1);
  REQUIRE(cli({"experiment", "--config", (kConfigs / "smoke.json").string()}).code == 0);
  ::unsetenv("KPKVB_OUT_DIR");
  CHECK(slurp(dir / "env" / "degree.csv") == slurp(dir / "a" / "degree.csv"));
}

TEST_CASE("experiment failures") {
  const fs::path dir = scratch("experiment_bad");
  std::ofstream(dir / "unknown.json") << R"({"kind": "typical-distance"})";
  const auto unknown = cli({"experiment", "--config", (dir / "unknown.json").string(), "--out-dir", dir.string()});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("typical-distance") != std::string::npos);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(cli({"experiment", "--config", (dir / "broken.json").string(), "--out-dir", dir.string()}).code == 2);
  CHECK(cli({"experiment", "--config", (dir / "absent.json").string(), "--out-dir", dir.string()}).code == 2);
  std::ofstream(dir / "zero.json") << R"({"kind": "degree", "replicates": 0})";
  CHECK(cli({"experiment", "--config", (dir / "zero.json").string(), "--out-dir", dir.string()}).code == 2);
  // A criterion that cannot pass: exit 1, files still written.
  std::ofstream(dir / "strict.json")
      << R"({"kind": "degree", "N": 256, "replicates": 1, "tolerances": {"mean_rel": 0.0}})";
  CHECK(cli({"experiment", "--config", (dir / "strict.json").string(), "--out-dir", (dir / "s").string()}).code == 1);
  CHECK(fs::exists(dir / "s" / "degree.csv"));
}

TEST_CASE("verify on generated instances") {
  const auto r = cli({"verify", "--suite", "all", "--n", "2000", "--seeds", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  for (const char* suite : {"box-adjacency", "above-segment", "crossing-edges", "W-oracle", "separating-walk",
                            "path-bound", "dissection-constants"})
    CHECK(r.out.find(std::string("PASS ") + suite) != std::string::npos);
  CHECK(cli({"verify", "--seeds", "0"}).code == 2);
  CHECK(cli({"verify", "--n", "1", "--nu", "3"}).code == 2);
}

TEST_CASE("verify catches the corrupted fixture") {
  const auto r = cli({"verify", "--suite", "boxes", "--in", (kFixtures / "corrupted_idealized.txt").string()});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL box-adjacency") != std::string::npos);
  CHECK(r.out.find("counterexample seed=11") != std::string::npos);
  CHECK(r.out.find("237") != std::string::npos);
  CHECK(r.out.find("reproduce: kpkvb verify") != std::string::npos);

  const fs::path dir = scratch("verify_clean");
  REQUIRE(cli({"generate", "--model", "idealized", "--n", "300", "--seed", "11", "--out", (dir / "g.txt").string()})
              .code == 0);
  CHECK(cli({"verify", "--suite", "all", "--in", (dir / "g.txt").string()}).code == 0);
}
