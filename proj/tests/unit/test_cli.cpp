#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "gsc/bench_io.hpp"

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gsc");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Run r;
  r.code = gsc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string tmp(const std::string& name) {
  const char* dir = std::getenv("GSC_TEST_TMP");
  const std::filesystem::path base = dir != nullptr ? dir : std::filesystem::temp_directory_path().string();
  return (base / ("cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("fit-logistic on a LIBSVM file writes a trace") {
  const std::string data = tmp("a.txt");
  gsc::write_libsvm(gsc::gen_logistic(200, 20, 7), data);
  const std::string trace = tmp("a_trace.csv");
  const Run r = run_cli({"fit-logistic", "--data", data, "--nu", "2", "--gamma", "1e-5", "--eps", "1e-8", "--out", trace});
  CHECK(r.code == gsc::cli::kConverged);
  CHECK(contains(r.out, "status=converged"));
  CHECK(contains(r.out, "train_error="));
  const std::string csv = slurp(trace);
  CHECK(csv.rfind("iter,phase,f,grad_norm,lambda,beta,d_k,tau,cum_time_s\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') > 2);
}

TEST_CASE("portfolio and kernels") {
  const Run p = run_cli({"portfolio", "--synthetic", "n=50,p=10", "--solver", "prox-newton", "--seed", "7"});
  CHECK(p.code == gsc::cli::kConverged);
  CHECK(contains(p.out, "portfolio solver=prox-newton status=converged"));

  const Run k = run_cli({"kernels", "--nu", "2", "--tau", "1"});
  CHECK(k.code == 0);
  CHECK(contains(k.out, "omega_bar_bar = 2.7182818284590451"));
  CHECK(contains(k.out, "omega_bar = 1.7182818284590451"));
  CHECK(contains(k.out, "omega = 0.71828182845904509"));
}

TEST_CASE("other solvers and commands") {
  for (const char* solver : {"bfgs", "fgm", "prox-newton"}) {
    CAPTURE(solver);
    const Run r = run_cli({"fit-logistic", "--synthetic", "n=200,p=20", "--solver", solver});
    CHECK(r.code == 0);
  }
  CHECK(run_cli({"fit-logistic", "--synthetic", "n=200,p=20", "--solver", "prox-newton", "--l1", "0.001"}).code == 0);
  for (const char* solver : {"pg-bb", "fw-ls"}) {
    CAPTURE(solver);
    CHECK(run_cli({"portfolio", "--synthetic", "n=50,p=10", "--solver", solver, "--max-iter", "100000"}).code == 0);
  }
  CHECK(run_cli({"fit-dwd", "--synthetic", "n=200,p=20", "--step", "linesearch"}).code == 0);
  const Run b = run_cli({"bench", "--criteria", "1,2"});
  CHECK(b.code == 0);
  CHECK(contains(b.out, "PASS"));
}

TEST_CASE("usage and data errors exit with 1 and name the flag") {
  const Run fw = run_cli({"fit-logistic", "--synthetic", "n=20,p=5", "--solver", "fw"});
  CHECK(fw.code == gsc::cli::kUsageOrData);
  CHECK(contains(fw.err, "--solver"));

  const Run l1 = run_cli({"fit-logistic", "--synthetic", "n=20,p=5", "--solver", "newton", "--l1", "0.1"});
  CHECK(l1.code == gsc::cli::kUsageOrData);
  CHECK(contains(l1.err, "--l1"));

  CHECK(run_cli({"fit-logistic"}).code == gsc::cli::kUsageOrData);
  CHECK(run_cli({"fit-logistic", "--synthetic", "n=abc"}).code == gsc::cli::kUsageOrData);
  CHECK(run_cli({"fit-logistic", "--data", tmp("missing.txt")}).code == gsc::cli::kUsageOrData);

  const std::string bad = tmp("bad.txt");
  std::ofstream(bad) << "+1 1:1\n-1 2:oops\n";
  const Run parse = run_cli({"fit-logistic", "--data", bad});
  CHECK(parse.code == gsc::cli::kUsageOrData);
  CHECK(contains(parse.err, ":2"));
}

TEST_CASE("iteration budget exhaustion exits with 2") {
  const Run r = run_cli({"fit-logistic", "--synthetic", "n=200,p=20", "--nu", "3", "--max-iter", "2"});
  CHECK(r.code == gsc::cli::kMaxIter);
  CHECK(contains(r.out, "status=max_iter"));
}

TEST_CASE("identical configurations give byte-equal traces") {
  const std::vector<std::vector<std::string>> configs = {
      {"fit-logistic", "--synthetic", "n=200,p=20", "--nu", "3"},
      {"portfolio", "--synthetic", "n=50,p=10", "--solver", "prox-newton"},
      {"fit-dwd", "--synthetic", "n=100,p=10", "--step", "linesearch"},
  };
  int idx = 0;
  for (const auto& base : configs) {
    for (const char* ext : {".csv", ".json"}) {
      std::string paths[2];
      for (int rep = 0; rep < 2; ++rep) {
        paths[rep] = tmp("det" + std::to_string(idx) + "_" + std::to_string(rep) + ext);
        auto args = base;
        args.insert(args.end(), {"--seed", "11", "--deterministic", "--out", paths[rep]});
        REQUIRE(run_cli(args).code == 0);
      }
      const std::string a = slurp(paths[0]);
      CHECK(!a.empty());
      CHECK(a == slurp(paths[1]));
      ++idx;
    }
  }
}
