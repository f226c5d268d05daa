#pragma once

// Command-line front end: flag parsing, validation and the solve drivers.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gsc::cli {

enum ExitCode : int {
  kConverged = 0,
  kUsageOrData = 1,
  kMaxIter = 2,
  kBenchFailed = 3,
};

struct Synthetic {
  long n = 0;
  long p = 0;
};

struct RunConfig {
  std::string command;  // fit-logistic, fit-dwd, portfolio, bench, kernels
  std::string data;
  std::optional<Synthetic> synthetic;
  std::string nu = "native";
  std::string step = "analytic";
  std::string solver;
  double gamma = 1e-5;
  std::vector<double> gammas{1e-5, 1e-5, 1e-7};
  double l1 = 0.0;
  double q = 1.0;
  double eps = 1e-8;
  int max_iter = 500;
  std::uint64_t seed = 7;
  std::string out;
  bool deterministic = false;
  bool normalize = true;
  int threads = 0;  // 0: GSC_SOLVE_THREADS or 1
  double nu_value = 2.0;  // kernels
  double tau = 1.0;       // kernels
  std::vector<int> criteria;  // bench

  // Which flags were given explicitly.
  bool step_given = false;
  bool nu_given = false;
};

// "n=200,p=20"
Synthetic parse_synthetic(const std::string& text);

// Rejects flag combinations that cannot run; the message names the flag.
// Returns an empty string when the configuration is valid.
std::string validate(const RunConfig& cfg);

// Parses argv, validates, runs. Summary and tables go to out, diagnostics to err.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace gsc::cli
