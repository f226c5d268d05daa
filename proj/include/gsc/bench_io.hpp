#pragma once

// Data ingestion, synthetic generators, first-order baselines and trace files.
//
// Random streams come from std::mt19937_64 seeded with the user seed. Uniform
// draws take the top 53 bits, u = ((x >> 11) + 0.5) 2^-53, so they never hit 0
// or 1. Gaussian draws use Box-Muller on consecutive uniform pairs and return
// both outputs (cos branch first).

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gsc/prox_newton.hpp"

namespace gsc {

struct DatasetMeta {
  std::string name;
  Index n = 0;
  Index p = 0;
  bool normalized = false;
};

struct Dataset {
  SpMat a;
  Vec labels;
  DatasetMeta meta;
  std::vector<std::string> warnings;
};

// LIBSVM text: "label idx:val ...", 1-based ascending indices. Binary label
// sets are mapped to {-1, +1} (smaller value to -1). min_cols widens p when
// trailing features never occur.
Dataset read_libsvm(const std::string& path, bool normalize, Index min_cols = 0);
Dataset parse_libsvm(const std::string& text, bool normalize, const std::string& name = "<memory>",
                     Index min_cols = 0);
// Values written with 17 significant digits so a read-back is exact.
void write_libsvm(const Dataset& data, const std::string& path);
std::string format_libsvm(const Dataset& data);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// Entries max(1e-3, 1 + 0.1 z), z standard normal, row-major fill order.
Mat gen_portfolio(Index n, Index p, std::uint64_t seed);

// Gaussian rows scaled to unit norm, a planted w* ~ N(0, I) and labels drawn
// as Bernoulli(sigmoid(2 a_i^T w*)) mapped to {-1, +1}.
Dataset gen_logistic(Index n, Index p, std::uint64_t seed);

// Regularized logistic loss 1/n sum log(1 + exp(-y_i a_i^T x)) + gamma/2 |x|^2.
GlmModel logistic_model(const Dataset& data, double gamma);
// DWD instance from a labelled dataset with the default weights c_i = 1/n.
DwdModel dwd_model(const Dataset& data, double q, double gamma1, double gamma2, double gamma3);

// 1/(2n) sum (1 - sign(y_i a_i^T w)).
double training_error(const SpMat& a, const Vec& labels, const Vec& w);

// Baselines. Their traces share the IterRecord schema with lambda, beta and
// d_k left at 0; grad_norm holds the (projected) gradient-mapping norm.
struct BaselineOptions {
  int max_iter = 100000;
};

// Constant-step accelerated gradient for mu-strongly convex, L-smooth f.
// Stops at |grad f| <= eps max(1, |grad f(x0)|), the Newton rule.
SolveResult fast_gradient(const Model& model, const Vec& x0, double mu, double lipschitz, double eps,
                          const BaselineOptions& opts = {});
// Overload that takes mu and L from the model; throws InvalidArgument if
// either is missing.
SolveResult fast_gradient(const Model& model, const Vec& x0, double eps, const BaselineOptions& opts = {});

// Projected gradient with Barzilai-Borwein steps and a nonmonotone safeguard.
// Stops when the gradient-mapping norm at step 1 is <= eps.
SolveResult pg_bb(const CompositeProblem& problem, double eps, const BaselineOptions& opts = {});

// Frank-Wolfe over the simplex (vertex oracle) or a box. With linesearch the
// step minimizes f along the segment by bisection on the directional
// derivative; otherwise tau = 2 / (k + 2). Stops when the duality gap <= eps.
SolveResult frank_wolfe(const CompositeProblem& problem, double eps, bool linesearch, const BaselineOptions& opts = {});

enum class TraceFormat { csv, json };

// CSV columns: iter,phase,f,grad_norm,lambda,beta,d_k,tau,cum_time_s. Floats
// use 17 significant digits. With include_timing false the time column is 0.
std::string format_trace(const std::vector<IterRecord>& trace, TraceFormat format, bool include_timing = true);
void write_trace(const std::vector<IterRecord>& trace, const std::string& path, TraceFormat format,
                 bool include_timing = true);
std::vector<IterRecord> parse_trace_json(const std::string& text);
std::vector<IterRecord> read_trace_json(const std::string& path);
std::vector<IterRecord> parse_trace_csv(const std::string& text);

TraceFormat trace_format_from_path(const std::string& path);

}  // namespace gsc
