#pragma once

// Damped-step and two-phase Newton for unconstrained GSC minimization, plus the
// Armijo linesearch that uses the analytic step as a floor.

#include <string>
#include <vector>

#include "gsc/linops.hpp"

namespace gsc {

enum class StepRule {
  analytic,          // closed-form damped step
  linesearch_floor,  // Armijo backtracking from 1, never below the analytic step
  backtracking,      // plain Armijo backtracking from 1
  full,              // tau = 1 (domain guard only)
  automatic,         // linesearch_floor
};

enum class Phase2Mode { heuristic_tau, strict_theorem, off };
enum class Phase { damped, full };
enum class Status { converged, max_iter, domain_error };

struct InnerOptions {
  // Cholesky when the dense Hessian is served, CG otherwise.
  bool force_cg = false;
  double cg_tol = 1e-10;
  int cg_max_iter = 0;  // 0: 10 * p + 100
  double eig_tol = 1e-8;
};

struct SolveOptions {
  NuChoice nu_choice = NuChoice::native;
  StepRule step_rule = StepRule::analytic;
  double eps = 1e-8;
  int max_iter = 500;
  Phase2Mode phase2 = Phase2Mode::heuristic_tau;
  double phase2_tau = 0.9;
  double armijo_c1 = 1e-6;
  InnerOptions inner;
  // Keep every iterate x^k in the result.
  bool keep_iterates = false;
};

struct IterRecord {
  int k = 0;
  Phase phase = Phase::damped;
  double f = 0.0;
  double grad_norm = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  double d_k = 0.0;
  double tau = 1.0;
  double cum_time = 0.0;
  // Diagnostics not written to trace files.
  double delta = 0.0;       // guaranteed decrease for analytic steps, 0 otherwise
  double tau_floor = 0.0;   // analytic step when a linesearch is used
  int evaluations = 0;      // objective evaluations spent in this iteration
  bool analytic = false;    // tau is the untouched analytic step
};

struct SolveResult {
  Vec x;
  std::vector<IterRecord> trace;
  Status status = Status::max_iter;
  GscParams params;
  double f = 0.0;
  double grad_norm = 0.0;
  double grad_norm0 = 0.0;
  double lambda = 0.0;   // decrement at the returned point
  int iterations = 0;
  long evaluations = 0;  // objective evaluations over the run
  int domain_guard_halvings = 0;
  int phase_fallbacks = 0;
  double seconds = 0.0;
  std::vector<Vec> iterates;
  std::string message;

  // |grad f| <= eps max(1, |grad f(x0)|)
  bool gradient_criterion(double eps) const;
  // All decrements including the terminal one.
  std::vector<double> lambdas() const;
};

const char* to_string(Status s);
const char* to_string(Phase p);

SolveResult minimize(const Model& model, const Vec& x0, const SolveOptions& opts);

struct ExistenceCheck {
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string note;
};
// Sufficient condition for a unique minimizer, evaluated at x. Diagnostic only.
ExistenceCheck existence_check(const Model& model, const Vec& x, NuChoice choice = NuChoice::native);

struct LinesearchResult {
  double tau = 1.0;
  int evaluations = 0;
  bool hit_floor = false;
  // f at the accepted point when it was evaluated.
  double f_new = 0.0;
  bool f_known = false;
};

// Halves tau from 1 until the Armijo test with c1 holds; returns tau_floor when
// the next trial would go below it. Points outside the domain fail the test.
LinesearchResult linesearch_step(const Model& model, const Vec& x, const Vec& n, double tau_floor, double c1,
                                 double f0, double slope);
// Convenience overload evaluating f(x) and the slope itself.
double linesearch_step(const Model& model, const Vec& x, const Vec& n, double tau_floor, double c1);

// Wall clock helper shared by solvers.
double round_to_millis(double seconds);

}  // namespace gsc
