#pragma once

// Proximal operators of simple regularizers and the scaled proximal
// subproblem of proximal Newton steps.

#include "gsc/linops.hpp"

namespace gsc {

enum class ProxKind { zero, l1, simplex, box };

struct ProxSpec {
  ProxKind kind = ProxKind::zero;
  double weight = 0.0;  // l1 weight
  Vec lo, hi;           // box bounds

  static ProxSpec zero() { return {}; }
  static ProxSpec l1(double weight);
  static ProxSpec simplex() { return {ProxKind::simplex, 0.0, {}, {}}; }
  static ProxSpec box(Vec lo, Vec hi);

  // g(x); +infinity outside the feasible set of indicator kinds.
  double value(const Vec& x, double feas_tol = 1e-12) const;
  bool feasible(const Vec& x, double tol = 1e-12) const;
};

// argmin_z g(z) + 1/(2 step) |z - u|^2
Vec prox_apply(const ProxSpec& g, const Vec& u, double step);
// Euclidean projection onto {z >= 0, sum z = 1} by sorting.
Vec project_simplex(const Vec& u);

// |(1/s)(x - prox(x - s grad, s))|_2
double gradient_mapping_norm(const ProxSpec& g, const Vec& x, const Vec& grad, double s);

struct SubproblemOptions {
  double tol = 1e-10;
  int max_inner = 200000;
  // Largest eigenvalue of h; estimated by power iteration when <= 0.
  double lipschitz = 0.0;
  // Starting point for the inner solver (defaults to x).
  const Vec* warm_start = nullptr;
  // Method for the g = zero shortcut.
  LinearMethod linear = LinearMethod::cholesky;
};

struct SubproblemResult {
  Vec z;
  double residual = 0.0;
  double step = 0.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

// argmin_z <grad, z - x> + 1/2 (z - x)^T h (z - x) + g(z) by accelerated
// proximal gradient with function-value restart. Does not throw on budget
// exhaustion; check converged.
SubproblemResult solve_scaled_prox(const HessianOperator& h, const Vec& grad, const Vec& x, const ProxSpec& g,
                                   const SubproblemOptions& opts);

// Same, throwing InexactSubproblem when the budget runs out.
Vec scaled_prox_subproblem(const HessianOperator& h, const Vec& grad, const Vec& x, const ProxSpec& g, double tol,
                           int max_inner);

}  // namespace gsc
