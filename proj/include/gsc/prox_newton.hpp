#pragma once

// Damped and full-step proximal Newton for F = f + g with f GSC and g simple.

#include "gsc/newton.hpp"
#include "gsc/prox.hpp"

namespace gsc {

struct CompositeProblem {
  const Model& model;
  ProxSpec g;
  Vec x0;

  double objective(const Vec& x) const { return model.value(x) + g.value(x); }
};

struct CompositeOptions : SolveOptions {
  int max_inner = 200000;
  double inner_tol_cap = 0.1;
  double inner_tol_floor = 1e-12;
};

struct CompositeResult : SolveResult {
  // Gradient-mapping norm at the returned point with step 1/L_h.
  double optimality_residual = 0.0;
  double last_step = 0.0;
  long inner_iterations = 0;
};

CompositeResult minimize_composite(const CompositeProblem& problem, const CompositeOptions& opts);

}  // namespace gsc
