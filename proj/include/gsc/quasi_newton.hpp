#pragma once

// Quasi-Newton iteration with dense BFGS updates of the Hessian approximation
// and its inverse.

#include "gsc/newton.hpp"

namespace gsc {

struct BfgsState {
  Mat h;  // Hessian approximation
  Mat b;  // its inverse

  static BfgsState scaled_identity(Index p, double scale);
  static BfgsState from_hessian(const Mat& h);
};

struct BfgsUpdate {
  BfgsState state;
  bool applied = false;  // false when the curvature guard rejected (s, y)
};

// H' = H + y y^T / <y, s> - (H s)(H s)^T / <H s, s>, with the matching inverse
// update. Skips when <y, s> <= 1e-12 |y| |s|.
BfgsUpdate bfgs_update(const BfgsState& state, const Vec& s, const Vec& y);

struct QnOptions : SolveOptions {
  // Exact minimization along each direction through Hessian-vector products;
  // intended for quadratic objectives.
  bool exact_line_search = false;
  // Initial Hessian approximation; defaults to |grad f(x0)| / max(1, |x0|) I.
  Mat h0;
  // With the default h0, replace it by (y^T y / s^T y) I before the first
  // update. The gradient-based scale is in the wrong units and overestimates
  // curvature by large factors, which BFGS corrects only slowly.
  bool rescale_first = true;
  bool keep_matrices = false;
};

struct QnResult : SolveResult {
  int skipped_updates = 0;
  double max_secant_residual = 0.0;  // max |H s - y| / |y| over accepted updates
  std::vector<Mat> matrices;         // H_k when keep_matrices
  BfgsState final_state;
};

QnResult minimize_qn(const Model& model, const Vec& x0, const QnOptions& opts);

// |(H_k - H*)(x_k - x*)|*_{x*} / |x_k - x*|_{x*}
double dennis_more_ratio(const Mat& h_k, const Mat& hess_star, const Vec& x_k, const Vec& x_star);

}  // namespace gsc
