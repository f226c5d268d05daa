#pragma once

// Scalar functions and parameter calculus for generalized self-concordant
// (GSC) functions: the omega family used by the local bounds, the analytic
// Newton step size, and the quadratic-convergence thresholds.

#include <utility>
#include <vector>

namespace gsc {

// (M, nu) pair certifying |<D^3 f(x)[v]u, u>| <= M |u|_x^2 |v|_x^{nu-2} |v|_2^{3-nu}.
struct GscParams {
  double m = 0.0;
  double nu = 3.0;
};

void validate(const GscParams& p);
// Solver entry points only accept nu in [2, 3].
void require_solver_order(const GscParams& p);

// omega_bar_bar: exp(tau) for nu = 2, (1 - tau)^(-2/(nu-2)) for nu > 2.
double omega_bar_bar(double nu, double tau);
// omega_bar: the mean of omega_bar_bar over [0, tau].
double omega_bar(double nu, double tau);
// omega: the weighted mean of omega_bar_bar giving the function-value bounds.
double omega(double nu, double tau);

struct KappaBounds {
  double lower;
  double upper;
};
// Lower and upper factors bounding the mean Hessian along a segment with
// GSC distance t >= 0.
KappaBounds kappa_bounds(double nu, double t);

// Quadratic-region contraction factor, nu in [2, 3], t in [0, 1).
double r_nu(double nu, double t);

// GSC distance between two points given their l2 distance and local distance.
double d_nu(double nu, double m, double dist2, double distx);

struct StepSize {
  double tau = 1.0;
  double d_k = 0.0;
  // lambda <= 0: the caller is already at a stationary point.
  bool converged = false;
};
// Analytic damped-Newton step from the decrement lambda and beta = M |n|_2.
StepSize step_size(double nu, double m, double lambda, double beta);

// Guaranteed decrease lambda^2 tau - omega(tau d) tau^2 lambda^2.
double descent_estimate(double nu, double lambda, double d_k, double tau);

struct WeightedParams {
  GscParams params;
  double weight;
};
GscParams combine_sum(const std::vector<WeightedParams>& parts);
GscParams transform_affine(const GscParams& p, double op_norm_a, double lam_min_ata);

enum class ReparamMode { strong_convexity, lipschitz_gradient };
GscParams reparam(const GscParams& p, ReparamMode mode, double constant);

GscParams conjugate_params(const GscParams& p, int dim);

enum class SolverKind { newton, prox_newton };

// Constants printed for the two-phase analysis. The solvers use these.
inline constexpr double kNewtonDStar2 = 0.12964;
inline constexpr double kProxDStar2 = 0.35482;
inline constexpr double kProxDStar3 = 0.20943;

enum class Phase2Rule {
  // sigma^(-1/2) lambda < d_star / M
  order2,
  // sigma^(-(3-nu)/2) lambda < min(2 d_star / (nu - 2), 1/2) / M
  intermediate,
  // lambda < radius / M, radius = 1/2 (newton) or 2 d_star (prox_newton)
  order3,
};

struct Phase2Threshold {
  double nu = 3.0;
  SolverKind solver = SolverKind::newton;
  Phase2Rule rule = Phase2Rule::order3;
  // Constant used by the solver.
  double d_star = 0.0;
  // Bisection root of the defining equation. For (nu = 2, prox_newton) this
  // differs from d_star and is exposed for inspection only.
  double computed_root = 0.0;
  // Right-hand side of the entry rule before dividing by M.
  double radius = 0.0;

  // Whether an iterate with decrement lambda and smallest Hessian eigenvalue
  // sigma lies in the quadratic-convergence region.
  bool entered(double m, double lambda, double sigma_min) const;
};

Phase2Threshold phase2_threshold(double nu, SolverKind solver);

// Monotone bisection on [lo, hi] for f(x) = 0 with f(lo) < 0 < f(hi).
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace detail {
// Branch evaluators exposed for tests of the series/closed-form switch.
double omega_series(double nu, double tau);
double omega_closed(double nu, double tau);
double r_nu_series(double nu, double t);
double r_nu_closed(double nu, double t);
// |tau| below which omega uses its power series.
double omega_switch(double nu);
double r_nu_switch(double nu);
}  // namespace detail

}  // namespace gsc
