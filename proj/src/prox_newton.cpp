#include "gsc/prox_newton.hpp"

#include <chrono>
#include <cmath>

#include "gsc/errors.hpp"

namespace gsc {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kMaxGuardHalvings = 60;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// x + tau (z - x) written as a convex combination so that simplex and box
// membership of both endpoints carries over exactly.
Vec blend(const Vec& x, const Vec& z, double tau) {
  if (tau == 1.0) return z;
  return (1.0 - tau) * x + tau * z;
}

double top_eigenvalue_bound(const HessianOperator& h) { return largest_eigenvalue(h, 1e-3, 1000).value * 1.05; }

}  // namespace

CompositeResult minimize_composite(const CompositeProblem& problem, const CompositeOptions& opts) {
  if (!(opts.eps > 0.0)) throw InvalidArgument("eps must be > 0");
  if (!(opts.armijo_c1 > 0.0 && opts.armijo_c1 < 1.0)) throw InvalidArgument("armijo_c1 must lie in (0, 1)");
  const auto start = Clock::now();
  const Model& model = problem.model;
  const ProxSpec& g = problem.g;
  CompositeResult res;
  const GscParams params = model.params(opts.nu_choice);
  require_solver_order(params);
  res.params = params;

  if (problem.x0.size() != model.dim()) throw InvalidArgument("minimize_composite: x0 has the wrong dimension");
  if (auto row = model.domain_violation(problem.x0)) {
    throw DomainError("minimize_composite: x0 outside dom f at row " + std::to_string(*row), static_cast<long>(*row));
  }
  if (!g.feasible(problem.x0)) throw DomainError("minimize_composite: x0 outside dom g");

  Phase2Threshold threshold;
  if (opts.phase2 == Phase2Mode::strict_theorem) threshold = phase2_threshold(params.nu, SolverKind::prox_newton);

  Vec x = problem.x0;
  double fx = model.value(x);
  double gx = g.value(x);
  res.evaluations = 1;
  Vec grad = model.gradient(x);
  res.grad_norm0 = grad.norm();
  Phase phase = Phase::damped;
  double lambda_prev = -1.0;
  double lambda_scale = 1.0;
  Vec z_prev;
  res.status = Status::max_iter;

  for (int k = 0;; ++k) {
    const HessianOperator h = HessianOperator::from_model(model, x, !opts.inner.force_cg);
    SubproblemOptions sub;
    sub.tol = lambda_prev < 0.0 ? opts.inner_tol_cap
                                : std::max(opts.inner_tol_floor, std::min(opts.inner_tol_cap, lambda_prev * lambda_prev));
    sub.max_inner = opts.max_inner;
    sub.linear = h.is_dense() ? LinearMethod::cholesky : LinearMethod::cg;
    if (z_prev.size() == x.size()) sub.warm_start = &z_prev;
    SubproblemResult sr = solve_scaled_prox(h, grad, x, g, sub);
    res.inner_iterations += sr.iterations;
    if (!sr.converged && sr.iterations >= opts.max_inner) {
      throw InexactSubproblem("minimize_composite: subproblem budget exhausted at outer iteration " + std::to_string(k),
                              sr.residual);
    }
    double lambda = local_norm(h, sr.z - x);
    if (k == 0) lambda_scale = std::max(1.0, lambda);
    // A loose inner solve warm-started near x can report a tiny decrement;
    // confirm at eps accuracy before stopping.
    const double confirm_tol = std::max(opts.inner_tol_floor, 0.1 * opts.eps * lambda_scale);
    if (lambda <= opts.eps * lambda_scale && sub.tol > confirm_tol) {
      sub.tol = confirm_tol;
      sr = solve_scaled_prox(h, grad, x, g, sub);
      res.inner_iterations += sr.iterations;
      lambda = local_norm(h, sr.z - x);
    }
    const Vec& z = sr.z;
    const Vec n = z - x;
    res.lambda = lambda;
    if (lambda <= opts.eps * lambda_scale) {
      res.status = Status::converged;
      res.last_step = sr.step;
      break;
    }
    if (k == opts.max_iter) break;

    const double beta = params.m * n.norm();
    const StepSize st = step_size(params.nu, params.m, lambda, beta);

    IterRecord rec;
    rec.k = k;
    rec.f = fx + gx;
    const double s = sr.step > 0.0 ? sr.step : 1.0 / top_eigenvalue_bound(h);
    rec.grad_norm = gradient_mapping_norm(g, x, grad, s);
    rec.lambda = lambda;
    rec.beta = beta;
    rec.d_k = st.d_k;
    rec.tau_floor = st.tau;

    if (phase == Phase::damped && opts.step_rule == StepRule::analytic) {
      if (opts.phase2 == Phase2Mode::heuristic_tau && st.tau >= opts.phase2_tau) {
        phase = Phase::full;
      } else if (opts.phase2 == Phase2Mode::strict_theorem) {
        const double sigma = smallest_eigenvalue(h, opts.inner.eig_tol).value;
        if (threshold.entered(params.m, lambda, sigma)) phase = Phase::full;
      }
    }

    double tau = st.tau;
    bool analytic = false;
    double f_new = 0.0;
    bool f_known = false;
    if (opts.step_rule == StepRule::analytic) {
      analytic = phase == Phase::damped;
      tau = analytic ? st.tau : 1.0;
    } else if (opts.step_rule == StepRule::full) {
      phase = Phase::full;
      tau = 1.0;
    } else {
      // Sufficient decrease on F along n, using the model slope grad^T n + g(z) - g(x).
      const double floor = opts.step_rule == StepRule::backtracking ? 0.0 : st.tau;
      const double slope = grad.dot(n) + g.value(z) - gx;
      tau = 1.0;
      for (int i = 0; i <= 80; ++i) {
        if (floor > 0.0 && tau < floor) {
          tau = floor;
          break;
        }
        const Vec xt = blend(x, z, tau);
        if (model.in_domain(xt)) {
          const double ft = model.value(xt) + g.value(xt);
          ++res.evaluations;
          ++rec.evaluations;
          if (ft <= fx + gx + opts.armijo_c1 * tau * slope) {
            f_new = ft;
            f_known = true;
            break;
          }
        }
        tau *= 0.5;
      }
    }

    Vec x_new = blend(x, z, tau);
    if (!model.in_domain(x_new)) {
      if (tau > st.tau) {
        ++res.phase_fallbacks;
        if (opts.step_rule == StepRule::analytic) phase = Phase::damped;
        tau = st.tau;
        analytic = opts.step_rule == StepRule::analytic;
        x_new = blend(x, z, tau);
      }
      int halvings = 0;
      while (!model.in_domain(x_new) && halvings < kMaxGuardHalvings) {
        tau *= 0.5;
        ++halvings;
        analytic = false;
        x_new = blend(x, z, tau);
      }
      res.domain_guard_halvings += halvings;
      f_known = false;
      if (!model.in_domain(x_new)) {
        res.status = Status::domain_error;
        res.message = "step could not be kept inside dom f";
        break;
      }
    }

    double fx_new, gx_new;
    if (f_known) {
      gx_new = g.value(x_new);
      fx_new = f_new - gx_new;
    } else {
      fx_new = model.value(x_new);
      gx_new = g.value(x_new);
      ++res.evaluations;
      ++rec.evaluations;
    }

    rec.tau = tau;
    rec.analytic = analytic;
    rec.phase = opts.step_rule == StepRule::analytic ? (analytic ? Phase::damped : Phase::full)
                                                     : (tau == 1.0 ? Phase::full : Phase::damped);
    rec.delta = analytic ? descent_estimate(params.nu, lambda, st.d_k, tau) : 0.0;
    rec.cum_time = round_to_millis(elapsed(start));
    res.trace.push_back(rec);
    if (opts.keep_iterates) res.iterates.push_back(x);

    lambda_prev = lambda;
    z_prev = z;
    x = std::move(x_new);
    fx = fx_new;
    gx = gx_new;
    grad = model.gradient(x);
  }

  if (opts.keep_iterates) res.iterates.push_back(x);
  const HessianOperator h = HessianOperator::from_model(model, x, !opts.inner.force_cg);
  const double s = 1.0 / top_eigenvalue_bound(h);
  res.optimality_residual = gradient_mapping_norm(g, x, grad, s);
  res.x = std::move(x);
  res.f = fx + gx;
  res.grad_norm = grad.norm();
  res.iterations = static_cast<int>(res.trace.size());
  res.seconds = elapsed(start);
  return res;
}

}  // namespace gsc
