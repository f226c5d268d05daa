#include "gsc/newton.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "gsc/errors.hpp"

namespace gsc {

namespace {

constexpr int kMaxGuardHalvings = 60;

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void validate_options(const SolveOptions& opts) {
  if (!(opts.eps > 0.0)) throw InvalidArgument("eps must be > 0");
  if (!(opts.armijo_c1 > 0.0 && opts.armijo_c1 < 1.0)) throw InvalidArgument("armijo_c1 must lie in (0, 1)");
  if (opts.max_iter < 0) throw InvalidArgument("max_iter must be >= 0");
  if (!(opts.phase2_tau > 0.0 && opts.phase2_tau <= 1.0)) throw InvalidArgument("phase2_tau must lie in (0, 1]");
}

}  // namespace

double round_to_millis(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

const char* to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::max_iter: return "max_iter";
    case Status::domain_error: return "domain_error";
  }
  return "unknown";
}

const char* to_string(Phase p) { return p == Phase::full ? "full" : "damped"; }

bool SolveResult::gradient_criterion(double eps) const {
  return grad_norm <= eps * std::max(1.0, grad_norm0);
}

std::vector<double> SolveResult::lambdas() const {
  std::vector<double> out;
  out.reserve(trace.size() + 1);
  for (const auto& r : trace) out.push_back(r.lambda);
  out.push_back(lambda);
  return out;
}

LinesearchResult linesearch_step(const Model& model, const Vec& x, const Vec& n, double tau_floor, double c1,
                                 double f0, double slope) {
  LinesearchResult out;
  double tau = 1.0;
  for (int i = 0; i <= 80; ++i) {
    if (tau_floor > 0.0 && tau < tau_floor) {
      out.tau = tau_floor;
      out.hit_floor = true;
      return out;
    }
    const Vec xt = x + tau * n;
    if (model.in_domain(xt)) {
      const double ft = model.value(xt);
      ++out.evaluations;
      if (ft <= f0 + c1 * tau * slope) {
        out.tau = tau;
        out.f_new = ft;
        out.f_known = true;
        return out;
      }
    }
    tau *= 0.5;
  }
  out.tau = tau_floor > 0.0 ? tau_floor : tau;
  out.hit_floor = tau_floor > 0.0;
  return out;
}

double linesearch_step(const Model& model, const Vec& x, const Vec& n, double tau_floor, double c1) {
  if (!(tau_floor > 0.0 && tau_floor <= 1.0)) throw InvalidArgument("linesearch_step: tau_floor must lie in (0, 1]");
  const double f0 = model.value(x);
  const double slope = model.gradient(x).dot(n);
  return linesearch_step(model, x, n, tau_floor, c1, f0, slope).tau;
}

SolveResult minimize(const Model& model, const Vec& x0, const SolveOptions& opts) {
  validate_options(opts);
  const auto start = Clock::now();
  SolveResult res;
  const GscParams params = model.params(opts.nu_choice);
  require_solver_order(params);
  res.params = params;
  if (x0.size() != model.dim()) throw InvalidArgument("minimize: x0 has the wrong dimension");
  if (auto row = model.domain_violation(x0)) {
    throw DomainError("minimize: x0 outside the domain at row " + std::to_string(*row), static_cast<long>(*row));
  }

  const Index p = model.dim();
  const int cg_max = opts.inner.cg_max_iter > 0 ? opts.inner.cg_max_iter : static_cast<int>(10 * p + 100);
  Phase2Threshold threshold;
  if (opts.phase2 == Phase2Mode::strict_theorem) threshold = phase2_threshold(params.nu, SolverKind::newton);

  Vec x = x0;
  double f = model.value(x);
  res.evaluations = 1;
  Vec g = model.gradient(x);
  res.grad_norm0 = g.norm();
  Phase phase = Phase::damped;
  Vec warm;
  double lambda_scale = 1.0;
  res.status = Status::max_iter;

  for (int k = 0;; ++k) {
    const HessianOperator h = HessianOperator::from_model(model, x, !opts.inner.force_cg);
    const LinearMethod method = h.is_dense() ? LinearMethod::cholesky : LinearMethod::cg;
    const NewtonDirection dir =
        newton_direction(h, g, method, opts.inner.cg_tol, cg_max, warm.size() == p ? &warm : nullptr);
    const double lambda = dir.lambda;
    res.lambda = lambda;
    if (k == 0) lambda_scale = std::max(1.0, lambda);
    if (lambda <= opts.eps * lambda_scale) {
      res.status = Status::converged;
      break;
    }
    if (k == opts.max_iter) break;

    const Vec& n = dir.n;
    const double beta = params.m * n.norm();
    const StepSize st = step_size(params.nu, params.m, lambda, beta);

    IterRecord rec;
    rec.k = k;
    rec.f = f;
    rec.grad_norm = g.norm();
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

    LinesearchResult ls;
    double tau = st.tau;
    bool analytic = false;
    switch (opts.step_rule) {
      case StepRule::analytic:
        analytic = phase == Phase::damped;
        tau = analytic ? st.tau : 1.0;
        break;
      case StepRule::full:
        phase = Phase::full;
        tau = 1.0;
        break;
      case StepRule::linesearch_floor:
      case StepRule::automatic:
        ls = linesearch_step(model, x, n, st.tau, opts.armijo_c1, f, g.dot(n));
        tau = ls.tau;
        break;
      case StepRule::backtracking:
        ls = linesearch_step(model, x, n, 0.0, opts.armijo_c1, f, g.dot(n));
        tau = ls.tau;
        break;
    }
    res.evaluations += ls.evaluations;
    rec.evaluations = ls.evaluations;

    Vec x_new = x + tau * n;
    if (!model.in_domain(x_new)) {
      if (tau > st.tau) {
        // Full step left the domain: fall back to the damped step.
        ++res.phase_fallbacks;
        if (opts.step_rule == StepRule::analytic) phase = Phase::damped;
        tau = st.tau;
        analytic = opts.step_rule == StepRule::analytic;
        ls.f_known = false;
        x_new = x + tau * n;
      }
      int halvings = 0;
      while (!model.in_domain(x_new) && halvings < kMaxGuardHalvings) {
        tau *= 0.5;
        ++halvings;
        analytic = false;
        ls.f_known = false;
        x_new = x + tau * n;
      }
      res.domain_guard_halvings += halvings;
      if (!model.in_domain(x_new)) {
        res.status = Status::domain_error;
        res.message = "step could not be kept inside the domain";
        break;
      }
    }

    double f_new;
    if (ls.f_known && tau == ls.tau) {
      f_new = ls.f_new;
    } else {
      f_new = model.value(x_new);
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

    warm = n;
    x = std::move(x_new);
    f = f_new;
    g = model.gradient(x);
  }

  if (opts.keep_iterates) res.iterates.push_back(x);
  res.x = std::move(x);
  res.f = f;
  res.grad_norm = g.norm();
  res.iterations = static_cast<int>(res.trace.size());
  res.seconds = elapsed(start);
  return res;
}

ExistenceCheck existence_check(const Model& model, const Vec& x, NuChoice choice) {
  ExistenceCheck out;
  const GscParams params = model.params(choice);
  try {
    const HessianOperator h = HessianOperator::from_model(model, x);
    const Vec g = model.gradient(x);
    const LinearMethod method = h.is_dense() ? LinearMethod::cholesky : LinearMethod::cg;
    out.lhs = newton_direction(h, g, method, 1e-12, static_cast<int>(10 * model.dim() + 100)).lambda;
    if (params.m == 0.0) {
      out.rhs = std::numeric_limits<double>::infinity();
    } else {
      const double sigma = smallest_eigenvalue(h, 1e-10).value;
      out.rhs = 2.0 * std::pow(sigma, (3.0 - params.nu) / 2.0) / ((4.0 - params.nu) * params.m);
    }
    out.satisfied = out.lhs < out.rhs;
  } catch (const NotPositiveDefinite& e) {
    out.satisfied = false;
    out.note = e.what();
  }
  return out;
}

}  // namespace gsc
