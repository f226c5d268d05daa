#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

#include "gsc/bench_io.hpp"
#include "gsc/errors.hpp"

namespace gsc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

IterRecord baseline_record(int k, double f, double grad_norm, double tau, Clock::time_point start) {
  IterRecord r;
  r.k = k;
  r.f = f;
  r.grad_norm = grad_norm;
  r.tau = tau;
  r.phase = Phase::damped;
  r.cum_time = round_to_millis(elapsed(start));
  return r;
}

void require_constraint(const ProxSpec& g, const char* who) {
  if (g.kind != ProxKind::simplex && g.kind != ProxKind::box) {
    throw InvalidArgument(std::string(who) + ": requires a simplex or box constraint");
  }
}

void finish(SolveResult& res, const Vec& x, double f, double residual, Clock::time_point start) {
  res.x = x;
  res.f = f;
  res.grad_norm = residual;
  res.iterations = static_cast<int>(res.trace.size());
  res.seconds = elapsed(start);
}

}  // namespace

SolveResult fast_gradient(const Model& model, const Vec& x0, double mu, double lipschitz, double eps,
                          const BaselineOptions& opts) {
  if (!(mu > 0.0) || !(lipschitz >= mu) || !std::isfinite(lipschitz)) {
    throw InvalidArgument("fast_gradient: needs 0 < mu <= L < inf");
  }
  if (!(eps > 0.0)) throw InvalidArgument("eps must be > 0");
  if (!model.in_domain(x0)) throw DomainError("fast_gradient: x0 outside the domain");
  const auto start = Clock::now();
  SolveResult res;
  const double step = 1.0 / lipschitz;
  const double sl = std::sqrt(lipschitz);
  const double sm = std::sqrt(mu);
  const double momentum = (sl - sm) / (sl + sm);

  Vec x = x0;
  Vec y = x0;
  Vec gx = model.gradient(x);
  double f = model.value(x);
  res.evaluations = 1;
  res.grad_norm0 = gx.norm();
  const double stop = eps * std::max(1.0, res.grad_norm0);
  res.status = Status::max_iter;
  for (int k = 0;; ++k) {
    const double gn = gx.norm();
    if (gn <= stop) {
      res.status = Status::converged;
      break;
    }
    if (k == opts.max_iter) break;
    res.trace.push_back(baseline_record(k, f, gn, step, start));
    const Vec gy = k == 0 ? gx : model.gradient(y);
    Vec x_new = y - step * gy;
    if (!model.in_domain(x_new)) {
      res.status = Status::domain_error;
      res.message = "fast_gradient left the domain";
      break;
    }
    y = x_new + momentum * (x_new - x);
    x = std::move(x_new);
    gx = model.gradient(x);
    f = model.value(x);
    ++res.evaluations;
  }
  finish(res, x, f, gx.norm(), start);
  return res;
}

SolveResult fast_gradient(const Model& model, const Vec& x0, double eps, const BaselineOptions& opts) {
  const auto mu = model.strong_convexity();
  const auto l = model.lipschitz_gradient();
  if (!mu || !l) throw InvalidArgument("fast_gradient: model exposes no strong convexity or Lipschitz estimate");
  return fast_gradient(model, x0, *mu, *l, eps, opts);
}

SolveResult pg_bb(const CompositeProblem& problem, double eps, const BaselineOptions& opts) {
  require_constraint(problem.g, "pg_bb");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be > 0");
  const Model& model = problem.model;
  const auto start = Clock::now();
  SolveResult res;
  constexpr std::size_t kMemory = 10;
  constexpr double kC1 = 1e-4;

  Vec x = prox_apply(problem.g, problem.x0, 1.0);
  if (!model.in_domain(x)) throw DomainError("pg_bb: projected x0 outside dom f");
  double f = model.value(x);
  Vec grad = model.gradient(x);
  res.evaluations = 1;
  res.grad_norm0 = grad.norm();
  std::deque<double> recent{f};
  double step = 1.0 / std::max(1e-12, grad.lpNorm<Eigen::Infinity>());
  res.status = Status::max_iter;

  for (int k = 0;; ++k) {
    const double residual = (x - prox_apply(problem.g, x - grad, 1.0)).norm();
    if (residual <= eps) {
      res.status = Status::converged;
      break;
    }
    if (k == opts.max_iter) break;
    IterRecord rec = baseline_record(k, f, residual, step, start);

    const Vec d = prox_apply(problem.g, x - step * grad, step) - x;
    const double slope = grad.dot(d);
    const double ref = *std::max_element(recent.begin(), recent.end());
    double t = 1.0;
    Vec x_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int i = 0; i < 60; ++i) {
      x_new = x + t * d;
      if (model.in_domain(x_new)) {
        f_new = model.value(x_new);
        ++res.evaluations;
        ++rec.evaluations;
        if (f_new <= ref + kC1 * t * slope) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      // Direction too small to register a decrease in floating point.
      res.message = "pg_bb: linesearch stalled";
      break;
    }
    rec.tau = t * step;
    res.trace.push_back(rec);

    const Vec grad_new = model.gradient(x_new);
    const Vec s = x_new - x;
    const Vec y = grad_new - grad;
    const double sy = s.dot(y);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : std::min(1e12, step * 2.0);
    x = x_new;
    f = f_new;
    grad = grad_new;
    recent.push_back(f);
    if (recent.size() > kMemory) recent.pop_front();
  }
  finish(res, x, f, (x - prox_apply(problem.g, x - grad, 1.0)).norm(), start);
  return res;
}

SolveResult frank_wolfe(const CompositeProblem& problem, double eps, bool linesearch, const BaselineOptions& opts) {
  require_constraint(problem.g, "frank_wolfe");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be > 0");
  const Model& model = problem.model;
  const ProxSpec& g = problem.g;
  const auto start = Clock::now();
  SolveResult res;
  const Index p = model.dim();

  Vec x = prox_apply(g, problem.x0, 1.0);
  if (!model.in_domain(x)) throw DomainError("frank_wolfe: projected x0 outside dom f");
  double f = model.value(x);
  Vec grad = model.gradient(x);
  res.evaluations = 1;
  res.grad_norm0 = grad.norm();
  res.status = Status::max_iter;
  double gap = 0.0;

  for (int k = 0;; ++k) {
    // Linear minimization oracle.
    Vec vertex(p);
    if (g.kind == ProxKind::simplex) {
      Index i = 0;
      grad.minCoeff(&i);
      vertex.setZero();
      vertex(i) = 1.0;
    } else {
      for (Index j = 0; j < p; ++j) vertex(j) = grad(j) > 0.0 ? g.lo(j) : g.hi(j);
    }
    const Vec d = vertex - x;
    gap = -grad.dot(d);
    if (gap <= eps) {
      res.status = Status::converged;
      break;
    }
    if (k == opts.max_iter) break;
    IterRecord rec = baseline_record(k, f, gap, 0.0, start);

    double tau = 2.0 / (k + 2.0);
    if (linesearch) {
      // Bisection on t -> grad f(x + t d)^T d over [0, 1]; points outside the
      // domain count as past the minimizer.
      double lo = 0.0;
      double hi = 1.0;
      const Vec x1 = x + d;
      if (model.in_domain(x1) && model.gradient(x1).dot(d) <= 0.0) {
        lo = 1.0;
      } else {
        for (int i = 0; i < 60; ++i) {
          const double mid = 0.5 * (lo + hi);
          const Vec xm = x + mid * d;
          if (model.in_domain(xm) && model.gradient(xm).dot(d) < 0.0) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
      }
      tau = lo;
      if (tau == 0.0) {
        res.message = "frank_wolfe: no progress along the vertex direction";
        break;
      }
    }
    Vec x_new = (1.0 - tau) * x + tau * vertex;
    int guard = 0;
    while (!model.in_domain(x_new) && guard < 60) {
      tau *= 0.5;
      ++guard;
      x_new = (1.0 - tau) * x + tau * vertex;
    }
    if (!model.in_domain(x_new)) {
      res.status = Status::domain_error;
      res.message = "frank_wolfe left the domain";
      break;
    }
    rec.tau = tau;
    rec.phase = tau == 1.0 ? Phase::full : Phase::damped;
    res.trace.push_back(rec);
    x = std::move(x_new);
    f = model.value(x);
    ++res.evaluations;
    grad = model.gradient(x);
  }
  finish(res, x, f, gap, start);
  return res;
}

}  // namespace gsc
