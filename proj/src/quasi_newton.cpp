#include "gsc/quasi_newton.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "gsc/errors.hpp"

namespace gsc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void symmetrize(Mat& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

BfgsState BfgsState::scaled_identity(Index p, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("BfgsState: scale must be > 0");
  return {scale * Mat::Identity(p, p), Mat::Identity(p, p) / scale};
}

BfgsState BfgsState::from_hessian(const Mat& h) {
  Eigen::LLT<Mat> llt(h);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("BfgsState: initial matrix is not positive definite");
  Mat b = llt.solve(Mat::Identity(h.rows(), h.cols()));
  symmetrize(b);
  return {h, b};
}

BfgsUpdate bfgs_update(const BfgsState& state, const Vec& s, const Vec& y) {
  BfgsUpdate out;
  const double ys = y.dot(s);
  if (!(ys > 1e-12 * y.norm() * s.norm())) {
    out.state = state;
    return out;
  }
  const Vec hs = state.h * s;
  const double shs = s.dot(hs);
  if (!(shs > 0.0)) {
    out.state = state;
    return out;
  }
  const double rho = 1.0 / ys;
  Mat h = state.h + (y * y.transpose()) * rho - (hs * hs.transpose()) / shs;
  const Vec by = state.b * y;
  const double yby = y.dot(by);
  Mat b = state.b - rho * (s * by.transpose() + by * s.transpose()) + (rho * rho * yby + rho) * (s * s.transpose());
  symmetrize(h);
  symmetrize(b);
  out.state = {std::move(h), std::move(b)};
  out.applied = true;
  return out;
}

QnResult minimize_qn(const Model& model, const Vec& x0, const QnOptions& opts) {
  if (!(opts.eps > 0.0)) throw InvalidArgument("eps must be > 0");
  if (!(opts.armijo_c1 > 0.0 && opts.armijo_c1 < 1.0)) throw InvalidArgument("armijo_c1 must lie in (0, 1)");
  const auto start = Clock::now();
  QnResult res;
  const GscParams params = model.params(opts.nu_choice);
  require_solver_order(params);
  res.params = params;
  const Index p = model.dim();
  if (x0.size() != p) throw InvalidArgument("minimize_qn: x0 has the wrong dimension");
  if (auto row = model.domain_violation(x0)) {
    throw DomainError("minimize_qn: x0 outside the domain at row " + std::to_string(*row), static_cast<long>(*row));
  }

  Vec x = x0;
  double f = model.value(x);
  res.evaluations = 1;
  Vec g = model.gradient(x);
  res.grad_norm0 = g.norm();
  const double stop = opts.eps * std::max(1.0, res.grad_norm0);

  BfgsState state;
  if (opts.h0.size() > 0) {
    if (opts.h0.rows() != p || opts.h0.cols() != p) throw InvalidArgument("minimize_qn: h0 has the wrong shape");
    state = BfgsState::from_hessian(opts.h0);
  } else {
    double scale = res.grad_norm0 / std::max(1.0, x0.norm());
    if (!(scale > 0.0)) scale = 1.0;
    state = BfgsState::scaled_identity(p, scale);
  }
  res.status = Status::max_iter;

  for (int k = 0;; ++k) {
    if (opts.keep_matrices) res.matrices.push_back(state.h);
    const double gnorm = g.norm();
    const Vec d = -(state.b * g);
    const double lam = std::sqrt(std::max(0.0, -g.dot(d)));
    res.lambda = lam;
    if (gnorm <= stop) {
      res.status = Status::converged;
      break;
    }
    if (k == opts.max_iter) break;

    const double beta = params.m * d.norm();
    const StepSize st = step_size(params.nu, params.m, lam, beta);
    const double slope = g.dot(d);

    IterRecord rec;
    rec.k = k;
    rec.f = f;
    rec.grad_norm = gnorm;
    rec.lambda = lam;
    rec.beta = beta;
    rec.d_k = st.d_k;
    rec.tau_floor = st.tau;

    double tau = 1.0;
    double f_new = f;
    bool accepted = false;
    if (opts.exact_line_search) {
      const double curv = d.dot(model.hvp(x, d));
      if (!(curv > 0.0)) throw NotPositiveDefinite("minimize_qn: nonpositive curvature along the direction");
      tau = -slope / curv;
      const Vec xt = x + tau * d;
      if (model.in_domain(xt)) {
        f_new = model.value(xt);
        ++rec.evaluations;
        accepted = true;
      }
    } else {
      // Armijo from min(1, 2 tau_a). Below the analytic step only a strict
      // decrease is required; the surrogate decrement does not certify descent.
      // The slack of a few ulps of f keeps rounding noise near the optimum from
      // rejecting every trial.
      const double noise = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
      tau = std::min(1.0, 2.0 * st.tau);
      for (int i = 0; i < 120; ++i) {
        const bool below_floor = tau < st.tau;
        if (below_floor && i > 0 && tau * 2.0 > st.tau) tau = st.tau;
        const Vec xt = x + tau * d;
        if (model.in_domain(xt)) {
          const double ft = model.value(xt);
          ++rec.evaluations;
          const bool armijo = ft <= f + opts.armijo_c1 * tau * slope + noise;
          if (armijo || (tau <= st.tau && ft < f)) {
            f_new = ft;
            accepted = true;
            break;
          }
        }
        tau *= 0.5;
      }
    }
    res.evaluations += rec.evaluations;
    if (!accepted) {
      res.status = Status::domain_error;
      res.message = "no acceptable step along the quasi-Newton direction";
      break;
    }

    const Vec x_new = x + tau * d;
    const Vec s = x_new - x;
    if (s.norm() <= 1e-15 * (1.0 + x.norm())) {
      // The step no longer moves x in floating point; further iterations repeat it.
      res.message = "quasi-Newton step below working precision";
      break;
    }
    const Vec g_new = model.gradient(x_new);
    const Vec y = g_new - g;
    if (k == 0 && opts.rescale_first && opts.h0.size() == 0) {
      const double sy = s.dot(y);
      if (sy > 1e-12 * s.norm() * y.norm()) state = BfgsState::scaled_identity(p, y.squaredNorm() / sy);
    }
    BfgsUpdate upd = bfgs_update(state, s, y);
    if (upd.applied) {
      const double yn = y.norm();
      if (yn > 0.0) res.max_secant_residual = std::max(res.max_secant_residual, (upd.state.h * s - y).norm() / yn);
      state = std::move(upd.state);
    } else {
      ++res.skipped_updates;
    }

    rec.tau = tau;
    rec.phase = tau == 1.0 ? Phase::full : Phase::damped;
    rec.cum_time = round_to_millis(elapsed(start));
    res.trace.push_back(rec);
    if (opts.keep_iterates) res.iterates.push_back(x);

    x = x_new;
    f = f_new;
    g = g_new;
  }

  if (opts.keep_iterates) res.iterates.push_back(x);
  res.x = std::move(x);
  res.f = f;
  res.grad_norm = g.norm();
  res.iterations = static_cast<int>(res.trace.size());
  res.final_state = std::move(state);
  res.seconds = elapsed(start);
  return res;
}

double dennis_more_ratio(const Mat& h_k, const Mat& hess_star, const Vec& x_k, const Vec& x_star) {
  const Vec e = x_k - x_star;
  if (e.norm() == 0.0) throw InvalidArgument("dennis_more_ratio: x_k coincides with x_star");
  Eigen::LLT<Mat> llt(hess_star);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("dennis_more_ratio: reference Hessian is not PD");
  const Vec r = (h_k - hess_star) * e;
  const double num = std::sqrt(std::max(0.0, r.dot(llt.solve(r))));
  const double den = std::sqrt(std::max(0.0, e.dot(hess_star * e)));
  return num / den;
}

}  // namespace gsc
