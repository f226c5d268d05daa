#include "gsc/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "gsc/errors.hpp"

namespace gsc {

ProxSpec ProxSpec::l1(double weight) {
  if (!(weight >= 0.0)) throw InvalidArgument("l1 prox: weight must be >= 0");
  return {ProxKind::l1, weight, {}, {}};
}

ProxSpec ProxSpec::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || (lo.array() > hi.array()).any()) {
    throw InvalidArgument("box prox: need lo <= hi with matching sizes");
  }
  return {ProxKind::box, 0.0, std::move(lo), std::move(hi)};
}

bool ProxSpec::feasible(const Vec& x, double tol) const {
  switch (kind) {
    case ProxKind::zero:
    case ProxKind::l1:
      return x.allFinite();
    case ProxKind::simplex:
      return x.size() > 0 && x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol * std::max<double>(1.0, x.size());
    case ProxKind::box:
      return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
  }
  return false;
}

double ProxSpec::value(const Vec& x, double feas_tol) const {
  switch (kind) {
    case ProxKind::zero:
      return 0.0;
    case ProxKind::l1:
      return weight * x.lpNorm<1>();
    case ProxKind::simplex:
    case ProxKind::box:
      return feasible(x, feas_tol) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

Vec project_simplex(const Vec& u) {
  const Index p = u.size();
  if (p == 0) throw InvalidArgument("project_simplex: empty vector");
  std::vector<double> s(u.data(), u.data() + p);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < p; ++j) {
    cum += s[static_cast<std::size_t>(j)];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (s[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
  }
  return (u.array() - theta).cwiseMax(0.0).matrix();
}

Vec prox_apply(const ProxSpec& g, const Vec& u, double step) {
  if (!(step > 0.0)) throw InvalidArgument("prox_apply: step must be > 0");
  switch (g.kind) {
    case ProxKind::zero:
      return u;
    case ProxKind::l1: {
      const double k = step * g.weight;
      Vec z(u.size());
      for (Index i = 0; i < u.size(); ++i) {
        const double a = std::abs(u(i)) - k;
        z(i) = a > 0.0 ? std::copysign(a, u(i)) : 0.0;
      }
      return z;
    }
    case ProxKind::simplex:
      return project_simplex(u);
    case ProxKind::box:
      if (g.lo.size() != u.size()) throw InvalidArgument("prox_apply: box dimension mismatch");
      return u.cwiseMax(g.lo).cwiseMin(g.hi);
  }
  return u;
}

double gradient_mapping_norm(const ProxSpec& g, const Vec& x, const Vec& grad, double s) {
  return (x - prox_apply(g, x - s * grad, s)).norm() / s;
}

SubproblemResult solve_scaled_prox(const HessianOperator& h, const Vec& grad, const Vec& x, const ProxSpec& g,
                                   const SubproblemOptions& opts) {
  SubproblemResult out;
  const Index p = x.size();

  if (g.kind == ProxKind::zero) {
    const LinearMethod method = h.is_dense() ? opts.linear : LinearMethod::cg;
    const NewtonDirection dir = newton_direction(h, grad, method, std::min(opts.tol, 1e-10), 10 * static_cast<int>(p) + 100);
    out.z = x + dir.n;
    out.residual = (grad + h.apply(dir.n)).norm();
    out.converged = true;
    return out;
  }

  double lip = opts.lipschitz;
  if (!(lip > 0.0)) {
    // The Rayleigh quotient approaches the top eigenvalue from below.
    lip = largest_eigenvalue(h, 1e-3, 1000).value * 1.05;
  }
  if (!(lip > 0.0)) throw NotPositiveDefinite("scaled prox subproblem: operator has no positive spectrum");
  const double s = 1.0 / lip;
  out.step = s;

  auto model_value = [&](const Vec& z, const Vec& hd) {
    const Vec d = z - x;
    return grad.dot(d) + 0.5 * d.dot(hd) + g.value(z);
  };

  Vec z = opts.warm_start != nullptr && opts.warm_start->size() == p ? *opts.warm_start : x;
  if (!std::isfinite(g.value(z))) z = prox_apply(g, z, s);
  Vec hz = h.apply(z - x);
  double qz = model_value(z, hz);
  Vec y = z;
  Vec hy = hz;
  double t = 1.0;
  out.residual = gradient_mapping_norm(g, z, grad + hz, s);
  out.converged = out.residual <= opts.tol;
  // After a restart y == z and the next trial is a plain proximal gradient
  // step, which cannot increase the model in exact arithmetic.
  bool plain = true;
  int stalls = 0;
  double best_residual = out.residual;

  for (int k = 0; k < opts.max_inner && !out.converged; ++k) {
    const Vec gy = grad + hy;
    Vec zn = prox_apply(g, y - s * gy, s);
    Vec hzn = h.apply(zn - x);
    const double qn = model_value(zn, hzn);
    out.iterations = k + 1;
    const bool increased = qn > qz + 1e-15 * (1.0 + std::abs(qz));
    if (increased && !plain) {
      // Momentum overshoot: restart from the last accepted point.
      ++out.restarts;
      t = 1.0;
      y = z;
      hy = hz;
      plain = true;
      continue;
    }
    double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double mom = (t - 1.0) / tn;
    if (increased) {
      // Rounding dominates the model difference; take the plain step without
      // momentum and judge progress by the residual instead.
      tn = 1.0;
      mom = 0.0;
    }
    y = zn + mom * (zn - z);
    hy = hzn + mom * (hzn - hz);
    z = std::move(zn);
    hz = std::move(hzn);
    qz = qn;
    t = tn;
    plain = mom == 0.0;

    out.residual = gradient_mapping_norm(g, z, grad + hz, s);
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
    if (out.residual < best_residual) {
      best_residual = out.residual;
      stalls = 0;
    } else if (++stalls > 200) {
      break;
    }
  }
  out.z = std::move(z);
  return out;
}

Vec scaled_prox_subproblem(const HessianOperator& h, const Vec& grad, const Vec& x, const ProxSpec& g, double tol,
                           int max_inner) {
  SubproblemOptions opts;
  opts.tol = tol;
  opts.max_inner = max_inner;
  SubproblemResult r = solve_scaled_prox(h, grad, x, g, opts);
  if (!r.converged) {
    throw InexactSubproblem("scaled prox subproblem: residual above tolerance after " + std::to_string(max_inner) +
                                " iterations",
                            r.residual);
  }
  return std::move(r.z);
}

}  // namespace gsc
