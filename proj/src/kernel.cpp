#include "gsc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gsc/errors.hpp"

namespace gsc {

namespace {

constexpr double kOrderTol = 1e-12;

bool is_order(double nu, double target) { return std::abs(nu - target) < kOrderTol; }

void require_nu_ge2(double nu, const char* fn) {
  if (!(nu >= 2.0 - kOrderTol) || !std::isfinite(nu)) {
    throw DomainError(std::string(fn) + ": nu must be >= 2, got " + std::to_string(nu));
  }
}

void require_left_of_one(double nu, double tau, const char* fn) {
  if (!is_order(nu, 2.0) && !(tau < 1.0)) {
    throw DomainError(std::string(fn) + ": tau must be < 1 for nu > 2, got " +
                      std::to_string(tau));
  }
}

// Exponent of the omega_bar_bar power law, a = 2 / (nu - 2).
double power_a(double nu) { return 2.0 / (nu - 2.0); }

}  // namespace

void validate(const GscParams& p) {
  if (!(p.m >= 0.0) || !std::isfinite(p.m)) {
    throw InvalidArgument("GscParams: m must be finite and >= 0");
  }
  if (!(p.nu > 0.0) || !std::isfinite(p.nu)) {
    throw InvalidArgument("GscParams: nu must be finite and > 0");
  }
}

void require_solver_order(const GscParams& p) {
  validate(p);
  if (p.nu < 2.0 - kOrderTol || p.nu > 3.0 + kOrderTol) {
    throw InvalidArgument("solver requires nu in [2, 3], got " + std::to_string(p.nu));
  }
}

double omega_bar_bar(double nu, double tau) {
  require_nu_ge2(nu, "omega_bar_bar");
  if (is_order(nu, 2.0)) return std::exp(tau);
  require_left_of_one(nu, tau, "omega_bar_bar");
  return std::exp(-power_a(nu) * std::log1p(-tau));
}

double omega_bar(double nu, double tau) {
  require_nu_ge2(nu, "omega_bar");
  if (tau == 0.0) return 1.0;
  if (is_order(nu, 2.0)) return std::expm1(tau) / tau;
  require_left_of_one(nu, tau, "omega_bar");
  const double l = std::log1p(-tau);
  if (is_order(nu, 4.0)) return -l / tau;
  const double e = 1.0 - power_a(nu);
  return -std::expm1(e * l) / (e * tau);
}

namespace detail {

double omega_switch(double nu) {
  if (is_order(nu, 2.0)) return 0.1;
  return 0.1 / std::max(1.0, power_a(nu));
}

double omega_series(double nu, double tau) {
  const bool nu2 = is_order(nu, 2.0);
  const double a = nu2 ? 0.0 : power_a(nu);
  double c = 1.0;
  double tk = 1.0;
  double sum = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double term = c * tk / ((k + 1.0) * (k + 2.0));
    sum += term;
    if (k > 2 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    c *= nu2 ? 1.0 / (k + 1.0) : (a + k) / (k + 1.0);
    tk *= tau;
  }
  return sum;
}

double omega_closed(double nu, double tau) {
  const double t2 = tau * tau;
  if (is_order(nu, 2.0)) return (std::expm1(tau) - tau) / t2;
  const double l = std::log1p(-tau);
  if (is_order(nu, 3.0)) return (-tau - l) / t2;
  if (is_order(nu, 4.0)) return ((1.0 - tau) * l + tau) / t2;
  // b = 2(3 - nu)/(2 - nu), and (nu - 2)/(2(3 - nu)) = -1/b.
  const double b = 2.0 * (3.0 - nu) / (2.0 - nu);
  const double inner = -std::expm1(b * l) / (b * tau) - 1.0;
  return (nu - 2.0) / (4.0 - nu) * inner / tau;
}

double r_nu_switch(double nu) {
  const double r = (4.0 - nu) / (nu - 2.0);
  return 0.1 / std::max(1.0, r);
}

double r_nu_series(double nu, double t) {
  const double r = (4.0 - nu) / (nu - 2.0);
  double e = 0.5 * (r + 1.0);
  double tj = 1.0;
  double sum = 0.0;
  for (int j = 0; j < 400; ++j) {
    const double term = e * tj;
    sum += term;
    if (j > 2 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    e *= (r + j + 2.0) / (j + 3.0);
    tj *= t;
  }
  return sum;
}

double r_nu_closed(double nu, double t) {
  if (is_order(nu, 3.0)) return 1.0 / (1.0 - t);
  const double r = (4.0 - nu) / (nu - 2.0);
  return (std::expm1(-r * std::log1p(-t)) - r * t) / (r * t * t);
}

}  // namespace detail

double omega(double nu, double tau) {
  require_nu_ge2(nu, "omega");
  if (!is_order(nu, 2.0)) require_left_of_one(nu, tau, "omega");
  if (std::abs(tau) < detail::omega_switch(nu)) return detail::omega_series(nu, tau);
  return detail::omega_closed(nu, tau);
}

KappaBounds kappa_bounds(double nu, double t) {
  require_nu_ge2(nu, "kappa_bounds");
  if (!(t >= 0.0)) throw DomainError("kappa_bounds: t must be >= 0");
  require_left_of_one(nu, t, "kappa_bounds");
  if (t == 0.0) return {1.0, 1.0};
  const double upper = omega_bar(nu, t);
  double lower;
  if (is_order(nu, 2.0)) {
    lower = -std::expm1(-t) / t;
  } else {
    // integral of (1 - s t)^(2/(nu-2)) over s in [0, 1]
    const double b = nu / (nu - 2.0);
    lower = -std::expm1(b * std::log1p(-t)) / (b * t);
  }
  return {lower, upper};
}

double r_nu(double nu, double t) {
  if (nu < 2.0 - kOrderTol || nu > 3.0 + kOrderTol) {
    throw DomainError("r_nu: nu must lie in [2, 3]");
  }
  if (!(t >= 0.0 && t < 1.0)) throw DomainError("r_nu: t must lie in [0, 1)");
  if (is_order(nu, 2.0)) return (1.5 + t / 3.0) * std::exp(t);
  if (t < detail::r_nu_switch(nu)) return detail::r_nu_series(nu, t);
  return detail::r_nu_closed(nu, t);
}

double d_nu(double nu, double m, double dist2, double distx) {
  if (is_order(nu, 2.0)) return m * dist2;
  if (dist2 == 0.0 && distx == 0.0) return 0.0;
  return (nu / 2.0 - 1.0) * m * std::pow(dist2, 3.0 - nu) * std::pow(distx, nu - 2.0);
}

StepSize step_size(double nu, double m, double lambda, double beta) {
  if (nu < 2.0 - kOrderTol || nu > 3.0 + kOrderTol) {
    throw DomainError("step_size: nu must lie in [2, 3]");
  }
  StepSize out;
  if (!(lambda > 0.0)) {
    out.converged = true;
    return out;
  }
  if (is_order(nu, 2.0)) {
    out.d_k = beta;
    out.tau = beta <= 1e-14 ? 1.0 : std::log1p(beta) / beta;
    return out;
  }
  const double d = (nu / 2.0 - 1.0) * std::pow(m, nu - 2.0) * std::pow(lambda, nu - 2.0) *
                   std::pow(beta, 3.0 - nu);
  out.d_k = d;
  if (d <= 1e-14) return out;
  const double c = (4.0 - nu) / (nu - 2.0);
  out.tau = -std::expm1(-std::log1p(c * d) / c) / d;
  out.tau = std::min(out.tau, 1.0);
  return out;
}

double descent_estimate(double nu, double lambda, double d_k, double tau) {
  if (!(lambda > 0.0)) return 0.0;
  const double l2 = lambda * lambda;
  return l2 * tau * (1.0 - omega(nu, tau * d_k) * tau);
}

GscParams combine_sum(const std::vector<WeightedParams>& parts) {
  if (parts.empty()) throw InvalidArgument("combine_sum: no parts");
  const double nu = parts.front().params.nu;
  if (nu < 2.0 - kOrderTol) throw InvalidArgument("combine_sum: requires nu >= 2");
  double m = 0.0;
  for (const auto& part : parts) {
    validate(part.params);
    if (std::abs(part.params.nu - nu) > kOrderTol) {
      throw InvalidArgument("combine_sum: all parts must share the same nu");
    }
    if (!(part.weight > 0.0)) throw InvalidArgument("combine_sum: weights must be positive");
    m = std::max(m, std::pow(part.weight, 1.0 - nu / 2.0) * part.params.m);
  }
  return {m, nu};
}

GscParams transform_affine(const GscParams& p, double op_norm_a, double lam_min_ata) {
  validate(p);
  if (p.nu <= 3.0) {
    if (is_order(p.nu, 3.0)) return p;
    return {p.m * std::pow(op_norm_a, 3.0 - p.nu), p.nu};
  }
  if (!(lam_min_ata > 0.0)) {
    throw InvalidArgument("transform_affine: nu > 3 requires lambda_min(A^T A) > 0");
  }
  return {p.m * std::pow(lam_min_ata, (3.0 - p.nu) / 2.0), p.nu};
}

GscParams reparam(const GscParams& p, ReparamMode mode, double constant) {
  validate(p);
  if (!(constant > 0.0) || !std::isfinite(constant)) {
    throw InvalidArgument("reparam: constant must be positive and finite");
  }
  if (mode == ReparamMode::strong_convexity) {
    if (p.nu > 3.0 + kOrderTol) throw InvalidArgument("reparam: strong convexity needs nu <= 3");
    return {p.m / std::pow(constant, (3.0 - p.nu) / 2.0), 3.0};
  }
  if (p.nu < 2.0 - kOrderTol) throw InvalidArgument("reparam: Lipschitz gradient needs nu >= 2");
  return {p.m * std::pow(constant, p.nu / 2.0 - 1.0), 2.0};
}

GscParams conjugate_params(const GscParams& p, int dim) {
  validate(p);
  if (dim < 1) throw InvalidArgument("conjugate_params: dim must be >= 1");
  const bool ok = dim == 1 ? (p.nu > 0.0 && p.nu < 6.0) : (p.nu >= 3.0 && p.nu < 6.0);
  if (!ok) {
    throw InvalidArgument("conjugate_params: nu = " + std::to_string(p.nu) +
                          " outside the admissible range for dim " + std::to_string(dim));
  }
  return {p.m, 6.0 - p.nu};
}

bool Phase2Threshold::entered(double m, double lambda, double sigma_min) const {
  if (m == 0.0) return true;
  switch (rule) {
    case Phase2Rule::order3:
      return lambda < radius / m;
    case Phase2Rule::order2:
      if (!(sigma_min > 0.0)) return false;
      return lambda / std::sqrt(sigma_min) < radius / m;
    case Phase2Rule::intermediate:
      if (!(sigma_min > 0.0)) return false;
      return std::pow(sigma_min, -(3.0 - nu) / 2.0) * lambda < radius / m;
  }
  return false;
}

Phase2Threshold phase2_threshold(double nu, SolverKind solver) {
  if (nu < 2.0 - kOrderTol || nu > 3.0 + kOrderTol) {
    throw DomainError("phase2_threshold: nu must lie in [2, 3]");
  }
  constexpr double lo = 1e-8;
  constexpr double hi = 1.0 - 1e-8;
  constexpr double tol = 1e-10;
  Phase2Threshold th;
  th.nu = nu;
  th.solver = solver;

  if (is_order(nu, 2.0)) {
    th.rule = Phase2Rule::order2;
    if (solver == SolverKind::newton) {
      th.computed_root = bisect([](double d) { return r_nu(2.0, d) * std::exp(d) - 2.0; }, lo, hi, tol);
      th.d_star = kNewtonDStar2;
    } else {
      th.computed_root = bisect(
          [](double d) {
            const double den = 2.0 - std::exp(d);
            if (den <= 0.0) return 1.0;
            return r_nu(2.0, d) * std::exp(d) / den - 2.0;
          },
          lo, hi, tol);
      th.d_star = kProxDStar2;
    }
    th.radius = th.d_star;
    return th;
  }

  const double r = (4.0 - nu) / (nu - 2.0);
  const double a = power_a(nu);
  if (solver == SolverKind::newton) {
    th.computed_root = bisect(
        [&](double d) { return (nu - 2.0) * r_nu(nu, d) - 4.0 * std::pow(1.0 - d, r); }, lo, hi, tol);
  } else {
    th.computed_root = bisect(
        [&](double d) {
          const double den = 2.0 - std::pow(1.0 - d, -a);
          if (den <= 0.0) return 1.0;
          return (nu / 2.0 - 1.0) * r_nu(nu, d) * std::pow(1.0 - d, -r) / den - 2.0;
        },
        lo, hi, tol);
  }

  if (is_order(nu, 3.0)) {
    th.rule = Phase2Rule::order3;
    if (solver == SolverKind::newton) {
      th.d_star = th.computed_root;
      th.radius = 0.5;
    } else {
      th.d_star = kProxDStar3;
      th.radius = 2.0 * th.d_star;
    }
    return th;
  }
  th.rule = Phase2Rule::intermediate;
  th.d_star = th.computed_root;
  th.radius = std::min(2.0 * th.d_star / (nu - 2.0), 0.5);
  return th;
}

}  // namespace gsc
