#include "gsc/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsc/errors.hpp"

namespace gsc {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// 1 / (1 + e^{-t}) without overflow.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// ln cosh(u) = |u| + log1p(e^{-2|u|}) - ln 2
double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - kLn2;
}

// sech(u)^2 = 4 e^{-2|u|} / (1 + e^{-2|u|})^2
double sech2(double u) {
  const double e = std::exp(-2.0 * std::abs(u));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

LossAtom LossAtom::logistic() { return {AtomKind::logistic, 0.0, 0.0, SmoothingVariant::sqrt}; }
LossAtom LossAtom::exponential() { return {AtomKind::exponential, 0.0, 0.0, SmoothingVariant::sqrt}; }
LossAtom LossAtom::entropy() { return {AtomKind::entropy, 0.0, 0.0, SmoothingVariant::sqrt}; }
LossAtom LossAtom::log_barrier() { return {AtomKind::log_barrier, 0.0, 0.0, SmoothingVariant::sqrt}; }
LossAtom LossAtom::entropy_barrier() {
  return {AtomKind::entropy_barrier, 0.0, 0.0, SmoothingVariant::sqrt};
}

LossAtom LossAtom::neg_power(double q) {
  if (!(q > 0.0) || !std::isfinite(q)) throw InvalidArgument("neg_power: q must be > 0");
  return {AtomKind::neg_power, q, 0.0, SmoothingVariant::sqrt};
}

LossAtom LossAtom::positive_power(double q) {
  if (!(q > 1.0 && q < 2.0)) throw InvalidArgument("positive_power: q must lie in (1, 2)");
  return {AtomKind::positive_power, q, 0.0, SmoothingVariant::sqrt};
}

LossAtom LossAtom::smoothed_l1(double gamma, SmoothingVariant variant) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("smoothed_l1: gamma must be > 0");
  return {AtomKind::smoothed_l1, 0.0, gamma, variant};
}

LossAtom LossAtom::smoothed_hinge(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("smoothed_hinge: gamma must be > 0");
  return {AtomKind::smoothed_hinge, 0.0, gamma, SmoothingVariant::logsumexp};
}

Interval LossAtom::domain() const {
  switch (kind_) {
    case AtomKind::neg_power:
    case AtomKind::entropy:
    case AtomKind::log_barrier:
    case AtomKind::entropy_barrier:
    case AtomKind::positive_power:
      return {0.0, std::numeric_limits<double>::infinity()};
    default:
      return {};
  }
}

std::string LossAtom::name() const {
  switch (kind_) {
    case AtomKind::logistic: return "logistic";
    case AtomKind::exponential: return "exponential";
    case AtomKind::neg_power: return "neg_power(q=" + std::to_string(q_) + ")";
    case AtomKind::entropy: return "entropy";
    case AtomKind::log_barrier: return "log_barrier";
    case AtomKind::entropy_barrier: return "entropy_barrier";
    case AtomKind::positive_power: return "positive_power(q=" + std::to_string(q_) + ")";
    case AtomKind::smoothed_l1:
      return std::string("smoothed_l1_") + (variant_ == SmoothingVariant::sqrt ? "sqrt" : "logsumexp") +
             "(gamma=" + std::to_string(gamma_) + ")";
    case AtomKind::smoothed_hinge: return "smoothed_hinge(gamma=" + std::to_string(gamma_) + ")";
  }
  return "unknown";
}

void LossAtom::eval_all(double t, double out[4]) const {
  if (!domain().contains(t) || std::isnan(t)) {
    throw DomainError(name() + ": argument " + std::to_string(t) + " outside the domain");
  }
  switch (kind_) {
    case AtomKind::logistic: {
      const double sp = sigmoid(t);
      const double sm = sigmoid(-t);
      out[0] = std::max(-t, 0.0) + std::log1p(std::exp(-std::abs(t)));
      out[1] = -sm;
      out[2] = sp * sm;
      out[3] = out[2] * (sm - sp);
      return;
    }
    case AtomKind::exponential: {
      const double e = std::exp(-t);
      out[0] = e;
      out[1] = -e;
      out[2] = e;
      out[3] = -e;
      return;
    }
    case AtomKind::neg_power: {
      const double q = q_;
      const double base = std::pow(t, -q);
      out[0] = base;
      out[1] = -q * base / t;
      out[2] = q * (q + 1.0) * base / (t * t);
      out[3] = -q * (q + 1.0) * (q + 2.0) * base / (t * t * t);
      return;
    }
    case AtomKind::entropy: {
      const double inv = 1.0 / t;
      out[0] = t * std::log(t);
      out[1] = std::log(t) + 1.0;
      out[2] = inv;
      out[3] = -inv * inv;
      return;
    }
    case AtomKind::log_barrier: {
      const double inv = 1.0 / t;
      out[0] = -std::log(t);
      out[1] = -inv;
      out[2] = inv * inv;
      out[3] = -2.0 * inv * inv * inv;
      return;
    }
    case AtomKind::entropy_barrier: {
      const double inv = 1.0 / t;
      const double lt = std::log(t);
      out[0] = t * lt - lt;
      out[1] = lt + 1.0 - inv;
      out[2] = inv + inv * inv;
      out[3] = -inv * inv - 2.0 * inv * inv * inv;
      return;
    }
    case AtomKind::positive_power: {
      const double q = q_;
      const double base = std::pow(t, q);
      out[0] = base;
      out[1] = q * base / t;
      out[2] = q * (q - 1.0) * base / (t * t);
      out[3] = q * (q - 1.0) * (q - 2.0) * base / (t * t * t);
      return;
    }
    case AtomKind::smoothed_l1: {
      const double g = gamma_;
      if (variant_ == SmoothingVariant::sqrt) {
        const double s = std::hypot(t, g);
        out[0] = t * t / (s + g);
        out[1] = t / s;
        out[2] = g * g / (s * s * s);
        out[3] = -3.0 * g * g * t / (s * s * s * s * s);
      } else {
        const double u = t / g;
        const double th = std::tanh(u);
        const double s2 = sech2(u);
        out[0] = g * log_cosh(u);
        out[1] = th;
        out[2] = s2 / g;
        out[3] = -2.0 * s2 * th / (g * g);
      }
      return;
    }
    case AtomKind::smoothed_hinge: {
      const double g = gamma_;
      const double u = (1.0 - t) / g;
      const double th = std::tanh(u);
      const double s2 = sech2(u);
      out[0] = g * log_cosh(u) + 0.5 * (1.0 - t);
      out[1] = -th - 0.5;
      out[2] = s2 / g;
      out[3] = 2.0 * s2 * th / (g * g);
      return;
    }
  }
}

double LossAtom::eval(double t, int order) const {
  if (order < 0 || order > 3) throw InvalidArgument("atom_eval: order must be in 0..3");
  double out[4];
  eval_all(t, out);
  return out[order];
}

GscParams LossAtom::params() const {
  switch (kind_) {
    case AtomKind::logistic:
    case AtomKind::exponential:
      return {1.0, 2.0};
    case AtomKind::neg_power:
      return {(q_ + 2.0) / std::pow(q_ * (q_ + 1.0), 1.0 / (q_ + 2.0)), 2.0 * (q_ + 3.0) / (q_ + 2.0)};
    case AtomKind::entropy:
      return {1.0, 4.0};
    case AtomKind::log_barrier:
    case AtomKind::entropy_barrier:
      return {2.0, 3.0};
    case AtomKind::positive_power:
      return {(2.0 - q_) / std::pow(q_ * (q_ - 1.0), 1.0 / (2.0 - q_)), 2.0 * (3.0 - q_) / (2.0 - q_)};
    case AtomKind::smoothed_l1:
      if (variant_ == SmoothingVariant::sqrt) return {3.0 * std::pow(gamma_, -2.0 / 3.0), 8.0 / 3.0};
      // ln cosh has |phi'''| = 2 |tanh| phi'' <= 2 phi''; the 1/gamma scaling of
      // the argument multiplies M by 1/gamma (nu = 2 affine rule).
      return {2.0 / gamma_, 2.0};
    case AtomKind::smoothed_hinge:
      // Same ln cosh core composed with t -> (1 - t)/gamma; the linear part
      // has no curvature.
      return {2.0 / gamma_, 2.0};
  }
  return {};
}

std::optional<double> LossAtom::sup_second_derivative() const {
  switch (kind_) {
    case AtomKind::logistic:
      return 0.25;
    case AtomKind::smoothed_l1:
    case AtomKind::smoothed_hinge:
      return 1.0 / gamma_;
    default:
      return std::nullopt;
  }
}

Interval LossAtom::representative_interval() const {
  switch (kind_) {
    case AtomKind::logistic: return {-20.0, 20.0};
    case AtomKind::exponential: return {-5.0, 5.0};
    case AtomKind::neg_power:
    case AtomKind::entropy:
    case AtomKind::log_barrier:
    case AtomKind::entropy_barrier:
    case AtomKind::positive_power:
      return {0.01, 100.0};
    case AtomKind::smoothed_l1:
    case AtomKind::smoothed_hinge:
      return {-10.0, 10.0};
  }
  return {};
}

double atom_eval(const LossAtom& atom, double t, int order) { return atom.eval(t, order); }

GscParams atom_params(const LossAtom& atom) { return atom.params(); }

double gsc_certificate(const LossAtom& atom, Interval interval, int samples) {
  if (samples < 2) throw InvalidArgument("gsc_certificate: samples must be >= 2");
  const Interval dom = atom.domain();
  if (!(interval.lower <= interval.upper) || !dom.contains(interval.lower) || !dom.contains(interval.upper)) {
    throw DomainError("gsc_certificate: interval leaves the domain of " + atom.name());
  }
  const double half_nu = atom.params().nu / 2.0;
  double worst = 0.0;
  double d[4];
  for (int i = 0; i < samples; ++i) {
    const double t = i + 1 == samples
                         ? interval.upper
                         : interval.lower + (interval.upper - interval.lower) * i / (samples - 1.0);
    atom.eval_all(t, d);
    const double num = std::abs(d[3]);
    if (num == 0.0) continue;
    const double den = std::pow(d[2], half_nu);
    worst = std::max(worst, den > 0.0 ? num / den : std::numeric_limits<double>::infinity());
  }
  return worst;
}

double numeric_conjugate(const LossAtom& atom, double t, double tol, bool reflect) {
  if (!(tol > 0.0)) throw InvalidArgument("numeric_conjugate: tol must be > 0");
  const double s = reflect ? -1.0 : 1.0;
  Interval dom = atom.domain();
  if (reflect) dom = {-dom.upper, -dom.lower};
  double d[4];
  // h(u) = psi'(u) - t with psi(u) = phi(s u); h is nondecreasing.
  auto h = [&](double u) {
    atom.eval_all(s * u, d);
    return s * d[1] - t;
  };

  double u0 = 0.0;
  if (std::isfinite(dom.lower) && std::isfinite(dom.upper)) {
    u0 = 0.5 * (dom.lower + dom.upper);
  } else if (std::isfinite(dom.lower)) {
    u0 = dom.lower + 1.0;
  } else if (std::isfinite(dom.upper)) {
    u0 = dom.upper - 1.0;
  }

  double lo = u0, hi = u0;
  double hlo = h(u0), hhi = hlo;
  const int max_expand = 2000;
  auto advance = [](double u, double bound, double& step, double dir) {
    if (std::isfinite(bound)) return bound - (bound - u) / 2.0;
    step *= 2.0;
    return u + dir * step;
  };
  double step = 0.5;
  for (int i = 0; hhi < 0.0; ++i) {
    if (i == max_expand || !std::isfinite(hi)) {
      throw UnboundedError("numeric_conjugate: supremum unbounded at t = " + std::to_string(t));
    }
    lo = hi;
    hlo = hhi;
    hi = advance(hi, dom.upper, step, 1.0);
    if (!dom.contains(hi)) throw UnboundedError("numeric_conjugate: supremum not attained");
    hhi = h(hi);
  }
  step = 0.5;
  for (int i = 0; hlo > 0.0; ++i) {
    if (i == max_expand || !std::isfinite(lo)) {
      throw UnboundedError("numeric_conjugate: supremum unbounded at t = " + std::to_string(t));
    }
    hi = lo;
    hhi = hlo;
    lo = advance(lo, dom.lower, step, -1.0);
    if (!dom.contains(lo)) throw UnboundedError("numeric_conjugate: supremum not attained");
    hlo = h(lo);
  }

  double u = hlo == 0.0 ? lo : (hhi == 0.0 ? hi : 0.5 * (lo + hi));
  for (int it = 0; it < 500 && hi - lo > tol * 1e-3 * (1.0 + std::abs(u)); ++it) {
    const double hu = h(u);
    if (hu == 0.0) break;
    if (hu < 0.0) {
      lo = u;
    } else {
      hi = u;
    }
    const double curv = d[2];
    double next = curv > 0.0 ? u - hu / curv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-3 * tol * (1.0 + std::abs(u))) {
      u = next;
      break;
    }
    u = next;
  }
  return t * u - atom.eval(s * u, 0);
}

}  // namespace gsc
