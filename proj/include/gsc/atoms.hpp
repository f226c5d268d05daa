#pragma once

// Univariate convex loss atoms with analytic derivatives up to order three and
// their GSC parameters.

#include <limits>
#include <optional>
#include <string>

#include "gsc/kernel.hpp"

namespace gsc {

enum class AtomKind {
  logistic,         // ln(1 + e^{-t})
  exponential,      // e^{-t}
  neg_power,        // t^{-q}, q > 0, t > 0
  entropy,          // t ln t, t > 0
  log_barrier,      // -ln t, t > 0
  entropy_barrier,  // t ln t - ln t, t > 0
  positive_power,   // t^q, q in (1, 2), t > 0
  smoothed_l1,      // sqrt(t^2 + g^2) - g, or g ln cosh(t / g)
  smoothed_hinge,   // g ln cosh((1 - t) / g) + (1 - t) / 2
};

enum class SmoothingVariant { sqrt, logsumexp };

struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool contains(double t) const { return t > lower && t < upper; }
};

class LossAtom {
 public:
  static LossAtom logistic();
  static LossAtom exponential();
  static LossAtom neg_power(double q);
  static LossAtom entropy();
  static LossAtom log_barrier();
  static LossAtom entropy_barrier();
  static LossAtom positive_power(double q);
  static LossAtom smoothed_l1(double gamma, SmoothingVariant variant);
  static LossAtom smoothed_hinge(double gamma);

  AtomKind kind() const { return kind_; }
  double q() const { return q_; }
  double gamma() const { return gamma_; }
  SmoothingVariant variant() const { return variant_; }
  Interval domain() const;
  std::string name() const;

  // phi^{(order)}(t), order in 0..3. Throws DomainError outside the open domain.
  double eval(double t, int order) const;
  // All four derivatives at once.
  void eval_all(double t, double out[4]) const;

  GscParams params() const;
  // sup phi'' over the domain when finite.
  std::optional<double> sup_second_derivative() const;
  // Interval on which the certificate is checked in tests and benches.
  Interval representative_interval() const;

 private:
  LossAtom(AtomKind kind, double q, double gamma, SmoothingVariant variant)
      : kind_(kind), q_(q), gamma_(gamma), variant_(variant) {}

  AtomKind kind_;
  double q_ = 0.0;
  double gamma_ = 0.0;
  SmoothingVariant variant_ = SmoothingVariant::sqrt;
};

double atom_eval(const LossAtom& atom, double t, int order);
GscParams atom_params(const LossAtom& atom);

// max over an equispaced grid of |phi'''| / phi''^(nu/2), with 0/0 read as 0.
double gsc_certificate(const LossAtom& atom, Interval interval, int samples);

// sup_u { t u - phi(u) } by safeguarded Newton on phi'(u) = t. With reflect,
// the conjugate of u -> phi(-u) is returned instead.
double numeric_conjugate(const LossAtom& atom, double t, double tol, bool reflect = false);

}  // namespace gsc
