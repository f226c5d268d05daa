#include <cmath>

#include "doctest.h"
#include "gsc/bench_io.hpp"
#include "gsc/errors.hpp"
#include "gsc/prox_newton.hpp"

using namespace gsc;
using doctest::Approx;

namespace {

// Accelerated proximal gradient with constant step 1/L on f + weight |x|_1,
// run until the gradient mapping falls below tol.
Vec fista_reference(const Model& f, const ProxSpec& g, Vec x, double lipschitz, double tol) {
  const double s = 1.0 / lipschitz;
  Vec y = x;
  double t = 1.0;
  for (int k = 0; k < 200000; ++k) {
    const Vec xn = prox_apply(g, y - s * f.gradient(y), s);
    const double tn = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
    y = xn + ((t - 1) / tn) * (xn - x);
    x = xn;
    t = tn;
    if (gradient_mapping_norm(g, x, f.gradient(x), s) <= tol) break;
  }
  return x;
}

CompositeOptions options(double eps) {
  CompositeOptions o;
  o.eps = eps;
  o.max_iter = 500;
  return o;
}

}  // namespace

TEST_CASE("zero regularizer reproduces the Newton trace") {
  const GlmModel m = logistic_model(gen_logistic(200, 20, 7), 1e-5);
  for (NuChoice nu : {NuChoice::force_2, NuChoice::force_3}) {
    CompositeOptions o = options(1e-10);
    o.nu_choice = nu;
    const CompositeResult pn = minimize_composite({m, ProxSpec::zero(), Vec::Zero(20)}, o);
    const SolveResult nt = minimize(m, Vec::Zero(20), o);
    REQUIRE(pn.trace.size() == nt.trace.size());
    for (std::size_t k = 0; k < nt.trace.size(); ++k) {
      CHECK(pn.trace[k].f == Approx(nt.trace[k].f).epsilon(1e-10));
      CHECK(std::abs(pn.trace[k].lambda - nt.trace[k].lambda) <= 1e-10 * std::max(1.0, nt.trace[k].lambda));
      CHECK(pn.trace[k].tau == Approx(nt.trace[k].tau).epsilon(1e-10));
    }
    CHECK((pn.x - nt.x).norm() <= 1e-10);
  }
}

TEST_CASE("portfolio on the simplex") {
  const PortfolioModel pf(gen_portfolio(50, 10, 7));
  const Vec x0 = Vec::Constant(10, 0.1);
  CompositeOptions o = options(1e-8);
  o.keep_iterates = true;
  const CompositeProblem prob{pf, ProxSpec::simplex(), x0};
  const CompositeResult r = minimize_composite(prob, o);
  CHECK(r.status == Status::converged);
  CHECK(std::abs(r.x.sum() - 1.0) <= 1e-12);
  CHECK(r.x.minCoeff() >= 0.0);
  for (const Vec& x : r.iterates) {
    CHECK(std::abs(x.sum() - 1.0) <= 1e-12);
    CHECK(x.minCoeff() >= 0.0);
    CHECK(pf.in_domain(x));
  }
  const SolveResult ref = pg_bb(prob, 1e-10);
  CHECK(ref.status == Status::converged);
  CHECK(r.f == Approx(ref.f).epsilon(1e-6).scale(1.0));
  CHECK(r.optimality_residual <= 10 * o.eps);
}

TEST_CASE("l1-regularized logistic") {
  const Index n = 200, p = 50;
  const GlmModel m = logistic_model(gen_logistic(n, p, 7), 0.0);
  // Logistic curvature is at most 1/4 along unit-norm rows.
  const Mat a = m.design().to_dense();
  const double lip = 0.25 * (a.transpose() * a).eval().selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff() / n;
  const double g0 = m.gradient(Vec::Zero(p)).lpNorm<Eigen::Infinity>();

  SUBCASE("weight 0.5 / sqrt(n) exceeds |grad f(0)|_inf, so the solution is zero") {
    const double w = 0.5 / std::sqrt(static_cast<double>(n));
    REQUIRE(w > g0);
    const CompositeProblem prob{m, ProxSpec::l1(w), Vec::Constant(p, 0.1)};
    const CompositeResult r = minimize_composite(prob, options(1e-9));
    CHECK(r.status == Status::converged);
    CHECK(r.x.lpNorm<Eigen::Infinity>() <= 1e-9);
  }
  SUBCASE("smaller weight with a partial support") {
    const ProxSpec g = ProxSpec::l1(0.25 * g0);
    const CompositeProblem prob{m, g, Vec::Zero(p)};
    const CompositeOptions o = options(1e-9);
    const CompositeResult r = minimize_composite(prob, o);
    CHECK(r.status == Status::converged);
    CHECK(r.optimality_residual <= 10 * o.eps);
    int zeros = 0;
    for (Index j = 0; j < p; ++j) zeros += r.x(j) == 0.0 ? 1 : 0;
    CHECK(zeros > 0);
    CHECK(zeros < p);
    const Vec ref = fista_reference(m, g, Vec::Zero(p), lip, 1e-10);
    CHECK(std::abs(prob.objective(r.x) - prob.objective(ref)) <= 1e-6 * std::max(1.0, std::abs(prob.objective(ref))));
  }
}

TEST_CASE("composite objective decreases monotonically") {
  const GlmModel m = logistic_model(gen_logistic(200, 20, 7), 1e-5);
  const PortfolioModel pf(gen_portfolio(50, 10, 7));
  const CompositeProblem probs[] = {{m, ProxSpec::l1(0.02), Vec::Zero(20)},
                                    {pf, ProxSpec::simplex(), Vec::Constant(10, 0.1)}};
  for (const CompositeProblem& prob : probs) {
    for (NuChoice nu : {NuChoice::native, NuChoice::force_3}) {
      CompositeOptions o = options(1e-9);
      o.nu_choice = nu;
      o.max_iter = 3000;
      const CompositeResult r = minimize_composite(prob, o);
      CHECK(r.status == Status::converged);
      for (std::size_t k = 0; k + 1 < r.trace.size(); ++k) {
        const double a = r.trace[k].f, b = r.trace[k + 1].f;
        CHECK(b <= a + 1e-12 * (1 + std::abs(a)));
        CHECK(r.trace[k].tau > 0.0);
        CHECK(r.trace[k].tau <= 1.0);
      }
    }
  }
}

TEST_CASE("infeasible start is rejected") {
  const PortfolioModel pf(gen_portfolio(10, 3, 7));
  CHECK_THROWS(minimize_composite({pf, ProxSpec::simplex(), Vec::Constant(3, -1.0)}, options(1e-8)));
}
