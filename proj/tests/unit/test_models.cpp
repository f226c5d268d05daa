#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "gsc/bench_io.hpp"
#include "gsc/errors.hpp"
#include "gsc/models.hpp"

using namespace gsc;
using doctest::Approx;

namespace {

Vec randn(Index p, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(p);
  for (Index i = 0; i < p; ++i) v(i) = nd(gen);
  return v;
}

Vec fd_gradient(const Model& m, const Vec& x) {
  Vec g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g(j) = (m.value(xp) - m.value(xm)) / (2 * h);
  }
  return g;
}

// A point of the portfolio simplex interior.
Vec random_simplex(Index p, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vec x(p);
  for (Index i = 0; i < p; ++i) x(i) = u(gen);
  return x / x.sum();
}

struct Instance {
  std::string name;
  std::shared_ptr<Model> model;
  std::function<Vec(std::mt19937_64&)> sample;
};

std::vector<Instance> instances() {
  std::vector<Instance> out;
  const Dataset d = gen_logistic(20, 5, 7);
  auto lg = std::make_shared<GlmModel>(logistic_model(d, 1e-3));
  out.push_back({"logistic", lg, [](std::mt19937_64& g) { return randn(5, g); }});
  auto pf = std::make_shared<PortfolioModel>(gen_portfolio(20, 5, 7));
  out.push_back({"portfolio", pf, [](std::mt19937_64& g) { return random_simplex(5, g); }});
  const DwdModel dwd = dwd_model(d, 1.0, 1e-3, 1e-3, 1e-3);
  auto dg = std::make_shared<GlmModel>(dwd_as_glm(dwd));
  const Vec start = dwd.default_start();
  out.push_back({"dwd", dg, [start](std::mt19937_64& g) { return Vec(start + randn(start.size(), g, 0.05)); }});
  Mat q = Mat::Random(4, 4);
  q = q * q.transpose() + Mat::Identity(4, 4);
  out.push_back({"quadratic", std::make_shared<QuadraticModel>(q, Vec::Ones(4)),
                 [](std::mt19937_64& g) { return randn(4, g); }});
  return out;
}

}  // namespace

TEST_CASE("oracle examples") {
  Mat w(1, 2);
  w << 1, 1;
  const PortfolioModel pf(w);
  const Vec x = Vec::Constant(2, 0.5);
  CHECK(std::abs(pf.value(x)) < 1e-16);
  CHECK(pf.gradient(x)(0) == Approx(-1.0));
  CHECK(pf.gradient(x)(1) == Approx(-1.0));

  const GlmModel lg(DesignMatrix(Mat(Mat::Identity(2, 2))), Vec::Zero(2), Vec::Constant(2, 0.5),
                    LossAtom::logistic(), Vec::Zero(2), Vec::Zero(2));
  const Vec z = Vec::Zero(2);
  CHECK(lg.value(z) == Approx(std::log(2.0)));
  CHECK(lg.gradient(z)(0) == Approx(-0.25));
  CHECK(lg.gradient(z)(1) == Approx(-0.25));
  const Mat h = lg.hessian(z);
  CHECK(h(0, 0) == Approx(0.125));
  CHECK(h(1, 1) == Approx(0.125));
  CHECK(h(0, 1) == 0.0);

  for (const Instance& inst : instances()) {
    std::mt19937_64 gen(1);
    const Vec x0 = inst.sample(gen);
    CHECK(inst.model->hvp(x0, Vec::Zero(x0.size())).norm() == 0.0);
  }
}

TEST_CASE("domain violations name the first violating row") {
  Mat w(3, 2);
  w << 1, 0.5, 1, 2, 1, 3;
  const PortfolioModel pf(w);
  const Vec x = (Vec(2) << 1.0, -0.6).finished();
  REQUIRE(pf.domain_violation(x).has_value());
  CHECK(*pf.domain_violation(x) == 1);
  try {
    pf.value(x);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.row() == 1);
  }
  CHECK_THROWS_AS(pf.gradient(Vec::Ones(3)), InvalidArgument);
}

TEST_CASE("GLM rejects atoms outside nu in [2, 3]") {
  const DesignMatrix a(Mat(Mat::Identity(2, 2)));
  CHECK_THROWS_AS(GlmModel::uniform(a, LossAtom::entropy(), 0.1), InvalidArgument);
  CHECK_THROWS_AS(GlmModel::uniform(a, LossAtom::positive_power(1.5), 0.1), InvalidArgument);
  CHECK_NOTHROW(GlmModel::uniform(a, LossAtom::log_barrier(), 0.1));
}

TEST_CASE("GLM parameters") {
  const Dataset d = gen_logistic(200, 20, 7);
  const GlmModel lg = logistic_model(d, 1e-5);
  const GscParams native = glm_gsc_params(lg, GlmTarget::native);
  CHECK(native.nu == 2.0);
  CHECK(native.m == Approx(1.0).epsilon(1e-12));
  const GscParams p3 = glm_gsc_params(lg, GlmTarget::nu3);
  CHECK(p3.nu == 3.0);
  CHECK(p3.m == Approx(316.2277660168).epsilon(1e-9));

  const GlmModel unit(DesignMatrix(Mat(Mat::Ones(1, 1))), Vec::Zero(1), Vec::Ones(1), LossAtom::neg_power(1.0),
                      Vec::Zero(1), Vec::Zero(1));
  const GscParams pd = glm_gsc_params(unit, GlmTarget::native);
  CHECK(pd.nu == Approx(8.0 / 3.0));
  CHECK(pd.m == Approx(2.38110).epsilon(1e-5));

  const GlmModel unreg = logistic_model(d, 0.0);
  CHECK_THROWS_AS(glm_gsc_params(unreg, GlmTarget::nu3), InvalidArgument);
}

TEST_CASE("DWD construction") {
  DwdModel m;
  m.a = DesignMatrix(Mat(Mat::Ones(1, 1)));
  m.y = Vec::Ones(1);
  m.c = Vec::Ones(1);
  const GlmModel g = dwd_as_glm(m);
  CHECK(g.dim() == 3);
  CHECK(g.design().row_norms()(0) == Approx(std::sqrt(3.0)));
  CHECK(g.strong_convexity().value() == Approx(1e-7));
  CHECK(g.atom().params().nu == Approx(8.0 / 3.0));
  CHECK(g.linear()(2) == 1.0);
  CHECK(g.q_diag()(0) == 1e-5);
  CHECK(g.q_diag()(1) == 1e-5);
  CHECK(g.q_diag()(2) == 1e-7);
}

TEST_CASE("gradients match finite differences and hvp matches the Hessian") {
  for (const Instance& inst : instances()) {
    CAPTURE(inst.name);
    std::mt19937_64 gen(17);
    for (int i = 0; i < 50; ++i) {
      const Vec x = inst.sample(gen);
      REQUIRE(inst.model->in_domain(x));
      const Vec g = inst.model->gradient(x);
      const Vec fd = fd_gradient(*inst.model, x);
      CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
      const Vec v = randn(x.size(), gen);
      const Vec hv = inst.model->hvp(x, v);
      CHECK((hv - inst.model->hessian(x) * v).norm() <= 1e-10 * std::max(1.0, hv.norm()));
    }
  }
}

TEST_CASE("sparse and dense designs agree") {
  const Dataset d = gen_logistic(50, 8, 3);
  const GlmModel sp = GlmModel::uniform(DesignMatrix(d.a), LossAtom::logistic(), 1e-3);
  const GlmModel de = GlmModel::uniform(DesignMatrix(Mat(d.a)), LossAtom::logistic(), 1e-3);
  std::mt19937_64 gen(2);
  const Vec x = randn(8, gen);
  CHECK(sp.value(x) == Approx(de.value(x)).epsilon(1e-14));
  CHECK((sp.gradient(x) - de.gradient(x)).norm() < 1e-14);
  CHECK((sp.hessian(x) - de.hessian(x)).norm() < 1e-14);
}

TEST_CASE("certified parameters bound the directional third derivative") {
  struct Case {
    std::string name;
    std::shared_ptr<Model> model;
    GscParams params;
    std::function<Vec(std::mt19937_64&)> sample;
  };
  std::vector<Case> cases;
  for (const Instance& inst : instances()) {
    if (inst.name == "quadratic") continue;
    cases.push_back({inst.name, inst.model, inst.model->native_params(), inst.sample});
    if (inst.name == "logistic") {
      cases.push_back({"logistic order 3", inst.model, inst.model->params(NuChoice::force_3), inst.sample});
    }
  }
  for (const Case& c : cases) {
    CAPTURE(c.name);
    std::mt19937_64 gen(23);
    for (int i = 0; i < 100; ++i) {
      const Vec x = c.sample(gen);
      const Vec u = randn(x.size(), gen);
      Vec v = randn(x.size(), gen);
      // Keep x +- h v inside the domain.
      v *= 0.01 / v.norm();
      const double h = 1e-4;
      const double third = (u.dot(c.model->hvp(x + h * v, u)) - u.dot(c.model->hvp(x - h * v, u))) / (2 * h);
      const Mat hx = c.model->hessian(x);
      const double ux = std::sqrt(u.dot(hx * u));
      const double vx = std::sqrt(v.dot(hx * v));
      const double bound = c.params.m * ux * ux * std::pow(vx, c.params.nu - 2) * std::pow(v.norm(), 3 - c.params.nu);
      CHECK(std::abs(third) <= bound * (1 + 1e-4));
    }
  }
}

TEST_CASE("affine and counting wrappers") {
  auto inner = std::make_shared<PortfolioModel>(gen_portfolio(10, 3, 7));
  Mat a = Mat::Identity(3, 3);
  a(0, 1) = 0.2;
  const AffineModel aff(inner, a);
  const Vec x = Vec::Constant(3, 1.0 / 3.0);
  CHECK(aff.value(x) == Approx(inner->value(a * x)));
  CHECK((aff.gradient(x) - a.transpose() * inner->gradient(a * x)).norm() < 1e-12);
  CHECK(aff.native_params().m == inner->native_params().m);

  CountingModel counting(*inner);
  counting.value(x);
  counting.value(x);
  counting.gradient(x);
  CHECK(counting.values == 2);
  CHECK(counting.gradients == 1);
  CHECK(counting.hessians == 0);
}
