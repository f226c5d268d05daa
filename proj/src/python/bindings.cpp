#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gsc/bench_io.hpp"
#include "gsc/errors.hpp"
#include "gsc/quasi_newton.hpp"

namespace py = pybind11;
using namespace gsc;

namespace {

NuChoice parse_nu(const std::string& nu) {
  if (nu == "2") return NuChoice::force_2;
  if (nu == "3") return NuChoice::force_3;
  if (nu == "native") return NuChoice::native;
  throw InvalidArgument("nu must be '2', '3' or 'native'");
}

StepRule parse_step(const std::string& step) {
  if (step == "analytic") return StepRule::analytic;
  if (step == "linesearch") return StepRule::linesearch_floor;
  if (step == "backtracking") return StepRule::backtracking;
  if (step == "full") return StepRule::full;
  if (step == "auto") return StepRule::automatic;
  throw InvalidArgument("unknown step rule '" + step + "'");
}

ProxSpec parse_prox(const std::string& kind, double weight) {
  if (kind == "zero") return ProxSpec::zero();
  if (kind == "l1") return ProxSpec::l1(weight);
  if (kind == "simplex") return ProxSpec::simplex();
  throw InvalidArgument("regularizer must be 'zero', 'l1' or 'simplex'");
}

py::list trace_to_list(const std::vector<IterRecord>& trace) {
  py::list out;
  for (const auto& r : trace) {
    py::dict d;
    d["iter"] = r.k;
    d["phase"] = to_string(r.phase);
    d["f"] = r.f;
    d["grad_norm"] = r.grad_norm;
    d["lambda"] = r.lambda;
    d["beta"] = r.beta;
    d["d_k"] = r.d_k;
    d["tau"] = r.tau;
    d["cum_time_s"] = r.cum_time;
    out.append(d);
  }
  return out;
}

py::dict result_to_dict(const SolveResult& r) {
  py::dict d;
  d["x"] = r.x;
  d["f"] = r.f;
  d["status"] = to_string(r.status);
  d["iterations"] = r.iterations;
  d["evaluations"] = r.evaluations;
  d["grad_norm"] = r.grad_norm;
  d["lambda"] = r.lambda;
  d["nu"] = r.params.nu;
  d["m"] = r.params.m;
  d["seconds"] = r.seconds;
  d["message"] = r.message;
  d["trace"] = trace_to_list(r.trace);
  return d;
}

SolveOptions solve_options(const std::string& nu, const std::string& step, double eps, int max_iter) {
  SolveOptions o;
  o.nu_choice = parse_nu(nu);
  o.step_rule = parse_step(step);
  o.eps = eps;
  o.max_iter = max_iter;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Generalized self-concordant optimization toolkit";

  auto base = py::register_exception<GscError>(m, "GscError");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  // Kernel.
  m.def("omega_bar_bar", &omega_bar_bar, py::arg("nu"), py::arg("tau"));
  m.def("omega_bar", &omega_bar, py::arg("nu"), py::arg("tau"));
  m.def("omega", &omega, py::arg("nu"), py::arg("tau"));
  m.def(
      "kappa_bounds", [](double nu, double t) {
        const KappaBounds kb = kappa_bounds(nu, t);
        return py::make_tuple(kb.lower, kb.upper);
      },
      py::arg("nu"), py::arg("t"));
  m.def("r_nu", &r_nu, py::arg("nu"), py::arg("t"));
  m.def(
      "step_size", [](double nu, double mm, double lambda, double beta) {
        const StepSize s = step_size(nu, mm, lambda, beta);
        return py::make_tuple(s.tau, s.d_k);
      },
      py::arg("nu"), py::arg("m"), py::arg("lambda_"), py::arg("beta"));
  m.def("descent_estimate", &descent_estimate, py::arg("nu"), py::arg("lambda_"), py::arg("d_k"), py::arg("tau"));
  m.def(
      "phase2_threshold", [](double nu, const std::string& solver) {
        if (solver != "newton" && solver != "prox_newton") throw InvalidArgument("solver must be newton or prox_newton");
        const Phase2Threshold t =
            phase2_threshold(nu, solver == "newton" ? SolverKind::newton : SolverKind::prox_newton);
        py::dict d;
        d["d_star"] = t.d_star;
        d["computed_root"] = t.computed_root;
        d["radius"] = t.radius;
        return d;
      },
      py::arg("nu"), py::arg("solver") = "newton");

  // Atoms.
  py::class_<LossAtom>(m, "LossAtom")
      .def_static("logistic", &LossAtom::logistic)
      .def_static("exponential", &LossAtom::exponential)
      .def_static("neg_power", &LossAtom::neg_power, py::arg("q"))
      .def_static("entropy", &LossAtom::entropy)
      .def_static("log_barrier", &LossAtom::log_barrier)
      .def_static("entropy_barrier", &LossAtom::entropy_barrier)
      .def_static("positive_power", &LossAtom::positive_power, py::arg("q"))
      .def_static(
          "smoothed_l1",
          [](double gamma, const std::string& variant) {
            if (variant != "sqrt" && variant != "logsumexp") throw InvalidArgument("variant must be sqrt or logsumexp");
            return LossAtom::smoothed_l1(gamma, variant == "sqrt" ? SmoothingVariant::sqrt : SmoothingVariant::logsumexp);
          },
          py::arg("gamma"), py::arg("variant") = "sqrt")
      .def_static("smoothed_hinge", &LossAtom::smoothed_hinge, py::arg("gamma"))
      .def_property_readonly("name", &LossAtom::name)
      .def("eval", &LossAtom::eval, py::arg("t"), py::arg("order") = 0)
      .def("params",
           [](const LossAtom& a) {
             const GscParams p = a.params();
             return py::make_tuple(p.m, p.nu);
           })
      .def(
          "certificate",
          [](const LossAtom& a, int samples) { return gsc_certificate(a, a.representative_interval(), samples); },
          py::arg("samples") = 4001);

  // Models.
  py::class_<Model, std::shared_ptr<Model>>(m, "Model")
      .def_property_readonly("dim", &Model::dim)
      .def("value", &Model::value)
      .def("gradient", &Model::gradient)
      .def("hessian", &Model::hessian)
      .def("hvp", &Model::hvp)
      .def("in_domain", &Model::in_domain)
      .def(
          "params",
          [](const Model& mm, const std::string& nu) {
            const GscParams p = mm.params(parse_nu(nu));
            return py::make_tuple(p.m, p.nu);
          },
          py::arg("nu") = "native");

  py::class_<GlmModel, Model, std::shared_ptr<GlmModel>>(m, "GlmModel")
      .def(py::init([](const Mat& a, const LossAtom& atom, double gamma) {
             return std::make_shared<GlmModel>(GlmModel::uniform(DesignMatrix(a), atom, gamma));
           }),
           py::arg("a"), py::arg("atom"), py::arg("gamma"));
  py::class_<PortfolioModel, Model, std::shared_ptr<PortfolioModel>>(m, "PortfolioModel")
      .def(py::init<Mat>(), py::arg("returns"));
  py::class_<QuadraticModel, Model, std::shared_ptr<QuadraticModel>>(m, "QuadraticModel")
      .def(py::init<Mat, Vec>(), py::arg("q"), py::arg("c"));

  m.def(
      "logistic_model",
      [](const Mat& a, const Vec& labels, double gamma) {
        Dataset d;
        d.a = a.sparseView();
        d.labels = labels;
        d.meta.n = a.rows();
        d.meta.p = a.cols();
        return std::make_shared<GlmModel>(logistic_model(d, gamma));
      },
      py::arg("a"), py::arg("labels"), py::arg("gamma") = 1e-5,
      "Regularized logistic loss with labels folded into the rows.");

  // Solvers.
  m.def(
      "minimize",
      [](const Model& model, const Vec& x0, const std::string& nu, const std::string& step, double eps, int max_iter) {
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = minimize(model, x0, solve_options(nu, step, eps, max_iter));
        }
        return result_to_dict(r);
      },
      py::arg("model"), py::arg("x0"), py::arg("nu") = "native", py::arg("step") = "analytic", py::arg("eps") = 1e-8,
      py::arg("max_iter") = 500);
  m.def(
      "minimize_composite",
      [](const Model& model, const Vec& x0, const std::string& regularizer, double weight, const std::string& nu,
         const std::string& step, double eps, int max_iter) {
        CompositeOptions o;
        static_cast<SolveOptions&>(o) = solve_options(nu, step, eps, max_iter);
        const CompositeProblem prob{model, parse_prox(regularizer, weight), x0};
        CompositeResult r;
        {
          py::gil_scoped_release release;
          r = minimize_composite(prob, o);
        }
        return result_to_dict(r);
      },
      py::arg("model"), py::arg("x0"), py::arg("regularizer") = "zero", py::arg("weight") = 0.0,
      py::arg("nu") = "native", py::arg("step") = "analytic", py::arg("eps") = 1e-8, py::arg("max_iter") = 500);
  m.def(
      "minimize_bfgs",
      [](const Model& model, const Vec& x0, double eps, int max_iter) {
        QnOptions o;
        o.eps = eps;
        o.max_iter = max_iter;
        QnResult r;
        {
          py::gil_scoped_release release;
          r = minimize_qn(model, x0, o);
        }
        return result_to_dict(r);
      },
      py::arg("model"), py::arg("x0"), py::arg("eps") = 1e-8, py::arg("max_iter") = 500);
  m.def(
      "fast_gradient",
      [](const Model& model, const Vec& x0, double eps, int max_iter) {
        BaselineOptions o;
        o.max_iter = max_iter;
        return result_to_dict(fast_gradient(model, x0, eps, o));
      },
      py::arg("model"), py::arg("x0"), py::arg("eps") = 1e-8, py::arg("max_iter") = 100000);

  // Prox.
  m.def(
      "prox", [](const Vec& u, const std::string& regularizer, double weight, double step) {
        return prox_apply(parse_prox(regularizer, weight), u, step);
      },
      py::arg("u"), py::arg("regularizer"), py::arg("weight") = 0.0, py::arg("step") = 1.0);
  m.def("project_simplex", &project_simplex, py::arg("u"));

  // Data.
  m.def(
      "gen_logistic", [](Index n, Index p, std::uint64_t seed) {
        const Dataset d = gen_logistic(n, p, seed);
        return py::make_tuple(Mat(d.a), d.labels);
      },
      py::arg("n"), py::arg("p"), py::arg("seed") = 7);
  m.def("gen_portfolio", &gen_portfolio, py::arg("n"), py::arg("p"), py::arg("seed") = 7);
  m.def(
      "read_libsvm", [](const std::string& path, bool normalize) {
        const Dataset d = read_libsvm(path, normalize);
        return py::make_tuple(Mat(d.a), d.labels);
      },
      py::arg("path"), py::arg("normalize") = true);
}
