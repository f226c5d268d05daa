#include "cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "criteria.hpp"
#include "gsc/bench_io.hpp"
#include "gsc/errors.hpp"
#include "gsc/quasi_newton.hpp"

namespace gsc::cli {

namespace {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sfmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool one_of(const std::string& s, std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (s == o) return true;
  }
  return false;
}

NuChoice nu_choice(const std::string& nu) {
  if (nu == "2") return NuChoice::force_2;
  if (nu == "3") return NuChoice::force_3;
  return NuChoice::native;
}

StepRule step_rule(const std::string& step) {
  if (step == "linesearch") return StepRule::linesearch_floor;
  if (step == "full") return StepRule::full;
  if (step == "auto") return StepRule::automatic;
  return StepRule::analytic;
}

int threads_from_env() {
  if (const char* env = std::getenv("GSC_SOLVE_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

// Whitespace- or comma-separated rows of a dense matrix; '#' starts a comment.
Mat read_dense_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& ch : line) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'", lineno);
      }
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": ragged row", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows", 0);
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Dataset load_labelled(const RunConfig& cfg) {
  if (cfg.synthetic) return gen_logistic(cfg.synthetic->n, cfg.synthetic->p, cfg.seed);
  return read_libsvm(cfg.data, cfg.normalize);
}

struct Outcome {
  const SolveResult* result = nullptr;
  std::optional<double> train_error;
};

void emit(const RunConfig& cfg, const Outcome& o, std::ostream& out) {
  const SolveResult& r = *o.result;
  const double seconds = cfg.deterministic ? 0.0 : round_to_millis(r.seconds);
  out << cfg.command << " solver=" << cfg.solver << " status=" << to_string(r.status) << " iters=" << r.iterations
      << " time=" << sfmt("%.3f", seconds) << "s f=" << sfmt("%.17g", r.f)
      << " grad_norm=" << sfmt("%.6e", r.grad_norm);
  if (o.train_error) out << " train_error=" << sfmt("%.6f", *o.train_error);
  out << "\n";
  if (!cfg.out.empty()) write_trace(r.trace, cfg.out, trace_format_from_path(cfg.out), !cfg.deterministic);
}

int exit_for(const SolveResult& r, std::ostream& err) {
  switch (r.status) {
    case Status::converged:
      return kConverged;
    case Status::max_iter:
      return kMaxIter;
    default:
      err << "error: solver stopped: " << (r.message.empty() ? to_string(r.status) : r.message) << "\n";
      return kUsageOrData;
  }
}

// Smooth solvers shared by fit-logistic and fit-dwd.
SolveResult solve_smooth(const RunConfig& cfg, const GlmModel& model, const Vec& x0) {
  SolveOptions opts;
  opts.nu_choice = nu_choice(cfg.nu);
  opts.step_rule = step_rule(cfg.step);
  opts.eps = cfg.eps;
  opts.max_iter = cfg.max_iter;
  if (cfg.solver == "newton") return minimize(model, x0, opts);
  if (cfg.solver == "bfgs") {
    QnOptions qo;
    static_cast<SolveOptions&>(qo) = opts;
    return minimize_qn(model, x0, qo);
  }
  if (cfg.solver == "fgm") {
    BaselineOptions bo;
    bo.max_iter = cfg.max_iter;
    return fast_gradient(model, x0, cfg.eps, bo);
  }
  // prox-newton with an optional l1 term
  CompositeOptions co;
  static_cast<SolveOptions&>(co) = opts;
  const CompositeProblem prob{model, cfg.l1 > 0.0 ? ProxSpec::l1(cfg.l1) : ProxSpec::zero(), x0};
  return minimize_composite(prob, co);
}

int run_logistic(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Dataset data = load_labelled(cfg);
  for (const auto& w : data.warnings) err << "warning: " << w << "\n";
  const GlmModel model = logistic_model(data, cfg.gamma);
  const SolveResult r = solve_smooth(cfg, model, Vec::Zero(model.dim()));
  Outcome o{&r, training_error(data.a, data.labels, r.x)};
  emit(cfg, o, out);
  return exit_for(r, err);
}

int run_dwd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Dataset data = load_labelled(cfg);
  for (const auto& w : data.warnings) err << "warning: " << w << "\n";
  const DwdModel dwd = dwd_model(data, cfg.q, cfg.gammas[0], cfg.gammas[1], cfg.gammas[2]);
  const GlmModel model = dwd_as_glm(dwd);
  const SolveResult r = solve_smooth(cfg, model, dwd.default_start());
  // Classifier sign(a^T w + mu) on the original labels.
  const Index p = dwd.p();
  SpMat aug(data.a.rows(), p + 1);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (Index i = 0; i < data.a.outerSize(); ++i)
      for (SpMat::InnerIterator it(data.a, i); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (Index i = 0; i < data.a.rows(); ++i) trip.emplace_back(i, p, 1.0);
    aug.setFromTriplets(trip.begin(), trip.end());
  }
  Outcome o{&r, training_error(aug, data.labels, r.x.head(p + 1))};
  emit(cfg, o, out);
  return exit_for(r, err);
}

int run_portfolio(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Mat w = cfg.synthetic ? gen_portfolio(cfg.synthetic->n, cfg.synthetic->p, cfg.seed) : read_dense_matrix(cfg.data);
  const PortfolioModel model(w);
  const Vec x0 = Vec::Constant(model.dim(), 1.0 / static_cast<double>(model.dim()));
  const CompositeProblem prob{model, ProxSpec::simplex(), x0};
  BaselineOptions bo;
  bo.max_iter = cfg.max_iter;
  SolveResult r;
  if (cfg.solver == "prox-newton") {
    CompositeOptions co;
    co.nu_choice = nu_choice(cfg.nu);
    co.step_rule = step_rule(cfg.step);
    co.eps = cfg.eps;
    co.max_iter = cfg.max_iter;
    r = minimize_composite(prob, co);
  } else if (cfg.solver == "pg-bb") {
    r = pg_bb(prob, cfg.eps, bo);
  } else {
    r = frank_wolfe(prob, cfg.eps, cfg.solver == "fw-ls", bo);
  }
  emit(cfg, Outcome{&r, std::nullopt}, out);
  return exit_for(r, err);
}

int run_kernels(const RunConfig& cfg, std::ostream& out) {
  const double nu = cfg.nu_value;
  const double tau = cfg.tau;
  auto line = [&](const std::string& name, double v) { out << name << " = " << sfmt("%.17g", v) << "\n"; };
  line("omega_bar_bar", omega_bar_bar(nu, tau));
  line("omega_bar", omega_bar(nu, tau));
  line("omega", omega(nu, tau));
  if (tau > 0.0 && (nu == 2.0 || tau < 1.0)) {
    const KappaBounds kb = kappa_bounds(nu, tau);
    line("kappa_lower", kb.lower);
    line("kappa_upper", kb.upper);
  }
  if (nu >= 2.0 && nu <= 3.0 && tau >= 0.0 && tau < 1.0) line("r_nu", r_nu(nu, tau));
  return kConverged;
}

int run_bench(const RunConfig& cfg, std::ostream& out) {
  std::vector<int> ids = cfg.criteria;
  if (ids.empty()) {
    for (int id = 1; id <= acceptance::kCriteriaCount; ++id) ids.push_back(id);
  }
  int failed = 0;
  for (int id : ids) {
    const auto r = acceptance::run_criterion(id);
    if (!r.passed) ++failed;
    out << acceptance::format_line(r) << "\n" << std::flush;
  }
  out << (ids.size() - static_cast<std::size_t>(failed)) << "/" << ids.size() << " criteria passed\n";
  return failed == 0 ? kConverged : kBenchFailed;
}

}  // namespace

Synthetic parse_synthetic(const std::string& text) {
  Synthetic s;
  std::istringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw Usage("--synthetic: expected key=value, got '" + part + "'");
    const std::string key = part.substr(0, eq);
    long value = 0;
    try {
      std::size_t used = 0;
      value = std::stol(part.substr(eq + 1), &used);
      if (used != part.size() - eq - 1) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw Usage("--synthetic: bad integer in '" + part + "'");
    }
    if (key == "n") {
      s.n = value;
    } else if (key == "p") {
      s.p = value;
    } else {
      throw Usage("--synthetic: unknown key '" + key + "'");
    }
  }
  if (s.n < 1 || s.p < 1) throw Usage("--synthetic: need n >= 1 and p >= 1");
  return s;
}

std::string validate(const RunConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "bench" || c == "kernels") {
    if (c == "kernels") {
      if (!(cfg.nu_value >= 2.0)) return "--nu: kernels need nu >= 2";
      if (cfg.nu_value > 2.0 && !(cfg.tau < 1.0)) return "--tau: must be < 1 for nu > 2";
    }
    return {};
  }
  if (cfg.data.empty() == !cfg.synthetic.has_value()) return "--data: give exactly one of --data or --synthetic";
  if (!(cfg.eps > 0.0)) return "--eps: must be > 0";
  if (cfg.max_iter < 0) return "--max-iter: must be >= 0";

  const bool portfolio = c == "portfolio";
  if (portfolio) {
    if (!one_of(cfg.solver, {"prox-newton", "fw", "fw-ls", "pg-bb"})) {
      return "--solver: portfolio supports prox-newton, fw, fw-ls, pg-bb";
    }
    if (cfg.nu_given && cfg.nu != "native") return "--nu: the portfolio objective is used with its native nu = 3";
  } else {
    if (one_of(cfg.solver, {"fw", "fw-ls", "pg-bb"})) return "--solver: " + cfg.solver + " requires the portfolio command";
    if (!one_of(cfg.solver, {"newton", "prox-newton", "bfgs", "fgm"})) return "--solver: unknown solver '" + cfg.solver + "'";
  }
  const bool second_order = one_of(cfg.solver, {"newton", "prox-newton"});
  if (cfg.step_given && !second_order) return "--step: applies only to newton and prox-newton";
  if (cfg.nu_given && !one_of(cfg.solver, {"newton", "prox-newton", "bfgs"})) {
    return "--nu: applies only to newton, prox-newton and bfgs";
  }
  if (cfg.l1 < 0.0) return "--l1: must be >= 0";
  if (cfg.l1 > 0.0 && (c != "fit-logistic" || cfg.solver != "prox-newton")) {
    return "--l1: requires fit-logistic with --solver prox-newton";
  }
  if (c == "fit-logistic") {
    if (!(cfg.gamma >= 0.0)) return "--gamma: must be >= 0";
    if ((cfg.nu == "3" || cfg.solver == "fgm") && !(cfg.gamma > 0.0)) {
      return "--gamma: must be > 0 for --nu 3 and --solver fgm";
    }
  }
  if (c == "fit-dwd") {
    if (cfg.gammas.size() != 3) return "--gammas: expected three values g1,g2,g3";
    for (double g : cfg.gammas) {
      if (!(g > 0.0)) return "--gammas: values must be > 0";
    }
    if (!(cfg.q > 0.0)) return "--q: must be > 0";
  }
  return {};
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (const std::string msg = validate(cfg); !msg.empty()) {
    err << "error: " << msg << "\n";
    return kUsageOrData;
  }
  const int threads = cfg.deterministic ? 1 : (cfg.threads > 0 ? cfg.threads : threads_from_env());
  Eigen::setNbThreads(threads);
  try {
    if (cfg.command == "kernels") return run_kernels(cfg, out);
    if (cfg.command == "bench") return run_bench(cfg, out);
    if (cfg.command == "fit-logistic") return run_logistic(cfg, out, err);
    if (cfg.command == "fit-dwd") return run_dwd(cfg, out, err);
    return run_portfolio(cfg, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const GscError& e) {
    err << "error: " << e.what() << "\n";
  }
  return kUsageOrData;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized self-concordant optimization toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string synthetic;

  auto add_solve_flags = [&](CLI::App* sub, const char* default_solver) {
    cfg.solver = default_solver;
    auto* data = sub->add_option("--data", cfg.data, "input file");
    auto* syn = sub->add_option("--synthetic", synthetic, "synthetic instance, e.g. n=200,p=20");
    data->excludes(syn);
    sub->add_option("--solver", cfg.solver, "solver")->default_str(default_solver);
    sub->add_option("--nu", cfg.nu, "self-concordance order used by the solver")
        ->check(CLI::IsMember({"2", "3", "native"}));
    sub->add_option("--step", cfg.step, "step rule")->check(CLI::IsMember({"analytic", "linesearch", "full", "auto"}));
    sub->add_option("--eps", cfg.eps, "tolerance")->default_val(1e-8);
    sub->add_option("--max-iter", cfg.max_iter, "iteration budget")->default_val(500);
    sub->add_option("--seed", cfg.seed, "seed for synthetic data")->default_val(7);
    sub->add_option("--out", cfg.out, "trace path (.csv or .json)");
    sub->add_flag("--deterministic", cfg.deterministic, "zero timings and force one thread");
    sub->add_option("--threads", cfg.threads, "linear-algebra threads (default GSC_SOLVE_THREADS or 1)");
  };

  CLI::App* logistic = app.add_subcommand("fit-logistic", "regularized logistic regression");
  add_solve_flags(logistic, "newton");
  logistic->add_option("--gamma", cfg.gamma, "ridge weight")->default_val(1e-5);
  logistic->add_option("--l1", cfg.l1, "l1 weight (prox-newton)");
  logistic->add_flag("!--no-normalize", cfg.normalize, "keep LIBSVM rows unnormalized");

  CLI::App* dwd = app.add_subcommand("fit-dwd", "distance-weighted discrimination");
  add_solve_flags(dwd, "newton");
  dwd->add_option("--q", cfg.q, "DWD power")->default_val(1.0);
  dwd->add_option("--gammas", cfg.gammas, "g1,g2,g3")->delimiter(',')->expected(3);
  dwd->add_flag("!--no-normalize", cfg.normalize, "keep LIBSVM rows unnormalized");

  CLI::App* portfolio = app.add_subcommand("portfolio", "log-optimal portfolio on the simplex");
  add_solve_flags(portfolio, "prox-newton");

  CLI::App* bench = app.add_subcommand("bench", "run the acceptance matrix");
  bench->add_option("--criteria", cfg.criteria, "subset of criterion ids")->delimiter(',')->check(CLI::Range(1, 12));

  CLI::App* kernels = app.add_subcommand("kernels", "print kernel function values");
  kernels->add_option("--nu", cfg.nu_value, "order")->default_val(2.0);
  kernels->add_option("--tau", cfg.tau, "argument")->default_val(1.0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kConverged : kUsageOrData;
  }

  for (CLI::App* sub : {logistic, dwd, portfolio, bench, kernels}) {
    if (sub->parsed()) {
      cfg.command = sub->get_name();
      if (sub != bench && sub != kernels) {
        cfg.step_given = sub->get_option("--step")->count() > 0;
        cfg.nu_given = sub->get_option("--nu")->count() > 0;
        // The solver default differs by command; CLI11 keeps the last lambda's.
        if (sub->get_option("--solver")->count() == 0) cfg.solver = sub == portfolio ? "prox-newton" : "newton";
      }
    }
  }
  if (!synthetic.empty()) {
    try {
      cfg.synthetic = parse_synthetic(synthetic);
    } catch (const Usage& e) {
      err << "error: " << e.what() << "\n";
      return kUsageOrData;
    }
  }
  return execute(cfg, out, err);
}

}  // namespace gsc::cli
