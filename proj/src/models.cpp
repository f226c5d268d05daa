#include "gsc/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsc/errors.hpp"

namespace gsc {

GscParams Model::params(NuChoice choice) const {
  const GscParams p = native_params();
  validate(p);
  switch (choice) {
    case NuChoice::native:
      return p;
    case NuChoice::force_3: {
      if (std::abs(p.nu - 3.0) < 1e-12) return p;
      const auto mu = strong_convexity();
      if (!mu || !(*mu > 0.0)) {
        throw InvalidArgument("force_3 requires a positive strong convexity modulus");
      }
      return reparam(p, ReparamMode::strong_convexity, *mu);
    }
    case NuChoice::force_2: {
      if (std::abs(p.nu - 2.0) < 1e-12) return p;
      const auto lip = lipschitz_gradient();
      if (!lip) throw InvalidArgument("force_2 requires a finite gradient Lipschitz constant");
      return reparam(p, ReparamMode::lipschitz_gradient, *lip);
    }
  }
  return p;
}

void Model::check_domain(const Vec& x) const {
  if (x.size() != dim()) {
    throw InvalidArgument("point has dimension " + std::to_string(x.size()) + ", model expects " +
                          std::to_string(dim()));
  }
  if (auto row = domain_violation(x)) {
    throw DomainError("point outside the model domain at row " + std::to_string(*row), static_cast<long>(*row));
  }
}

// ---------------------------------------------------------------- DesignMatrix

Index DesignMatrix::rows() const {
  return std::visit([](const auto& m) { return static_cast<Index>(m.rows()); }, data_);
}

Index DesignMatrix::cols() const {
  return std::visit([](const auto& m) { return static_cast<Index>(m.cols()); }, data_);
}

Vec DesignMatrix::times(const Vec& x) const {
  return std::visit([&](const auto& m) -> Vec { return m * x; }, data_);
}

Vec DesignMatrix::transpose_times(const Vec& v) const {
  return std::visit([&](const auto& m) -> Vec { return m.transpose() * v; }, data_);
}

Mat DesignMatrix::weighted_gram(const Vec& d) const {
  if (const auto* dense = std::get_if<Mat>(&data_)) {
    const Mat scaled = d.asDiagonal() * (*dense);
    return dense->transpose() * scaled;
  }
  const auto& sp = std::get<SpMat>(data_);
  const SpMat scaled = d.asDiagonal() * sp;
  const Eigen::SparseMatrix<double> gram = sp.transpose() * scaled;
  return Mat(gram);
}

Vec DesignMatrix::row_norms() const {
  if (const auto* dense = std::get_if<Mat>(&data_)) return dense->rowwise().norm();
  const auto& sp = std::get<SpMat>(data_);
  Vec out(sp.rows());
  for (Index i = 0; i < sp.outerSize(); ++i) {
    double s = 0.0;
    for (SpMat::InnerIterator it(sp, i); it; ++it) s += it.value() * it.value();
    out(i) = std::sqrt(s);
  }
  return out;
}

Mat DesignMatrix::to_dense() const {
  if (const auto* dense = std::get_if<Mat>(&data_)) return *dense;
  return Mat(std::get<SpMat>(data_));
}

double largest_weighted_gram_eigenvalue(const DesignMatrix& a, const Vec& d, int max_iter, double tol) {
  const Index p = a.cols();
  if (p == 0) return 0.0;
  Vec v(p);
  for (Index i = 0; i < p; ++i) v(i) = 1.0 + 0.5 * std::sin(static_cast<double>(i + 1));
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec u = a.transpose_times(d.cwiseProduct(a.times(v)));
    const double next = v.dot(u);
    const double nu = u.norm();
    if (nu == 0.0) return 0.0;
    v = u / nu;
    if (it > 0 && std::abs(next - lam) <= tol * std::abs(next)) {
      lam = next;
      break;
    }
    lam = next;
  }
  return lam;
}

// -------------------------------------------------------------------- GlmModel

GlmModel::GlmModel(DesignMatrix a, Vec b, Vec w, LossAtom atom, Vec q_diag, Vec c)
    : a_(std::move(a)), b_(std::move(b)), w_(std::move(w)), atom_(atom), q_(std::move(q_diag)), c_(std::move(c)) {
  const Index n = a_.rows();
  const Index p = a_.cols();
  if (b_.size() != n || w_.size() != n) throw InvalidArgument("GlmModel: offsets and weights need n entries");
  if (q_.size() != p || c_.size() != p) throw InvalidArgument("GlmModel: q_diag and c need p entries");
  if (n > 0 && !(w_.minCoeff() > 0.0)) throw InvalidArgument("GlmModel: weights must be positive");
  if (p > 0 && !(q_.minCoeff() >= 0.0)) throw InvalidArgument("GlmModel: q_diag must be nonnegative");
  const double nu = atom_.params().nu;
  if (nu < 2.0 - 1e-12 || nu > 3.0 + 1e-12) {
    throw InvalidArgument("GlmModel: atom " + atom_.name() + " has nu outside [2, 3]");
  }
  row_norms_ = a_.row_norms();
}

GlmModel GlmModel::uniform(DesignMatrix a, LossAtom atom, double gamma) {
  const Index n = a.rows();
  const Index p = a.cols();
  if (!(gamma >= 0.0)) throw InvalidArgument("GlmModel: gamma must be >= 0");
  const double w = n > 0 ? 1.0 / static_cast<double>(n) : 1.0;
  return GlmModel(std::move(a), Vec::Zero(n), Vec::Constant(n, w), atom, Vec::Constant(p, gamma), Vec::Zero(p));
}

GscParams GlmModel::native_params() const {
  const GscParams ap = atom_.params();
  double m = 0.0;
  for (Index i = 0; i < a_.rows(); ++i) {
    // Each term w_i phi(a_i^T x + b_i) contributes w_i^{1 - nu/2} M_phi |a_i|^{3 - nu}.
    const double mi = std::pow(w_(i), 1.0 - ap.nu / 2.0) * ap.m * std::pow(row_norms_(i), 3.0 - ap.nu);
    m = std::max(m, mi);
  }
  return {m, ap.nu};
}

std::optional<double> GlmModel::strong_convexity() const {
  if (q_.size() == 0) return std::nullopt;
  const double mu = q_.minCoeff();
  if (mu > 0.0) return mu;
  return std::nullopt;
}

std::optional<double> GlmModel::lipschitz_gradient() const {
  const auto sup = atom_.sup_second_derivative();
  if (!sup) return std::nullopt;
  if (!lipschitz_cache_) {
    const double top = largest_weighted_gram_eigenvalue(a_, w_, 2000, 1e-12);
    const double qmax = q_.size() > 0 ? q_.maxCoeff() : 0.0;
    lipschitz_cache_ = (*sup) * top * (1.0 + 1e-6) + qmax;
  }
  return lipschitz_cache_;
}

std::optional<Index> GlmModel::domain_violation(const Vec& x) const {
  const Interval dom = atom_.domain();
  if (std::isinf(dom.lower) && std::isinf(dom.upper)) {
    if (!x.allFinite()) return Index{0};
    return std::nullopt;
  }
  const Vec z = margins(x);
  for (Index i = 0; i < z.size(); ++i) {
    if (!dom.contains(z(i))) return i;
  }
  return std::nullopt;
}

double GlmModel::value(const Vec& x) const {
  check_domain(x);
  const Vec z = margins(x);
  double s = 0.0;
  for (Index i = 0; i < z.size(); ++i) s += w_(i) * atom_.eval(z(i), 0);
  return s + 0.5 * x.dot(q_.cwiseProduct(x)) + c_.dot(x);
}

Vec GlmModel::gradient(const Vec& x) const {
  check_domain(x);
  const Vec z = margins(x);
  Vec r(z.size());
  for (Index i = 0; i < z.size(); ++i) r(i) = w_(i) * atom_.eval(z(i), 1);
  return a_.transpose_times(r) + q_.cwiseProduct(x) + c_;
}

Mat GlmModel::hessian(const Vec& x) const {
  if (!dense_hessian_available()) throw InvalidArgument("GlmModel: dense Hessian unavailable above the size limit");
  check_domain(x);
  const Vec z = margins(x);
  Vec d(z.size());
  for (Index i = 0; i < z.size(); ++i) d(i) = w_(i) * atom_.eval(z(i), 2);
  Mat h = a_.weighted_gram(d);
  h.diagonal() += q_;
  return h;
}

Vec GlmModel::hvp(const Vec& x, const Vec& v) const {
  check_domain(x);
  const Vec z = margins(x);
  Vec av = a_.times(v);
  for (Index i = 0; i < z.size(); ++i) av(i) *= w_(i) * atom_.eval(z(i), 2);
  return a_.transpose_times(av) + q_.cwiseProduct(v);
}

GscParams glm_gsc_params(const GlmModel& model, GlmTarget target) {
  switch (target) {
    case GlmTarget::native: return model.params(NuChoice::native);
    case GlmTarget::nu2: return model.params(NuChoice::force_2);
    case GlmTarget::nu3: return model.params(NuChoice::force_3);
  }
  return model.native_params();
}

// -------------------------------------------------------------- PortfolioModel

PortfolioModel::PortfolioModel(Mat w) : w_(std::move(w)) {
  if (w_.size() == 0) throw InvalidArgument("PortfolioModel: empty return matrix");
}

std::optional<Index> PortfolioModel::domain_violation(const Vec& x) const {
  if (x.size() != w_.cols()) return Index{0};
  const Vec z = w_ * x;
  for (Index i = 0; i < z.size(); ++i) {
    if (!(z(i) > 0.0)) return i;
  }
  return std::nullopt;
}

double PortfolioModel::value(const Vec& x) const {
  check_domain(x);
  const Vec z = w_ * x;
  double s = 0.0;
  for (Index i = 0; i < z.size(); ++i) s -= std::log(z(i));
  return s;
}

Vec PortfolioModel::gradient(const Vec& x) const {
  check_domain(x);
  const Vec z = w_ * x;
  return -(w_.transpose() * z.cwiseInverse());
}

Mat PortfolioModel::hessian(const Vec& x) const {
  check_domain(x);
  const Vec z = w_ * x;
  const Vec d = z.cwiseInverse();
  const Mat scaled = d.asDiagonal() * w_;
  return scaled.transpose() * scaled;
}

Vec PortfolioModel::hvp(const Vec& x, const Vec& v) const {
  check_domain(x);
  const Vec z = w_ * x;
  const Vec wv = (w_ * v).cwiseQuotient(z.cwiseProduct(z));
  return w_.transpose() * wv;
}

// ------------------------------------------------------------------------ DWD

Vec DwdModel::default_start() const {
  Vec x = Vec::Zero(dim());
  x.tail(n()).setOnes();
  return x;
}

GlmModel dwd_as_glm(const DwdModel& m) {
  if (!(m.q > 0.0)) throw InvalidArgument("dwd: q must be > 0");
  const Index n = m.n();
  const Index p = m.p();
  if (m.y.size() != n || m.c.size() != n) throw InvalidArgument("dwd: y and c need n entries");
  if (!(m.gamma1 > 0.0 && m.gamma2 > 0.0 && m.gamma3 > 0.0)) {
    throw InvalidArgument("dwd: regularization parameters must be positive");
  }
  const Mat a = m.a.to_dense();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n * (p + 2)));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (a(i, j) != 0.0) trip.emplace_back(i, j, a(i, j));
    }
    trip.emplace_back(i, p, m.y(i));
    trip.emplace_back(i, p + 1 + i, 1.0);
  }
  SpMat ext(n, p + 1 + n);
  ext.setFromTriplets(trip.begin(), trip.end());
  Vec q(p + 1 + n);
  q.head(p).setConstant(m.gamma1);
  q(p) = m.gamma2;
  q.tail(n).setConstant(m.gamma3);
  Vec c = Vec::Zero(p + 1 + n);
  c.tail(n) = m.c;
  const double w = 1.0 / static_cast<double>(n);
  return GlmModel(DesignMatrix(std::move(ext)), Vec::Zero(n), Vec::Constant(n, w), LossAtom::neg_power(m.q), q, c);
}

// -------------------------------------------------------------- QuadraticModel

QuadraticModel::QuadraticModel(Mat q, Vec c, double nu) : q_(std::move(q)), c_(std::move(c)), nu_(nu) {
  if (q_.rows() != q_.cols() || c_.size() != q_.rows()) throw InvalidArgument("QuadraticModel: shape mismatch");
}

std::optional<double> QuadraticModel::strong_convexity() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(q_, Eigen::EigenvaluesOnly);
  const double mu = es.eigenvalues().minCoeff();
  if (mu > 0.0) return mu;
  return std::nullopt;
}

std::optional<double> QuadraticModel::lipschitz_gradient() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(q_, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

double QuadraticModel::value(const Vec& x) const { return 0.5 * x.dot(q_ * x) + c_.dot(x); }

Vec QuadraticModel::gradient(const Vec& x) const { return q_ * x + c_; }

// ----------------------------------------------------------------- AffineModel

AffineModel::AffineModel(std::shared_ptr<const Model> inner, Mat a) : inner_(std::move(inner)), a_(std::move(a)) {
  if (!inner_ || a_.rows() != inner_->dim()) throw InvalidArgument("AffineModel: shape mismatch");
}

GscParams AffineModel::native_params() const {
  Eigen::JacobiSVD<Mat> svd(a_);
  const auto& sv = svd.singularValues();
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  return transform_affine(inner_->native_params(), sv.size() ? sv(0) : 0.0, smin * smin);
}

std::optional<Index> AffineModel::domain_violation(const Vec& x) const { return inner_->domain_violation(a_ * x); }

double AffineModel::value(const Vec& x) const { return inner_->value(a_ * x); }

Vec AffineModel::gradient(const Vec& x) const { return a_.transpose() * inner_->gradient(a_ * x); }

Mat AffineModel::hessian(const Vec& x) const { return a_.transpose() * inner_->hessian(a_ * x) * a_; }

Vec AffineModel::hvp(const Vec& x, const Vec& v) const {
  return a_.transpose() * inner_->hvp(a_ * x, a_ * v);
}

// --------------------------------------------------------------- CountingModel

double CountingModel::value(const Vec& x) const {
  ++values;
  return inner_.value(x);
}

Vec CountingModel::gradient(const Vec& x) const {
  ++gradients;
  return inner_.gradient(x);
}

Mat CountingModel::hessian(const Vec& x) const {
  ++hessians;
  return inner_.hessian(x);
}

Vec CountingModel::hvp(const Vec& x, const Vec& v) const {
  ++hvps;
  return inner_.hvp(x, v);
}

}  // namespace gsc
