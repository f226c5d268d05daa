#include "gsc/linops.hpp"

#include <cmath>
#include <string>

#include "gsc/errors.hpp"

namespace gsc {

namespace {

Vec deterministic_start(Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  return v.normalized();
}

}  // namespace

HessianOperator HessianOperator::dense(Mat h) {
  if (h.rows() != h.cols()) throw InvalidArgument("HessianOperator: matrix must be square");
  HessianOperator op;
  op.size_ = h.rows();
  op.matrix_ = std::move(h);
  return op;
}

HessianOperator HessianOperator::implicit(Index size, std::function<Vec(const Vec&)> apply) {
  HessianOperator op;
  op.size_ = size;
  op.apply_ = std::move(apply);
  return op;
}

HessianOperator HessianOperator::from_model(const Model& model, const Vec& x, bool prefer_dense) {
  if (prefer_dense && model.dense_hessian_available()) return dense(model.hessian(x));
  const Vec xc = x;
  return implicit(model.dim(), [&model, xc](const Vec& v) { return model.hvp(xc, v); });
}

Vec HessianOperator::apply(const Vec& v) const {
  if (matrix_) return (*matrix_) * v;
  return apply_(v);
}

NewtonDirection newton_direction(const HessianOperator& h, const Vec& g, LinearMethod method, double tol,
                                 int max_iter, const Vec* warm_start) {
  NewtonDirection out;
  const Index p = g.size();
  if (h.size() != p) throw InvalidArgument("newton_direction: size mismatch");
  if (!g.allFinite()) throw InvalidArgument("newton_direction: gradient is not finite");
  const double gnorm = g.norm();
  if (gnorm == 0.0) {
    out.n = Vec::Zero(p);
    return out;
  }

  if (method == LinearMethod::cholesky) {
    if (!h.is_dense()) throw InvalidArgument("newton_direction: Cholesky needs a dense Hessian");
    Eigen::LLT<Mat> llt(h.matrix());
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("newton_direction: Cholesky factorization failed");
    out.n = -llt.solve(g);
    if (!out.n.allFinite()) throw NotPositiveDefinite("newton_direction: singular Hessian");
    out.relative_residual = (h.apply(out.n) + g).norm() / gnorm;
  } else {
    Vec x = Vec::Zero(p);
    Vec r = -g;
    if (warm_start != nullptr && warm_start->size() == p && warm_start->allFinite()) {
      const Vec rw = -g - h.apply(*warm_start);
      if (rw.norm() < gnorm) {
        x = *warm_start;
        r = rw;
      }
    }
    Vec d = r;
    double rr = r.squaredNorm();
    const double target = tol * gnorm;
    int it = 0;
    while (std::sqrt(rr) > target) {
      if (it == max_iter) {
        throw ConvergenceError("newton_direction: CG did not converge in " + std::to_string(max_iter) + " iterations",
                               std::sqrt(rr) / gnorm);
      }
      const Vec hd = h.apply(d);
      const double curv = d.dot(hd);
      if (!(curv > 1e-14 * d.squaredNorm())) {
        throw NotPositiveDefinite("newton_direction: CG met nonpositive curvature");
      }
      const double alpha = rr / curv;
      x += alpha * d;
      r -= alpha * hd;
      const double rr_next = r.squaredNorm();
      d = r + (rr_next / rr) * d;
      rr = rr_next;
      ++it;
    }
    out.n = std::move(x);
    out.cg_iterations = it;
    out.relative_residual = std::sqrt(rr) / gnorm;
  }
  out.lambda = std::sqrt(std::max(0.0, -g.dot(out.n)));
  return out;
}

double local_norm(const HessianOperator& h, const Vec& v) {
  const double v2 = v.squaredNorm();
  if (v2 == 0.0) return 0.0;
  const double q = v.dot(h.apply(v));
  if (q < -1e-12 * v2) throw NotPositiveDefinite("local_norm: negative quadratic form");
  return std::sqrt(std::max(0.0, q));
}

EigenEstimate largest_eigenvalue(const HessianOperator& h, double tol, int max_iter) {
  EigenEstimate est;
  const Index p = h.size();
  if (p == 0) return est;
  Vec v = deterministic_start(p);
  double lam = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Vec u = h.apply(v);
    const double next = v.dot(u);
    const double un = u.norm();
    est.iterations = it;
    if (un == 0.0) {
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    v = u / un;
    if (it > 1 && std::abs(next - lam) <= tol * std::abs(next)) {
      est.value = next;
      est.converged = true;
      return est;
    }
    lam = next;
  }
  est.value = lam;
  return est;
}

EigenEstimate smallest_eigenvalue(const HessianOperator& h, double tol, int max_iter) {
  EigenEstimate est;
  const Index p = h.size();
  if (p == 0) return est;

  if (h.is_dense()) {
    Eigen::LLT<Mat> llt(h.matrix());
    if (llt.info() == Eigen::Success) {
      Vec v = deterministic_start(p);
      double mu_prev = 0.0;
      for (int it = 1; it <= max_iter; ++it) {
        Vec w = llt.solve(v);
        const double mu = v.dot(w);
        const double wn = w.norm();
        if (!std::isfinite(wn) || wn == 0.0) break;
        v = w / wn;
        est.iterations = it;
        if (it > 1 && std::abs(mu - mu_prev) <= tol * std::abs(mu)) {
          est.value = v.dot(h.matrix() * v);
          est.converged = true;
          return est;
        }
        mu_prev = mu;
      }
    }
    // Slow gap or semidefinite input: fall back to a full symmetric eigensolve.
    Eigen::SelfAdjointEigenSolver<Mat> es(h.matrix(), Eigen::EigenvaluesOnly);
    est.value = std::max(0.0, es.eigenvalues()(0));
    est.converged = es.info() == Eigen::Success;
    return est;
  }

  // Lanczos with full reorthogonalization.
  const int steps = static_cast<int>(std::min<Index>(p, max_iter));
  Mat q(p, steps + 1);
  Vec alpha(steps), beta(steps);
  q.col(0) = deterministic_start(p);
  for (int j = 0; j < steps; ++j) {
    Vec w = h.apply(q.col(j));
    alpha(j) = q.col(j).dot(w);
    w -= alpha(j) * q.col(j);
    if (j > 0) w -= beta(j - 1) * q.col(j - 1);
    for (int k = 0; k <= j; ++k) w -= q.col(k).dot(w) * q.col(k);
    beta(j) = w.norm();

    Mat t = Mat::Zero(j + 1, j + 1);
    for (int k = 0; k <= j; ++k) {
      t(k, k) = alpha(k);
      if (k < j) t(k, k + 1) = t(k + 1, k) = beta(k);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(t);
    const double theta = es.eigenvalues()(0);
    const double resid = std::abs(beta(j) * es.eigenvectors()(j, 0));
    est.value = std::max(0.0, theta);
    est.iterations = j + 1;
    if (resid <= tol * std::abs(theta) || beta(j) < 1e-14) {
      est.converged = true;
      return est;
    }
    q.col(j + 1) = w / beta(j);
  }
  est.converged = steps == p;
  return est;
}

}  // namespace gsc
