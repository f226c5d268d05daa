#pragma once

// Objective oracles: value, gradient, Hessian and Hessian-vector products with
// certified GSC parameters.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <optional>
#include <variant>

#include "gsc/atoms.hpp"
#include "gsc/kernel.hpp"

namespace gsc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Index = Eigen::Index;

// Hessians are assembled densely up to this dimension; above it only
// Hessian-vector products are served.
inline constexpr Index kDenseHessianLimit = 2000;

enum class NuChoice { native, force_2, force_3 };

class Model {
 public:
  virtual ~Model() = default;

  virtual Index dim() const = 0;
  virtual GscParams native_params() const = 0;
  // Strong convexity modulus valid on the whole domain, if known.
  virtual std::optional<double> strong_convexity() const { return std::nullopt; }
  // Lipschitz constant of the gradient, if finite.
  virtual std::optional<double> lipschitz_gradient() const { return std::nullopt; }

  // Index of the first term whose argument leaves the domain, if any.
  virtual std::optional<Index> domain_violation(const Vec& x) const = 0;
  bool in_domain(const Vec& x) const { return !domain_violation(x).has_value(); }

  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;
  virtual Vec hvp(const Vec& x, const Vec& v) const = 0;

  virtual bool dense_hessian_available() const { return dim() <= kDenseHessianLimit; }

  // Parameters after the nu mapping: force_3 uses strong convexity, force_2
  // uses the gradient Lipschitz constant.
  virtual GscParams params(NuChoice choice) const;

 protected:
  // Throws DomainError naming the violating row.
  void check_domain(const Vec& x) const;
};

// Row-major design, dense or sparse.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  explicit DesignMatrix(Mat dense) : data_(std::move(dense)) {}
  explicit DesignMatrix(SpMat sparse) : data_(std::move(sparse)) {}

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return std::holds_alternative<SpMat>(data_); }
  Vec times(const Vec& x) const;
  Vec transpose_times(const Vec& v) const;
  // A^T diag(d) A
  Mat weighted_gram(const Vec& d) const;
  Vec row_norms() const;
  Mat to_dense() const;

 private:
  std::variant<Mat, SpMat> data_;
};

// f(x) = sum_i w_i phi(a_i^T x + b_i) + 1/2 x^T diag(q) x + c^T x
class GlmModel : public Model {
 public:
  GlmModel(DesignMatrix a, Vec b, Vec w, LossAtom atom, Vec q_diag, Vec c);

  // Uniform weights 1/n, scalar ridge gamma, zero offsets and linear term.
  static GlmModel uniform(DesignMatrix a, LossAtom atom, double gamma);

  Index dim() const override { return a_.cols(); }
  Index rows() const { return a_.rows(); }
  GscParams native_params() const override;
  std::optional<double> strong_convexity() const override;
  std::optional<double> lipschitz_gradient() const override;
  std::optional<Index> domain_violation(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  Vec hvp(const Vec& x, const Vec& v) const override;

  const DesignMatrix& design() const { return a_; }
  const Vec& offsets() const { return b_; }
  const Vec& weights() const { return w_; }
  const LossAtom& atom() const { return atom_; }
  const Vec& q_diag() const { return q_; }
  const Vec& linear() const { return c_; }
  Vec margins(const Vec& x) const { return a_.times(x) + b_; }

 private:
  DesignMatrix a_;
  Vec b_, w_;
  LossAtom atom_;
  Vec q_, c_;
  Vec row_norms_;
  mutable std::optional<double> lipschitz_cache_;
};

enum class GlmTarget { native, nu2, nu3 };
GscParams glm_gsc_params(const GlmModel& model, GlmTarget target);

// f(x) = -sum_i log(w_i^T x)
class PortfolioModel : public Model {
 public:
  explicit PortfolioModel(Mat w);

  Index dim() const override { return w_.cols(); }
  GscParams native_params() const override { return {2.0, 3.0}; }
  std::optional<Index> domain_violation(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  Vec hvp(const Vec& x, const Vec& v) const override;
  const Mat& returns() const { return w_; }

 private:
  Mat w_;
};

// Distance-weighted discrimination over x = [w (p), mu (1), xi (n)].
struct DwdModel {
  DesignMatrix a;
  Vec y;
  Vec c;
  double q = 1.0;
  double gamma1 = 1e-5;
  double gamma2 = 1e-5;
  double gamma3 = 1e-7;

  Index n() const { return a.rows(); }
  Index p() const { return a.cols(); }
  Index dim() const { return p() + 1 + n(); }
  // w = 0, mu = 0, xi = 1
  Vec default_start() const;
};

GlmModel dwd_as_glm(const DwdModel& model);

// f(x) = 1/2 x^T Q x + c^T x, GSC with M = 0.
class QuadraticModel : public Model {
 public:
  QuadraticModel(Mat q, Vec c, double nu = 3.0);

  Index dim() const override { return q_.rows(); }
  GscParams native_params() const override { return {0.0, nu_}; }
  std::optional<double> strong_convexity() const override;
  std::optional<double> lipschitz_gradient() const override;
  std::optional<Index> domain_violation(const Vec&) const override { return std::nullopt; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec&) const override { return q_; }
  Vec hvp(const Vec&, const Vec& v) const override { return q_ * v; }

 private:
  Mat q_;
  Vec c_;
  double nu_;
};

// g(x) = f(A x) for square invertible A.
class AffineModel : public Model {
 public:
  AffineModel(std::shared_ptr<const Model> inner, Mat a);

  Index dim() const override { return a_.cols(); }
  GscParams native_params() const override;
  std::optional<Index> domain_violation(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  Vec hvp(const Vec& x, const Vec& v) const override;

 private:
  std::shared_ptr<const Model> inner_;
  Mat a_;
};

// Counts oracle calls on a wrapped model.
class CountingModel : public Model {
 public:
  explicit CountingModel(const Model& inner) : inner_(inner) {}

  Index dim() const override { return inner_.dim(); }
  GscParams native_params() const override { return inner_.native_params(); }
  std::optional<double> strong_convexity() const override { return inner_.strong_convexity(); }
  std::optional<double> lipschitz_gradient() const override { return inner_.lipschitz_gradient(); }
  std::optional<Index> domain_violation(const Vec& x) const override { return inner_.domain_violation(x); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  Vec hvp(const Vec& x, const Vec& v) const override;
  bool dense_hessian_available() const override { return inner_.dense_hessian_available(); }
  GscParams params(NuChoice choice) const override { return inner_.params(choice); }

  mutable long values = 0;
  mutable long gradients = 0;
  mutable long hessians = 0;
  mutable long hvps = 0;

 private:
  const Model& inner_;
};

// Largest eigenvalue of A^T diag(d) A by power iteration (deterministic start).
double largest_weighted_gram_eigenvalue(const DesignMatrix& a, const Vec& d, int max_iter = 500,
                                        double tol = 1e-10);

}  // namespace gsc
