#pragma once

// Newton systems, local norms and extreme eigenvalues of Hessian operators.

#include <functional>
#include <optional>

#include "gsc/models.hpp"

namespace gsc {

// Symmetric operator held either as a dense matrix or as a product closure.
class HessianOperator {
 public:
  static HessianOperator dense(Mat h);
  static HessianOperator implicit(Index size, std::function<Vec(const Vec&)> apply);
  // Dense Hessian when the model serves one, Hessian-vector products otherwise.
  static HessianOperator from_model(const Model& model, const Vec& x, bool prefer_dense = true);

  Index size() const { return size_; }
  bool is_dense() const { return matrix_.has_value(); }
  const Mat& matrix() const { return *matrix_; }
  Vec apply(const Vec& v) const;

 private:
  Index size_ = 0;
  std::optional<Mat> matrix_;
  std::function<Vec(const Vec&)> apply_;
};

enum class LinearMethod { cholesky, cg };

struct NewtonDirection {
  Vec n;
  double lambda = 0.0;
  int cg_iterations = 0;
  double relative_residual = 0.0;
};

// Solves h n = -g. CG starts from warm_start when given.
NewtonDirection newton_direction(const HessianOperator& h, const Vec& g, LinearMethod method, double tol,
                                 int max_iter, const Vec* warm_start = nullptr);

double local_norm(const HessianOperator& h, const Vec& v);

struct EigenEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Inverse power iteration on dense operators, Lanczos otherwise.
EigenEstimate smallest_eigenvalue(const HessianOperator& h, double tol, int max_iter = 1000);
// Power iteration.
EigenEstimate largest_eigenvalue(const HessianOperator& h, double tol, int max_iter = 1000);

}  // namespace gsc
