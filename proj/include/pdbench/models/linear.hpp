#pragma once

#include "pdbench/core/linalg.hpp"
#include "pdbench/models/model.hpp"

#include <vector>

namespace pdbench::models {

/// intercept + x * beta, coefficients on the raw column scale.
class LinearPredictor : public Predictor {
 public:
  LinearPredictor() = default;
  LinearPredictor(double intercept, Vector beta) : intercept_(intercept), beta_(std::move(beta)) {}

  Vector predict(const Matrix& x) const override;
  double intercept() const { return intercept_; }
  const Vector& beta() const { return beta_; }

 private:
  double intercept_ = 0.0;
  Vector beta_;
};

/// Least squares through a complete orthogonal decomposition; rank-deficient
/// or wide designs get the minimum-norm solution.
LinearPredictor fit_ols(const Matrix& x, const Vector& y, bool intercept = true);

/// (Z'Z + lambda I)^-1 Z'y on standardized columns.
LinearPredictor fit_ridge(const Matrix& x, const Vector& y, double lambda);

struct LassoOptions {
  double tolerance = 1e-11;
  int max_sweeps = 20000;
  int path_length = 60;
  /// Path end relative to lambda_max when the OLS solution is not unique.
  double wide_end_ratio = 1e-3;
};

/// Coordinate-descent lasso on standardized columns at an L1 fraction of the
/// unpenalized solution's norm.
LinearPredictor fit_lasso(const Matrix& x, const Vector& y, double fraction, const LassoOptions& options = {});

/// Penalized form: (1/2n)|y - Zb|^2 + lambda |b|_1, on standardized columns.
LinearPredictor fit_lasso_lambda(const Matrix& x, const Vector& y, double lambda,
                                 const LassoOptions& options = {});

struct PcrFit {
  LinearPredictor predictor;
  std::size_t components = 0;
  std::size_t rank = 0;
  /// Cumulative share of standardized-design variance, one entry per component.
  std::vector<double> explained_variance;
};

PcrFit fit_pcr(const Matrix& x, const Vector& y, std::size_t ncomp);

}  // namespace pdbench::models
