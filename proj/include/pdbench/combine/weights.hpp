#pragma once

#include "pdbench/core/linalg.hpp"

#include <string>
#include <vector>

namespace pdbench::combine {

// NG, CLS and SEA collapse members with identical errors (or identical
// forecast columns) to one, solve the reduced problem, and split each
// group's weight equally.

struct MspeMatrix {
  std::vector<std::string> members;
  Matrix sigma;
  std::size_t observations = 0;
  /// Negative eigenvalues were clipped to zero.
  bool clipped = false;
};

/// Mean cross-products of the error columns (observations x members).
/// DomainError when there are no observations.
MspeMatrix estimate_mspe(const Matrix& errors, std::vector<std::string> members = {});

/// Pointwise mean of equally long member paths.
std::vector<double> combine_avg(const std::vector<std::vector<double>>& forecasts);

/// Weighted sum of member paths.
std::vector<double> combine_weighted(const std::vector<std::vector<double>>& forecasts, const Vector& weights);

struct NgResult {
  Vector weights;
  /// lambda I was added before inversion.
  bool regularized = false;
  double condition = 0.0;
};

/// Sigma^-1 1 / (1' Sigma^-1 1); weights may be negative.
NgResult combine_ng(const Matrix& sigma);

struct ClsResult {
  Vector weights;
  /// min ||a - F w||^2 / n at the solution.
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Least squares on the unit simplex by a primal active-set method. A tiny
/// proximal term towards equal weights keeps near-degenerate programs
/// strictly convex. DomainError when F has fewer rows than columns.
ClsResult combine_cls(const Matrix& forecasts, const Vector& actual);

/// Objective ||a - F w||^2 / n.
double cls_objective(const Matrix& forecasts, const Vector& actual, const Vector& w);

/// Smallest-eigenvalue eigenvector of Sigma rescaled to sum one. A repeated
/// smallest eigenvalue uses the projection of the ones vector onto its
/// eigenspace. DomainError when that projection is numerically zero.
Vector combine_sea(const Matrix& sigma);

}  // namespace pdbench::combine
