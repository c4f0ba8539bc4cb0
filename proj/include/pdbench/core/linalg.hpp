#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pdbench {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline Vector to_vector(std::span<const double> values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

/// Column centering/scaling estimated on training rows only.
///
/// Columns with zero variance get scale 0 and are mapped to an all-zero
/// standardized column, so downstream solvers never see them.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& x);
  Matrix transform(const Matrix& x) const;
  /// Maps coefficients of the standardized design back to the raw design.
  Vector unscale_coefficients(const Vector& beta_std) const;
};

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> v);

}  // namespace pdbench
