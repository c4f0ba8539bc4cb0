#include "pdbench/core/linalg.hpp"

#include <cmath>
#include <numeric>

namespace pdbench {

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - s.mean(j)).square().sum() / n;
    const double sd = std::sqrt(ss);
    // relative tolerance keeps rounding noise on constant columns out
    const double ref = std::max(1.0, std::abs(s.mean(j)));
    s.scale(j) = sd > 1e-12 * ref ? sd : 0.0;
  }
  return s;
}

Matrix Standardizer::transform(const Matrix& x) const {
  Matrix z(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (scale(j) > 0.0) {
      z.col(j) = (x.col(j).array() - mean(j)) / scale(j);
    } else {
      z.col(j).setZero();
    }
  }
  return z;
}

Vector Standardizer::unscale_coefficients(const Vector& beta_std) const {
  Vector beta(beta_std.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    beta(j) = scale(j) > 0.0 ? beta_std(j) / scale(j) : 0.0;
  }
  return beta;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace pdbench
