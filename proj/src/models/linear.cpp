#include "pdbench/models/linear.hpp"

#include "pdbench/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace pdbench::models {

Vector LinearPredictor::predict(const Matrix& x) const {
  Vector out = x * beta_;
  out.array() += intercept_;
  return out;
}

namespace {

LinearPredictor from_standardized(const Standardizer& s, double y_mean, const Vector& beta_std) {
  Vector beta = s.unscale_coefficients(beta_std);
  const double intercept = y_mean - s.mean.dot(beta);
  return {intercept, std::move(beta)};
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Coordinate descent for (1/2n)|r|^2 + lambda |b|_1 with columns of unit
// mean square (or all zero). `beta` is the warm start and receives the result.
void lasso_cd(const Matrix& z, const Vector& yc, double lambda, Vector& beta,
              const LassoOptions& opt) {
  const auto n = static_cast<double>(z.rows());
  Vector r = yc - z * beta;
  Vector colsq = z.colwise().squaredNorm().transpose() / n;
  const double scale = std::max(1e-300, yc.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      if (colsq(j) <= 0.0) continue;
      const double rho = z.col(j).dot(r) / n + colsq(j) * beta(j);
      const double updated = soft_threshold(rho, lambda) / colsq(j);
      const double delta = updated - beta(j);
      if (delta != 0.0) {
        r.noalias() -= delta * z.col(j);
        beta(j) = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta <= opt.tolerance * scale) break;
  }
}

}  // namespace

LinearPredictor fit_ols(const Matrix& x, const Vector& y, bool intercept) {
  if (x.rows() == 0) throw FitError("ols: no training rows");
  if (x.rows() != y.size()) throw FitError("ols: row mismatch");
  if (!intercept) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(x);
    return {0.0, cod.solve(y)};
  }
  const Vector xm = x.colwise().mean().transpose();
  const double ym = y.mean();
  const Matrix xc = x.rowwise() - xm.transpose();
  Vector beta = Vector::Zero(x.cols());
  if (x.cols() > 0 && xc.cwiseAbs().maxCoeff() > 0.0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(xc);
    beta = cod.solve((y.array() - ym).matrix());
  }
  if (!beta.allFinite()) throw FitError("ols: non-finite solution");
  return {ym - xm.dot(beta), std::move(beta)};
}

LinearPredictor fit_ridge(const Matrix& x, const Vector& y, double lambda) {
  if (x.rows() == 0) throw FitError("ridge: no training rows");
  if (!(lambda >= 0.0)) throw FitError("ridge: lambda must be >= 0");
  const auto s = Standardizer::fit(x);
  const Matrix z = s.transform(x);
  const double ym = y.mean();
  const Vector yc = y.array() - ym;
  Vector beta_std;
  if (lambda == 0.0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(z);
    beta_std = cod.solve(yc);
  } else {
    Matrix a = z.transpose() * z;
    a.diagonal().array() += lambda;
    beta_std = a.llt().solve(z.transpose() * yc);
  }
  if (!beta_std.allFinite()) throw FitError("ridge: non-finite solution");
  return from_standardized(s, ym, beta_std);
}

LinearPredictor fit_lasso_lambda(const Matrix& x, const Vector& y, double lambda,
                                 const LassoOptions& options) {
  if (x.rows() == 0) throw FitError("lasso: no training rows");
  const auto s = Standardizer::fit(x);
  const Matrix z = s.transform(x);
  const double ym = y.mean();
  const Vector yc = y.array() - ym;
  Vector beta = Vector::Zero(x.cols());
  lasso_cd(z, yc, lambda, beta, options);
  return from_standardized(s, ym, beta);
}

LinearPredictor fit_lasso(const Matrix& x, const Vector& y, double fraction,
                          const LassoOptions& opt) {
  if (x.rows() == 0) throw FitError("lasso: no training rows");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw FitError("lasso: fraction must lie in [0, 1]");
  const auto s = Standardizer::fit(x);
  const Matrix z = s.transform(x);
  const auto n = static_cast<double>(z.rows());
  const double ym = y.mean();
  const Vector yc = y.array() - ym;
  const Index p = z.cols();

  Vector beta = Vector::Zero(p);
  const double lambda_max = p > 0 ? (z.transpose() * yc).cwiseAbs().maxCoeff() / n : 0.0;
  if (fraction == 0.0 || lambda_max <= 0.0) return from_standardized(s, ym, beta);

  // Norm of the unpenalized end of the path.
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(z);
  const bool unique_ols = cod.rank() == p && z.rows() > p;
  const double lambda_end = unique_ols ? 0.0 : opt.wide_end_ratio * lambda_max;

  std::vector<double> lambdas;
  std::vector<Vector> betas;
  std::vector<double> norms;
  const int len = std::max(2, opt.path_length);
  const double lo = unique_ols ? 1e-6 * lambda_max : lambda_end;
  for (int k = 0; k < len; ++k) {
    const double t = static_cast<double>(k) / (len - 1);
    const double lam = lambda_max * std::pow(lo / lambda_max, t);
    lasso_cd(z, yc, lam, beta, opt);
    lambdas.push_back(lam);
    betas.push_back(beta);
    norms.push_back(beta.lpNorm<1>());
  }
  double l1_max = norms.back();
  if (unique_ols) {
    Vector ols = cod.solve(yc);
    lambdas.push_back(0.0);
    betas.push_back(ols);
    norms.push_back(ols.lpNorm<1>());
    l1_max = norms.back();
  }
  const double target = fraction * l1_max;
  if (fraction >= 1.0) return from_standardized(s, ym, betas.back());

  // First path point whose norm reaches the target brackets the solution.
  std::size_t hi_idx = 0;
  while (hi_idx < norms.size() && norms[hi_idx] < target) ++hi_idx;
  if (hi_idx == 0) return from_standardized(s, ym, betas.front());
  double lam_hi = lambdas[hi_idx - 1];  // norm below target
  double lam_lo = lambdas[hi_idx];      // norm at or above target
  Vector b = betas[hi_idx - 1];
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lam_hi + lam_lo);
    lasso_cd(z, yc, mid, b, opt);
    const double nm = b.lpNorm<1>();
    if (nm < target) {
      lam_hi = mid;
    } else {
      lam_lo = mid;
    }
    if (std::abs(nm - target) <= 1e-13 * std::max(1.0, l1_max) || lam_hi - lam_lo <= 1e-15 * lambda_max) break;
  }
  return from_standardized(s, ym, b);
}

PcrFit fit_pcr(const Matrix& x, const Vector& y, std::size_t ncomp) {
  if (x.rows() == 0) throw FitError("pcr: no training rows");
  const auto s = Standardizer::fit(x);
  const Matrix z = s.transform(x);
  const double ym = y.mean();
  const Vector yc = y.array() - ym;

  PcrFit out;
  Vector beta_std = Vector::Zero(x.cols());
  if (z.cols() > 0) {
    Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double tol = sv.size() > 0 ? 1e-10 * std::max(1.0, sv(0)) : 0.0;
    std::size_t rank = 0;
    while (rank < static_cast<std::size_t>(sv.size()) && sv(static_cast<Index>(rank)) > tol) ++rank;
    out.rank = rank;
    const double total = sv.squaredNorm();
    double cum = 0.0;
    for (std::size_t k = 0; k < rank; ++k) {
      cum += sv(static_cast<Index>(k)) * sv(static_cast<Index>(k));
      out.explained_variance.push_back(total > 0.0 ? cum / total : 0.0);
    }
    out.components = std::min(ncomp, rank);
    const auto k = static_cast<Index>(out.components);
    if (k > 0) {
      const Vector gamma = (svd.matrixU().leftCols(k).transpose() * yc).cwiseQuotient(sv.head(k));
      beta_std = svd.matrixV().leftCols(k) * gamma;
    }
  }
  out.predictor = from_standardized(s, ym, beta_std);
  return out;
}

}  // namespace pdbench::models
