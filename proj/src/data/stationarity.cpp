#include "pdbench/data/stationarity.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdbench::data {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct OlsFit {
  Vector beta;
  Vector se;
  double rss = 0.0;
  bool singular = false;
};

OlsFit ols_with_se(const Matrix& x, const Vector& y) {
  OlsFit fit;
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) {
    fit.singular = true;
    return fit;
  }
  fit.beta = qr.solve(y);
  fit.rss = (y - x * fit.beta).squaredNorm();
  const double dof = static_cast<double>(x.rows() - x.cols());
  const double sigma2 = fit.rss / dof;
  const Matrix xtx_inv = (x.transpose() * x).ldlt().solve(Matrix::Identity(x.cols(), x.cols()));
  fit.se = (sigma2 * xtx_inv.diagonal().array()).sqrt();
  return fit;
}

// Rows t in [first, dy.size()) of the ADF regression with `lags` lagged differences.
void adf_regression(std::span<const double> y, const std::vector<double>& dy, int lags,
                    std::size_t first, Matrix& x, Vector& target) {
  const std::size_t n = dy.size() - first;
  x.resize(static_cast<Eigen::Index>(n), 2 + lags);
  target.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t t = first + r;
    const auto i = static_cast<Eigen::Index>(r);
    target(i) = dy[t];
    x(i, 0) = 1.0;
    x(i, 1) = y[t];
    for (int k = 1; k <= lags; ++k) x(i, 1 + k) = dy[t - static_cast<std::size_t>(k)];
  }
}

bool is_constant(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo <= 1e-12 * std::max(1.0, std::abs(*lo));
}

}  // namespace

double adf_critical_value(double level, std::size_t nobs) {
  // MacKinnon (2010) response surface, one variable, constant, no trend.
  struct Row {
    double level, b0, b1, b2, b3;
  };
  static constexpr Row table[] = {
      {0.01, -3.43035, -6.5393, -16.786, -79.433},
      {0.05, -2.86154, -2.8903, -4.234, -40.040},
      {0.10, -2.56677, -1.5384, -2.809, 0.0},
  };
  for (const auto& r : table) {
    if (std::abs(r.level - level) < 1e-9) {
      const double t = static_cast<double>(nobs);
      return r.b0 + r.b1 / t + r.b2 / (t * t) + r.b3 / (t * t * t);
    }
  }
  throw DomainError("adf_critical_value: level must be 0.01, 0.05 or 0.10");
}

AdfResult adf_test(std::span<const double> series, int max_lag) {
  if (series.size() < kMinUnitRootLength) {
    throw DomainError("adf_test: series needs at least 20 observations");
  }
  AdfResult out;
  if (is_constant(series)) {
    out.degenerate = true;
    out.statistic = kNaN;
    return out;
  }
  std::vector<double> dy(series.size() - 1);
  for (std::size_t t = 0; t + 1 < series.size(); ++t) dy[t] = series[t + 1] - series[t];

  max_lag = std::clamp(max_lag, 0, static_cast<int>(dy.size()) / 2 - 3);
  int best_lag = 0;
  double best_bic = std::numeric_limits<double>::infinity();
  Matrix x;
  Vector target;
  for (int k = 0; k <= max_lag; ++k) {
    adf_regression(series, dy, k, static_cast<std::size_t>(max_lag), x, target);
    const auto fit = ols_with_se(x, target);
    if (fit.singular) continue;
    const double n = static_cast<double>(x.rows());
    const double bic = n * std::log(fit.rss / n) + static_cast<double>(x.cols()) * std::log(n);
    if (bic < best_bic) {
      best_bic = bic;
      best_lag = k;
    }
  }
  adf_regression(series, dy, best_lag, static_cast<std::size_t>(best_lag), x, target);
  const auto fit = ols_with_se(x, target);
  if (fit.singular || !(fit.se(1) > 0.0)) {
    out.degenerate = true;
    out.statistic = kNaN;
    return out;
  }
  out.statistic = fit.beta(1) / fit.se(1);
  out.lags = best_lag;
  out.nobs = static_cast<std::size_t>(x.rows());
  out.critical_1 = adf_critical_value(0.01, out.nobs);
  out.critical_5 = adf_critical_value(0.05, out.nobs);
  out.critical_10 = adf_critical_value(0.10, out.nobs);
  out.rejects_unit_root = out.statistic < out.critical_5;
  return out;
}

KpssResult kpss_test(std::span<const double> series) {
  if (series.size() < kMinUnitRootLength) {
    throw DomainError("kpss_test: series needs at least 20 observations");
  }
  KpssResult out;
  const std::size_t n = series.size();
  const double nd = static_cast<double>(n);
  double m = 0.0;
  for (double v : series) m += v;
  m /= nd;
  std::vector<double> e(n);
  for (std::size_t t = 0; t < n; ++t) e[t] = series[t] - m;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = lag; t < n; ++t) s += e[t] * e[t - lag];
    return s;
  };

  const double e2 = autocov(0);
  if (is_constant(series) || e2 <= 0.0) {
    out.degenerate = true;
    out.statistic = kNaN;
    return out;
  }

  // Hobijn, Franses & Ooms automatic bandwidth
  const auto cov_lags = static_cast<std::size_t>(std::pow(nd, 2.0 / 9.0));
  double s0 = e2 / nd;
  double s1 = 0.0;
  for (std::size_t i = 1; i <= cov_lags; ++i) {
    const double prod = autocov(i) / (nd / 2.0);
    s0 += prod;
    s1 += static_cast<double>(i) * prod;
  }
  std::size_t lags = 0;
  if (s0 > 0.0) {
    const double s_hat = s1 / s0;
    const double gamma = 1.1447 * std::cbrt(s_hat * s_hat);
    lags = static_cast<std::size_t>(std::max(0.0, gamma * std::cbrt(nd)));
  }
  lags = std::min(lags, n - 1);

  double lrv = e2;
  for (std::size_t i = 1; i <= lags; ++i) {
    lrv += 2.0 * (1.0 - static_cast<double>(i) / static_cast<double>(lags + 1)) * autocov(i);
  }
  lrv /= nd;
  if (!(lrv > 0.0)) {
    out.degenerate = true;
    out.statistic = kNaN;
    return out;
  }
  double partial = 0.0;
  double eta = 0.0;
  for (double v : e) {
    partial += v;
    eta += partial * partial;
  }
  eta /= nd * nd;
  out.statistic = eta / lrv;
  out.lags = static_cast<int>(lags);
  out.rejects_stationarity = out.statistic > out.critical_5;
  return out;
}

StationarityReport stationarity_report(const TimeSeriesFrame& frame) {
  StationarityReport report;
  for (const auto& c : frame.columns()) {
    StationarityEntry entry{c.name, {}, {}};
    if (c.values.size() >= kMinUnitRootLength) {
      entry.adf = adf_test(c.values);
      entry.kpss = kpss_test(c.values);
    } else {
      entry.adf.degenerate = true;
      entry.adf.statistic = kNaN;
      entry.kpss.degenerate = true;
      entry.kpss.statistic = kNaN;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

nlohmann::json to_json(const StationarityReport& report) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json columns = nlohmann::json::array();
  for (const auto& e : report.entries) {
    columns.push_back({
        {"column", e.column},
        {"adf",
         {{"statistic", num(e.adf.statistic)},
          {"lags", e.adf.lags},
          {"nobs", e.adf.nobs},
          {"critical_1", num(e.adf.critical_1)},
          {"critical_5", num(e.adf.critical_5)},
          {"critical_10", num(e.adf.critical_10)},
          {"rejects_unit_root_5pct", e.adf.rejects_unit_root},
          {"degenerate", e.adf.degenerate}}},
        {"kpss",
         {{"statistic", num(e.kpss.statistic)},
          {"lags", e.kpss.lags},
          {"critical_5", e.kpss.critical_5},
          {"rejects_stationarity_5pct", e.kpss.rejects_stationarity},
          {"degenerate", e.kpss.degenerate}}},
    });
  }
  return {{"columns", columns}};
}

}  // namespace pdbench::data
