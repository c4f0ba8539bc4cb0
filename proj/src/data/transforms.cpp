#include "pdbench/data/transforms.hpp"

#include "pdbench/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace pdbench::data {

double logit_transform(double pd) {
  if (!(pd > 0.0 && pd < 100.0)) {
    throw DomainError("logit_transform: pd must lie in (0, 100), got " + std::to_string(pd));
  }
  return std::log(pd / (100.0 - pd));
}

double inverse_logit(double y) {
  if (y >= 0.0) return 100.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return 100.0 * e / (1.0 + e);
}

std::vector<double> seasonal_adjust(std::span<const double> series, int period) {
  if (period < 2) throw DomainError("seasonal_adjust: period must be >= 2");
  const auto m = static_cast<std::size_t>(period);
  const std::size_t n = series.size();
  if (n < 2 * m) {
    throw DomainError("seasonal_adjust: series of length " + std::to_string(n) +
                      " shorter than two periods");
  }
  const std::size_t half = m / 2;
  const bool even = m % 2 == 0;

  std::vector<double> sum(m, 0.0);
  std::vector<std::size_t> count(m, 0);
  for (std::size_t t = half; t + half < n; ++t) {
    double trend = 0.0;
    if (even) {
      trend = 0.5 * (series[t - half] + series[t + half]);
      for (std::size_t k = t - half + 1; k < t + half; ++k) trend += series[k];
    } else {
      for (std::size_t k = t - half; k <= t + half; ++k) trend += series[k];
    }
    trend /= static_cast<double>(m);
    sum[t % m] += series[t] - trend;
    ++count[t % m];
  }
  std::vector<double> index(m, 0.0);
  double avg = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    index[k] = sum[k] / static_cast<double>(count[k]);
    avg += index[k];
  }
  avg /= static_cast<double>(m);
  for (auto& s : index) s -= avg;

  std::vector<double> out(series.begin(), series.end());
  for (std::size_t t = 0; t < n; ++t) out[t] -= index[t % m];
  return out;
}

std::vector<double> difference(std::span<const double> series, int order) {
  if (order < 0) throw DomainError("difference: negative order");
  if (series.size() <= static_cast<std::size_t>(order)) {
    throw DomainError("difference: series length " + std::to_string(series.size()) +
                      " insufficient for order " + std::to_string(order));
  }
  std::vector<double> out(series.begin(), series.end());
  for (int k = 0; k < order; ++k) {
    for (std::size_t t = 0; t + 1 < out.size(); ++t) out[t] = out[t + 1] - out[t];
    out.pop_back();
  }
  return out;
}

std::vector<double> reintegrate_forecast(double last_level, std::span<const double> diffs) {
  std::vector<double> out(diffs.size());
  double level = last_level;
  for (std::size_t h = 0; h < diffs.size(); ++h) {
    level += diffs[h];
    out[h] = level;
  }
  return out;
}

namespace {

std::vector<double> apply_step(const std::vector<double>& v, const TransformStep& step) {
  switch (step.kind) {
    case TransformKind::Logit: {
      std::vector<double> out(v.size());
      std::transform(v.begin(), v.end(), out.begin(), logit_transform);
      return out;
    }
    case TransformKind::SeasonalAdjust: return seasonal_adjust(v, step.param);
    case TransformKind::Difference: return difference(v, step.param);
  }
  return v;
}

TimeSeriesFrame rebuild(const TimeSeriesFrame& raw, std::vector<Column> columns) {
  std::size_t len = raw.rows();
  for (const auto& c : columns) len = std::min(len, c.values.size());
  for (const auto& c : columns) {
    if (c.values.size() != len) {
      throw DataError("transform logs imply unequal column lengths");
    }
  }
  std::vector<Period> index(raw.index().end() - static_cast<std::ptrdiff_t>(len), raw.index().end());
  return TimeSeriesFrame(std::move(index), std::move(columns));
}

}  // namespace

TransformedData apply_transforms(const TimeSeriesFrame& raw, const TransformPlan& plan) {
  std::vector<Column> levels;
  for (const auto& c : raw.columns()) {
    Column col = c;
    if (c.name == plan.logit_column) {
      const TransformStep s{TransformKind::Logit, 0};
      col.values = apply_step(col.values, s);
      col.transform_log.push_back(s);
    }
    if (std::find(plan.seasonal_columns.begin(), plan.seasonal_columns.end(), c.name) !=
        plan.seasonal_columns.end()) {
      const TransformStep s{TransformKind::SeasonalAdjust, plan.period};
      col.values = apply_step(col.values, s);
      col.transform_log.push_back(s);
    }
    levels.push_back(std::move(col));
  }
  std::vector<Column> diffed = levels;
  if (plan.difference_order > 0) {
    const TransformStep s{TransformKind::Difference, plan.difference_order};
    for (auto& col : diffed) {
      col.values = apply_step(col.values, s);
      col.transform_log.push_back(s);
    }
  }
  TransformedData out;
  out.levels = rebuild(raw, std::move(levels));
  out.frame = rebuild(raw, std::move(diffed));
  return out;
}

TimeSeriesFrame replay_transforms(const TimeSeriesFrame& raw,
                                  const std::map<std::string, std::vector<TransformStep>>& logs) {
  std::vector<Column> columns;
  for (const auto& c : raw.columns()) {
    Column col = c;
    col.transform_log.clear();
    if (auto it = logs.find(c.name); it != logs.end()) {
      for (const auto& step : it->second) {
        col.values = apply_step(col.values, step);
        col.transform_log.push_back(step);
      }
    }
    columns.push_back(std::move(col));
  }
  return rebuild(raw, std::move(columns));
}

std::map<std::string, std::vector<TransformStep>> transform_logs(const TimeSeriesFrame& frame) {
  std::map<std::string, std::vector<TransformStep>> logs;
  for (const auto& c : frame.columns()) logs[c.name] = c.transform_log;
  return logs;
}

}  // namespace pdbench::data
