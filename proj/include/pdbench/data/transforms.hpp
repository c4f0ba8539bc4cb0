#pragma once

#include "pdbench/data/frame.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace pdbench::data {

/// log(pd / (100 - pd)) for pd in percent; DomainError outside (0, 100).
double logit_transform(double pd);

/// 100 * exp(y) / (1 + exp(y)), evaluated without overflow.
double inverse_logit(double y);

/// Classical additive decomposition: centered moving-average trend, seasonal
/// indices averaged per position and normalized to sum zero, then removed.
std::vector<double> seasonal_adjust(std::span<const double> series, int period = 4);

std::vector<double> difference(std::span<const double> series, int order = 1);

/// Cumulative sum of `diffs` anchored at `last_level`.
std::vector<double> reintegrate_forecast(double last_level, std::span<const double> diffs);

struct TransformPlan {
  std::string logit_column = "PD";
  /// Columns receiving seasonal adjustment.
  std::vector<std::string> seasonal_columns = {"PD", "UNE", "INF", "RRE", "EQP", "EXR", "STR", "LTR"};
  int period = 4;
  int difference_order = 1;
};

struct TransformedData {
  /// After logit and seasonal adjustment, before differencing.
  TimeSeriesFrame levels;
  /// Fully transformed frame (differenced).
  TimeSeriesFrame frame;
};

TransformedData apply_transforms(const TimeSeriesFrame& raw, const TransformPlan& plan);

/// Re-applies per-column transform logs to the raw frame.
TimeSeriesFrame replay_transforms(const TimeSeriesFrame& raw,
                                  const std::map<std::string, std::vector<TransformStep>>& logs);

std::map<std::string, std::vector<TransformStep>> transform_logs(const TimeSeriesFrame& frame);

}  // namespace pdbench::data
