#pragma once

#include "pdbench/core/exec.hpp"
#include "pdbench/data/cv_plan.hpp"
#include "pdbench/data/design.hpp"
#include "pdbench/models/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pdbench::eval {

enum class Status { Ok, Failed, Flat };

std::string_view to_string(Status s);
Status parse_status(std::string_view s);

/// A differenced-scale path with standard deviation below this is flat.
inline constexpr double kFlatTolerance = 1e-6;

/// One model's forecast for one window, on logit levels unless noted.
struct WindowForecast {
  std::string model;
  std::size_t window = 0;
  std::size_t train_end = 0;
  Status status = Status::Failed;
  std::string message;
  std::vector<double> point;
  std::vector<double> diff_point;
  std::vector<double> lower80, upper80, lower95, upper95;
  std::vector<double> actual;

  bool has_point() const { return !point.empty(); }
  bool has_intervals() const { return !lower95.empty(); }
};

struct ForecastRecord {
  std::string model;
  std::size_t window = 0;
  int h = 0;
  std::optional<double> point;
  std::optional<double> lower80, upper80, lower95, upper95;
  Status status = Status::Failed;
};

std::vector<ForecastRecord> to_records(const WindowForecast& f);

/// Population standard deviation of a (differenced) forecast path.
double path_sd(const std::vector<double>& diffs);

/// Fits on rows [0, train_end) and forecasts the holdout; estimation
/// failures become status=failed rather than exceptions.
WindowForecast forecast_window(const models::ModelSpec& spec, const data::DesignMatrix& design,
                               const data::Window& window, const Exec& inner = Exec::serial());

struct MetricRow {
  std::string model;
  std::size_t window = 0;
  std::size_t train_len = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  double mase = 0.0;
  /// MAE on the differenced scale, reported separately.
  double mae_diff = 0.0;
  Status status = Status::Failed;
};

struct MetricTable {
  std::vector<MetricRow> rows;

  std::vector<std::string> models() const;
  const MetricRow* find(const std::string& model, std::size_t window) const;
};

/// Scores a forecast against its actuals; failed forecasts get NaN metrics.
MetricRow score(const WindowForecast& f, const data::DesignMatrix& design);

/// True for windows whose training sample does not exceed the predictor count.
inline bool overfit_window(std::size_t train_len, std::size_t n_columns) { return train_len <= n_columns; }

struct Comparison {
  std::vector<std::string> models;
  data::CvPlan plan;
  /// Model-major: forecasts[m * windows + w].
  std::vector<WindowForecast> forecasts;
  MetricTable metrics;

  const WindowForecast& at(std::size_t model, std::size_t window) const {
    return forecasts[model * plan.windows.size() + window];
  }
};

/// Every (model, window) pair is an independent task; the model seed is
/// mixed with the window id so each fit has its own stream.
Comparison run_comparison(const std::vector<models::ModelSpec>& specs, const data::DesignMatrix& design,
                          const data::CvPlan& plan, const Exec& exec = Exec::serial());

std::uint64_t window_seed(std::uint64_t model_seed, std::size_t window);

}  // namespace pdbench::eval
