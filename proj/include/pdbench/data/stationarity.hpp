#pragma once

#include "pdbench/data/frame.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace pdbench::data {

struct AdfResult {
  double statistic = 0.0;
  int lags = 0;
  std::size_t nobs = 0;
  double critical_1 = 0.0;
  double critical_5 = 0.0;
  double critical_10 = 0.0;
  bool rejects_unit_root = false;  // at 5%
  bool degenerate = false;
};

struct KpssResult {
  double statistic = 0.0;
  int lags = 0;
  double critical_5 = 0.463;
  bool rejects_stationarity = false;  // at 5%
  bool degenerate = false;
};

inline constexpr int kAdfMaxLag = 4;
inline constexpr std::size_t kMinUnitRootLength = 20;

/// ADF regression with constant; lag order minimizes BIC over 0..max_lag on a
/// common sample, then the chosen order is refit on the full sample.
AdfResult adf_test(std::span<const double> series, int max_lag = kAdfMaxLag);

/// Level-stationarity KPSS with Bartlett long-run variance and the
/// Hobijn-Franses-Ooms automatic bandwidth.
KpssResult kpss_test(std::span<const double> series);

/// MacKinnon response-surface critical value for the constant-only ADF test.
double adf_critical_value(double level, std::size_t nobs);

struct StationarityEntry {
  std::string column;
  AdfResult adf;
  KpssResult kpss;
};

struct StationarityReport {
  std::vector<StationarityEntry> entries;
};

StationarityReport stationarity_report(const TimeSeriesFrame& frame);

nlohmann::json to_json(const StationarityReport& report);

}  // namespace pdbench::data
