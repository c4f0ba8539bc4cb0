#pragma once

#include "pdbench/core/linalg.hpp"
#include "pdbench/eval/comparison.hpp"

#include <json.hpp>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace pdbench::eval {

struct StabilityResult {
  std::vector<std::string> kept;
  std::vector<std::string> dropped;
  /// Failed plus flat windows per model.
  std::map<std::string, std::size_t> bad;
  std::map<std::string, std::size_t> total;
};

/// True when bad / total reaches the threshold.
bool stability_drop(std::size_t bad, std::size_t total, double threshold = 0.25);

/// Model order of the table is preserved in `kept` and `dropped`.
StabilityResult stability_filter(const MetricTable& table, double threshold = 0.25);

/// Ranks 1..n with tied values sharing the average of their ranks; NaN and
/// +inf sort last.
std::vector<double> average_ranks(std::span<const double> values);

struct RankMatrix {
  std::vector<std::string> models;
  std::vector<std::size_t> windows;
  Matrix ranks;  // windows x models
  Matrix mae;    // failed entries are +inf

  Vector mean_ranks() const { return ranks.colwise().mean().transpose(); }
};

/// Within-window ranks of MAE for the listed models; failed windows rank as +inf.
RankMatrix rank_models(const MetricTable& table, const std::vector<std::string>& models);

struct RankTestResult {
  std::vector<std::string> models;
  Vector mean_rank;
  Vector lower;
  Vector upper;
  std::size_t best = 0;
  std::vector<bool> in_best_group;
  double alpha = 0.05;
  double half_width = 0.0;
  double residual_variance = 0.0;
  double t_critical = 0.0;
  std::size_t dof = 0;

  std::vector<std::string> best_group() const;
};

/// Rank-on-dummies regression with the best model as baseline, pooled
/// residual variance and Student-t bounds; a model belongs to the best group
/// when its interval intersects the best model's interval.
RankTestResult rmcb(const RankMatrix& ranks, double alpha = 0.05);

nlohmann::json to_json(const RankTestResult& r);

}  // namespace pdbench::eval
