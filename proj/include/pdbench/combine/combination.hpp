#pragma once

#include "pdbench/combine/weights.hpp"
#include "pdbench/core/exec.hpp"
#include "pdbench/eval/comparison.hpp"
#include "pdbench/eval/ranking.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace pdbench::combine {

enum class Method { Avg, Ng, Cls, Sea };
enum class Scenario { All, Top8, TopGroup };

std::string_view to_string(Method m);
std::string_view to_string(Scenario s);
Method parse_method(std::string_view s);
Scenario parse_scenario(std::string_view s);

/// "NG:top8" style identifier used in metric tables.
std::string combination_id(Method m, Scenario s);

struct CombinationWeights {
  Method method = Method::Avg;
  Scenario scenario = Scenario::All;
  std::vector<std::string> members;
  Vector weights;
  bool regularized = false;
};

struct ScenarioSelection {
  Scenario scenario = Scenario::All;
  std::vector<std::string> members;
  std::vector<std::string> warnings;
};

/// `all`: every kept model. `top8`: the RMCB best group. `top_group`: the
/// lowest mean-MAE kept model of each category, in category order.
ScenarioSelection select_scenario(const eval::RankTestResult& ranking, const eval::MetricTable& metrics,
                                  const std::vector<std::string>& kept, Scenario scenario);

enum class ErrorSample {
  /// (window, step) pairs whose target row precedes the current training end.
  Observed,
  /// Complete holdout paths of every earlier window, including rows that are
  /// not yet observed at the current origin.
  AllPrior,
};

struct CombinationOptions {
  std::vector<Method> methods{Method::Avg, Method::Ng, Method::Cls, Method::Sea};
  std::vector<Scenario> scenarios{Scenario::All, Scenario::Top8, Scenario::TopGroup};
  /// Recompute weights at every window; otherwise keep the first estimate.
  bool reestimate = true;
  ErrorSample error_sample = ErrorSample::Observed;
  /// NG and SEA are not run on the `all` scenario.
  bool disable_inverse_on_all = true;
};

struct WindowCombination {
  std::size_t window = 0;
  bool available = false;
  std::string reason;
  std::size_t observations = 0;
  Vector weights;
  bool regularized = false;
  bool clipped = false;
  std::vector<double> point;
  double mae = 0.0;
};

struct CombinationRun {
  Method method = Method::Avg;
  Scenario scenario = Scenario::All;
  std::string id;
  std::vector<std::string> members;
  std::vector<WindowCombination> windows;

  std::size_t unavailable() const;
};

struct SummaryRow {
  std::string id;
  double mean_mae = 0.0;
  double mean_rank = 0.0;
  /// Reference MAE / own MAE, reference rank / own rank.
  double mae_ratio = 0.0;
  double rank_ratio = 0.0;
  std::size_t windows = 0;
  std::size_t unavailable = 0;
};

struct CombinationResult {
  std::vector<ScenarioSelection> scenarios;
  std::vector<CombinationRun> runs;
  /// Scored combination forecasts, ready to append to the metric table.
  eval::MetricTable metrics;
  std::string reference;
  std::vector<std::size_t> summary_windows;
  std::vector<SummaryRow> summary;
};

/// Weights for one window from the member errors available at its origin.
/// Throws DomainError when the method cannot be estimated.
CombinationWeights estimate_weights(Method method, const eval::Comparison& comparison,
                                    const std::vector<std::size_t>& members, std::size_t window,
                                    ErrorSample sample, std::size_t* observations = nullptr, bool* clipped = nullptr);

/// Rolling combinations over every window after the first. Summary rows
/// cover the reference model, `bma` when present, and every combination,
/// ranked against each other per window on the common windows.
CombinationResult evaluate_combinations(const eval::Comparison& comparison, const data::DesignMatrix& design,
                                        const eval::RankTestResult& ranking, const std::vector<std::string>& kept,
                                        const CombinationOptions& options = {}, const Exec& exec = Exec::serial(),
                                        const std::string& reference = "bart");

nlohmann::json to_json(const CombinationResult& r);

/// Table-style aligned text of the summary.
std::string format_summary(const CombinationResult& r);

}  // namespace pdbench::combine
