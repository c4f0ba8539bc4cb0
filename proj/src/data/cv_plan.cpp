#include "pdbench/data/cv_plan.hpp"

#include "pdbench/core/error.hpp"

#include <string>

namespace pdbench::data {

CvPlan rolling_windows(std::size_t t_eff, std::size_t initial_train, std::size_t holdout,
                       std::size_t step) {
  if (initial_train < 1) throw ConfigError("rolling_windows: initial_train must be >= 1");
  if (holdout < 1) throw ConfigError("rolling_windows: holdout must be >= 1");
  if (step < 1) throw ConfigError("rolling_windows: step must be >= 1");
  if (t_eff < initial_train + holdout) {
    throw ConfigError("rolling_windows: " + std::to_string(t_eff) + " rows cannot hold " +
                      std::to_string(initial_train) + " training plus " + std::to_string(holdout) +
                      " holdout rows");
  }
  CvPlan plan;
  plan.initial_train = initial_train;
  plan.holdout = holdout;
  plan.step = step;
  for (std::size_t end = initial_train; end + holdout <= t_eff; end += step) {
    plan.windows.push_back({plan.windows.size(), end, holdout});
  }
  return plan;
}

}  // namespace pdbench::data
