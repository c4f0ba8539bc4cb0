#pragma once

#include <cstddef>
#include <vector>

namespace pdbench::data {

struct Window {
  std::size_t id = 0;
  /// Training rows are [0, train_end); holdout rows [train_end, train_end + holdout).
  std::size_t train_end = 0;
  std::size_t holdout = 0;
};

struct CvPlan {
  std::vector<Window> windows;
  std::size_t initial_train = 0;
  std::size_t holdout = 0;
  std::size_t step = 1;
};

/// Expanding-origin plan; throws ConfigError on infeasible sizes.
CvPlan rolling_windows(std::size_t t_eff, std::size_t initial_train, std::size_t holdout = 12,
                       std::size_t step = 1);

}  // namespace pdbench::data
