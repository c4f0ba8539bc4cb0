#pragma once

#include "pdbench/core/linalg.hpp"
#include "pdbench/data/frame.hpp"

#include <string>
#include <vector>

namespace pdbench::data {

/// Lag-block-ordered predictors: columns [0, n_base) hold lag 0, the next
/// n_base columns lag 1, and so on up to `lags`.
struct DesignMatrix {
  Matrix x;
  Vector y;
  std::vector<std::string> column_names;
  std::vector<std::string> base_names;
  std::vector<Period> origin;
  /// Target on the pre-differencing (logit level) scale, per row.
  Vector level;
  int lags = 0;
  int diff_order = 0;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(x.cols()); }
  std::size_t n_base() const { return base_names.size(); }
  std::size_t column_index(std::size_t base, int lag) const { return lag * n_base() + base; }

  /// Rows [begin, end) as a new design sharing metadata.
  DesignMatrix slice(std::size_t begin, std::size_t end) const;
};

/// `frame` must be fully transformed. `levels` carries the target before
/// differencing; required whenever the target was differenced.
DesignMatrix build_design(const TimeSeriesFrame& frame, const std::string& target, int lags = 4,
                          const TimeSeriesFrame* levels = nullptr);

}  // namespace pdbench::data
