#pragma once

#include "pdbench/models/model.hpp"

#include <cstdint>
#include <vector>

namespace pdbench::models {

struct BmaOptions {
  int mc3_draws = 10000;
  /// Model spaces up to this size are enumerated exactly instead of sampled.
  std::size_t enumerate_limit = 4096;
  /// Models with normalized weight below this are dropped from the average.
  double weight_floor = 1e-10;
};

/// One submodel: lag depth per base variable, -1 meaning excluded and d >= 0
/// meaning lags 0..d all included.
struct BmaModel {
  std::vector<int> depth;
  double log_marginal = 0.0;
  double weight = 0.0;
  double intercept = 0.0;
  /// Coefficients over the full design (zero for excluded columns).
  Vector beta;
};

class BmaPredictor : public Predictor {
 public:
  Vector predict(const Matrix& x) const override;

  std::vector<BmaModel> models;
  /// Posterior probability that each base variable enters.
  std::vector<double> inclusion;
  std::size_t visited = 0;
  bool enumerated = false;
};

/// BIC approximation -n/2 log(RSS/n) - k/2 log n of an OLS submodel with
/// intercept; -inf when the submodel is not identified.
double bic_log_marginal(const Matrix& x, const Vector& y, const std::vector<Index>& columns);

/// Columns of `depth` under the lag-block layout.
std::vector<Index> bma_columns(const std::vector<int>& depth, const ColumnLayout& layout);

BmaPredictor fit_bma(const Matrix& x, const Vector& y, const ColumnLayout& layout,
                     const BmaOptions& options, std::uint64_t seed);

}  // namespace pdbench::models
