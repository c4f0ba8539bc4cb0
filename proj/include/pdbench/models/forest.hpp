#pragma once

#include "pdbench/models/tree.hpp"

#include <cstdint>
#include <vector>

namespace pdbench::models {

struct ForestOptions {
  int num_trees = 500;
  /// Features tried per node; <= 0 selects max(1, p/3).
  int mtry = -1;
  /// Nodes smaller than this are not split.
  int min_node_size = 5;
  bool bootstrap = true;
};

class ForestPredictor : public Predictor {
 public:
  explicit ForestPredictor(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}
  Vector predict(const Matrix& x) const override;
  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  std::vector<RegressionTree> trees_;
};

/// Tree t uses its own stream derived from (seed, t), so the forest does not
/// depend on the execution backend.
ForestPredictor fit_forest(const Matrix& x, const Vector& y, const ForestOptions& options,
                           std::uint64_t seed, const Exec& exec = Exec::serial());

}  // namespace pdbench::models
