#pragma once

#include "pdbench/core/rng.hpp"
#include "pdbench/models/model.hpp"

#include <vector>

namespace pdbench::models {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  int count = 0;
};

struct TreeOptions {
  /// A split must reduce SSE by at least cp times the root SSE.
  double cp = 0.01;
  int min_split = 6;
  int min_leaf = 2;
  /// Candidate features per node; 0 or >= p means all of them.
  int mtry = 0;
  int max_depth = 30;
};

class RegressionTree {
 public:
  double predict_row(const double* row, Index stride) const;
  Vector predict(const Matrix& x) const;

  std::size_t leaves() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& mutable_nodes() { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

/// Greedy variance-reduction tree on the rows listed in `rows` (repeats
/// allowed, as in a bootstrap sample). Thresholds are midpoints between
/// adjacent distinct values. `rng` is only consulted when mtry < p.
RegressionTree grow_tree(const Matrix& x, const Vector& y, const std::vector<Index>& rows,
                         const TreeOptions& options, Rng* rng);

class CartPredictor : public Predictor {
 public:
  explicit CartPredictor(RegressionTree tree) : tree_(std::move(tree)) {}
  Vector predict(const Matrix& x) const override { return tree_.predict(x); }
  const RegressionTree& tree() const { return tree_; }

 private:
  RegressionTree tree_;
};

CartPredictor fit_cart(const Matrix& x, const Vector& y, const TreeOptions& options);

}  // namespace pdbench::models
