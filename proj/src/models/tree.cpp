#include "pdbench/models/tree.hpp"

#include "pdbench/core/error.hpp"

#include <algorithm>
#include <numeric>

namespace pdbench::models {

double RegressionTree::predict_row(const double* row, Index stride) const {
  int k = 0;
  while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(k)];
    k = row[static_cast<Index>(n.feature) * stride] <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(k)].value;
}

Vector RegressionTree::predict(const Matrix& x) const {
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) out(i) = predict_row(x.data() + i, x.rows());
  return out;
}

std::size_t RegressionTree::leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

struct Builder {
  const Matrix& x;
  const Vector& y;
  const TreeOptions& opt;
  Rng* rng;
  double min_gain = 0.0;
  std::vector<TreeNode> nodes;
  std::vector<Index> features;

  static double sse_of(const Vector& y, const std::vector<Index>& rows, double& mean) {
    double s = 0.0;
    for (auto r : rows) s += y(r);
    mean = s / static_cast<double>(rows.size());
    double q = 0.0;
    for (auto r : rows) q += (y(r) - mean) * (y(r) - mean);
    return q;
  }

  int build(std::vector<Index> rows, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double mean = 0.0;
    const double sse = sse_of(y, rows, mean);
    nodes[static_cast<std::size_t>(id)].value = mean;
    nodes[static_cast<std::size_t>(id)].count = static_cast<int>(rows.size());
    const auto n = static_cast<int>(rows.size());
    if (n < opt.min_split || n < 2 * opt.min_leaf || depth >= opt.max_depth || sse <= 0.0) return id;

    const auto p = static_cast<Index>(x.cols());
    std::vector<Index> candidates;
    if (opt.mtry > 0 && opt.mtry < p) {
      for (Index j = 0; j < p; ++j) features[static_cast<std::size_t>(j)] = j;
      // partial Fisher-Yates draw, then index order for deterministic ties
      for (int k = 0; k < opt.mtry; ++k) {
        std::uniform_int_distribution<Index> pick(k, p - 1);
        std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(pick(*rng))]);
      }
      candidates.assign(features.begin(), features.begin() + opt.mtry);
      std::sort(candidates.begin(), candidates.end());
    } else {
      candidates.resize(static_cast<std::size_t>(p));
      std::iota(candidates.begin(), candidates.end(), Index{0});
    }

    double best_gain = 0.0;
    Index best_feature = -1;
    double best_threshold = 0.0;
    std::vector<Index> order(rows);
    const double total = mean * n;
    for (auto j : candidates) {
      std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        return x(a, j) < x(b, j) || (x(a, j) == x(b, j) && a < b);
      });
      double left_sum = 0.0;
      for (int k = 0; k + 1 < n; ++k) {
        left_sum += y(order[static_cast<std::size_t>(k)]);
        const double xv = x(order[static_cast<std::size_t>(k)], j);
        const double xn = x(order[static_cast<std::size_t>(k + 1)], j);
        const int nl = k + 1, nr = n - nl;
        if (nl < opt.min_leaf || nr < opt.min_leaf || !(xv < xn)) continue;
        const double right_sum = total - left_sum;
        // SSE reduction = nl*ml^2 + nr*mr^2 - n*m^2
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - total * total / n;
        if (gain > best_gain * (1.0 + 1e-12) + 1e-300) {
          best_gain = gain;
          best_feature = j;
          best_threshold = 0.5 * (xv + xn);
        }
      }
    }
    if (best_feature < 0 || best_gain < min_gain || !(best_gain > 1e-12 * sse)) return id;

    std::vector<Index> left, right;
    for (auto r : rows) (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    auto& node = nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(best_feature);
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace

RegressionTree grow_tree(const Matrix& x, const Vector& y, const std::vector<Index>& rows,
                         const TreeOptions& options, Rng* rng) {
  if (rows.empty()) throw FitError("tree: no training rows");
  if (options.mtry > 0 && options.mtry < x.cols() && rng == nullptr) {
    throw FitError("tree: feature subsampling needs an rng");
  }
  Builder b{x, y, options, rng, 0.0, {}, std::vector<Index>(static_cast<std::size_t>(x.cols()))};
  double mean = 0.0;
  const double root_sse = Builder::sse_of(y, rows, mean);
  b.min_gain = options.cp * root_sse;
  b.build(rows, 0);
  RegressionTree tree;
  tree.mutable_nodes() = std::move(b.nodes);
  return tree;
}

CartPredictor fit_cart(const Matrix& x, const Vector& y, const TreeOptions& options) {
  std::vector<Index> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  return CartPredictor(grow_tree(x, y, rows, options, nullptr));
}

}  // namespace pdbench::models
