#include "pdbench/models/forest.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/core/rng.hpp"

#include <algorithm>
#include <numeric>

namespace pdbench::models {

Vector ForestPredictor::predict(const Matrix& x) const {
  Vector out = Vector::Zero(x.rows());
  for (const auto& t : trees_) out += t.predict(x);
  return out / static_cast<double>(trees_.size());
}

ForestPredictor fit_forest(const Matrix& x, const Vector& y, const ForestOptions& opt,
                           std::uint64_t seed, const Exec& exec) {
  if (opt.num_trees < 1) throw ConfigError("rf: num_trees must be >= 1");
  if (x.rows() < 1) throw FitError("rf: no training rows");
  const auto p = static_cast<int>(x.cols());
  TreeOptions to;
  to.cp = 0.0;
  to.min_split = std::max(2, opt.min_node_size);
  to.min_leaf = 1;
  to.mtry = opt.mtry > 0 ? std::min(opt.mtry, p) : std::max(1, p / 3);
  const auto n = static_cast<std::size_t>(x.rows());

  std::vector<RegressionTree> trees(static_cast<std::size_t>(opt.num_trees));
  parallel_for(exec, trees.size(), [&](std::size_t t) {
    Rng rng(derive_seed(seed, 0x7265u, t));
    std::vector<Index> rows(n);
    if (opt.bootstrap) {
      std::uniform_int_distribution<Index> pick(0, static_cast<Index>(n) - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), Index{0});
    }
    trees[t] = grow_tree(x, y, rows, to, &rng);
  });
  return ForestPredictor(std::move(trees));
}

}  // namespace pdbench::models
