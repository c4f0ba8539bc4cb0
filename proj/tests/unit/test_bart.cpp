#include "fixtures.hpp"

#include "pdbench/bart/bart.hpp"
#include "pdbench/core/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace pdbench;
using namespace pdbench::bart;
using fixtures::gaussian_matrix;
using fixtures::gaussian_vector;

namespace {

BartConfig quick(int trees = 50, std::uint64_t seed = 1) {
  BartConfig c;
  c.num_trees = trees;
  c.n_draws = 400;
  c.n_burn = 100;
  c.seed = seed;
  return c;
}

Vector posterior_mean(const BartPosterior& post, const Matrix& x) {
  return posterior_draws(post, x).colwise().mean().transpose();
}

struct FriedmanData {
  Matrix x, xh;
  Vector y, truth;
};

FriedmanData friedman_data(std::uint64_t seed, int n = 200, int holdout = 100) {
  Rng rng(derive_seed(seed, 41));
  FriedmanData d;
  const Matrix all = fixtures::uniform_matrix(n + holdout, 10, rng);
  d.x = all.topRows(n);
  d.xh = all.bottomRows(holdout);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) d.y(i) = fixtures::friedman(d.x, i) + gaussian_vector(1, rng)(0);
  d.truth.resize(holdout);
  for (int i = 0; i < holdout; ++i) d.truth(i) = fixtures::friedman(d.xh, i);
  return d;
}

}  // namespace

TEST(SplitPrior, ReferenceValues) {
  EXPECT_NEAR(split_prior_prob(0, 0.95, 2.0), 0.95, 1e-15);
  EXPECT_NEAR(split_prior_prob(1, 0.95, 2.0), 0.95 / 4.0, 1e-15);
  EXPECT_NEAR(split_prior_prob(1, 0.95, 2.0), 0.2375, 1e-15);
  for (int d = 0; d < 10; ++d) EXPECT_DOUBLE_EQ(split_prior_prob(d, 0.8, 0.0), 0.8);
  EXPECT_THROW(split_prior_prob(-1, 0.95, 2.0), DomainError);
}

TEST(BartConfig, Validation) {
  BartConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = BartConfig{};
  c.num_trees = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = BartConfig{};
  c.q = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Bart, ConstantTargetIsRecovered) {
  Rng rng(1);
  const Matrix x = gaussian_matrix(40, 3, rng);
  for (double c : {0.0, 3.0, -250.0}) {
    const auto post = bart_fit(x, Vector::Constant(40, c), quick());
    const Vector m = posterior_mean(post, x);
    EXPECT_LT((m.array() - c).abs().maxCoeff(), std::abs(c) * 1e-3 + 1e-3) << c;
  }
}

TEST(Bart, HugeKCollapsesToMean) {
  Rng rng(2);
  const Matrix x = gaussian_matrix(50, 4, rng);
  const Vector y = x.col(0) * 3.0 + gaussian_vector(50, rng);
  auto c = quick();
  c.k = 1000.0;
  const Vector m = posterior_mean(bart_fit(x, y, c), x);
  EXPECT_LT((m.array() - y.mean()).abs().maxCoeff(), 0.01 * (y.maxCoeff() - y.minCoeff()));
}

TEST(Bart, MoreTreesBeatOneTreeOnFriedman) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = friedman_data(seed);
    auto many = quick(50, seed), one = quick(1, seed);
    many.n_draws = one.n_draws = 300;
    const double mae50 = (posterior_mean(bart_fit(d.x, d.y, many), d.xh) - d.truth).cwiseAbs().mean();
    const double mae1 = (posterior_mean(bart_fit(d.x, d.y, one), d.xh) - d.truth).cwiseAbs().mean();
    if (mae50 < mae1) ++wins;
  }
  EXPECT_GE(wins, 9);
}

TEST(Bart, IntervalsNestAndContainPoint) {
  Rng rng(3);
  const Matrix x = gaussian_matrix(60, 5, rng);
  const Vector y = x.col(1).array().sin() + 0.2 * gaussian_vector(60, rng).array();
  const auto post = bart_fit(x, y, quick());
  const auto p = bart_predict(post, gaussian_matrix(30, 5, rng), 5);
  for (Index i = 0; i < 30; ++i) {
    EXPECT_LE(p.lower95(i), p.lower80(i));
    EXPECT_LE(p.lower80(i), p.upper80(i));
    EXPECT_LE(p.upper80(i), p.upper95(i));
    EXPECT_LE(p.lower95(i), p.point(i));
    EXPECT_LE(p.point(i), p.upper95(i));
  }
}

TEST(Bart, PredictionIntervalCoverage) {
  long covered = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(seed, 42));
    const Matrix x = fixtures::uniform_matrix(150, 5, rng);
    Vector y(150);
    for (int i = 0; i < 150; ++i) y(i) = fixtures::friedman(x, i) + gaussian_vector(1, rng)(0);
    const auto post = bart_fit(x.topRows(100), y.head(100), quick(50, seed));
    const auto p = bart_predict(post, x.bottomRows(50), seed);
    for (Index i = 0; i < 50; ++i) {
      const double v = y(100 + i);
      covered += (v >= p.lower95(i) && v <= p.upper95(i)) ? 1 : 0;
      ++total;
    }
  }
  const double rate = static_cast<double>(covered) / static_cast<double>(total);
  EXPECT_GE(rate, 0.88);
  EXPECT_LE(rate, 0.99);
}

TEST(Bart, VariableCounts) {
  const Matrix flat = Matrix::Constant(30, 4, 1.0);
  Rng rng(4);
  const auto stumps = bart_fit(flat, gaussian_vector(30, rng), quick());
  for (auto c : bart_variable_counts(stumps)) EXPECT_EQ(c, 0u);
  // stored trees are single leaves
  for (std::size_t d = 0; d < stumps.draws(); ++d) {
    for (int j = 0; j < stumps.config.num_trees; ++j) {
      EXPECT_EQ(stumps.nodes[stumps.offsets[d * 50 + static_cast<std::size_t>(j)]].var, -1);
    }
  }
  const Matrix x = gaussian_matrix(50, 6, rng);
  const Vector y = x.col(2) + 0.1 * gaussian_vector(50, rng);
  const auto a = bart_fit(x, y, quick(20, 9));
  const auto b = bart_fit(x, y, quick(20, 9));
  EXPECT_EQ(bart_variable_counts(a), bart_variable_counts(b));
  std::uint64_t splits = 0;
  for (const auto& n : a.nodes) splits += n.var >= 0 ? 1 : 0;
  std::uint64_t counted = 0;
  for (auto c : bart_variable_counts(a)) counted += c;
  EXPECT_EQ(counted, splits);
}

TEST(Bart, SparseActiveColumnsRankHigh) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(seed, 43));
    const Matrix x = gaussian_matrix(64, 40, rng);
    const Vector y = 2.0 * x.col(5) + (3.0 * x.col(12)).array().tanh().matrix() * 2.0 - 1.5 * x.col(33) +
                     0.3 * gaussian_vector(64, rng);
    const auto post = bart_fit(x, y, quick(50, seed));
    const auto& counts = bart_variable_counts(post);
    std::vector<std::size_t> order(counts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return counts[a] > counts[b]; });
    const std::vector<std::size_t> top(order.begin(), order.begin() + 10);
    auto in_top = [&](std::size_t v) { return std::find(top.begin(), top.end(), v) != top.end(); };
    if (in_top(5) && in_top(12) && in_top(33)) ++hits;
  }
  EXPECT_GE(hits, 8);
}

TEST(Bart, StoredFitEqualsTreeSum) {
  Rng rng(5);
  const Matrix x = gaussian_matrix(40, 3, rng);
  const Vector y = x.col(0).array().square() + 0.1 * gaussian_vector(40, rng).array();
  const auto post = bart_fit(x, y, quick(10));
  ASSERT_EQ(post.draws(), 400u);
  const Matrix f = posterior_draws(post, x);
  EXPECT_EQ(f.rows(), post.train_fit.rows());
  EXPECT_LT((f - post.train_fit).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + y.cwiseAbs().maxCoeff()));
  for (double s : post.sigma) EXPECT_GT(s, 0.0);
}

TEST(Bart, SigmaTraceStabilizes) {
  Rng rng(6);
  const Matrix x = gaussian_matrix(64, 5, rng);
  const Vector y = x.col(0) + 0.5 * gaussian_vector(64, rng);
  const auto post = bart_fit(x, y, quick());
  const auto& s = post.sigma;
  const double full = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  const double half =
      std::accumulate(s.begin() + static_cast<long>(s.size() / 2), s.end(), 0.0) / static_cast<double>(s.size() - s.size() / 2);
  EXPECT_LT(std::abs(half - full) / full, 0.10);
}

TEST(Bart, RejectedProposalsLeaveTreeUntouched) {
  Rng data_rng(7);
  const Matrix x = gaussian_matrix(40, 4, data_rng);
  const Vector r = x.col(0) + 0.3 * gaussian_vector(40, data_rng);
  BartConfig c;
  auto tree = SamplerTree::root(x);
  Rng rng(8);
  int rejected = 0, accepted = 0;
  for (int it = 0; it < 3000; ++it) {
    const SamplerTree before = tree;
    const auto res = structure_step(tree, x, r, 0.1, 0.05, c, rng);
    if (!res.accepted) {
      ++rejected;
      ASSERT_TRUE(tree == before) << "iteration " << it;
    } else {
      ++accepted;
      // every row routes to exactly one live leaf
      std::vector<int> hits(40, 0);
      for (const auto& n : tree.nodes) {
        if (n.alive && n.leaf()) {
          for (auto i : n.rows) ++hits[static_cast<std::size_t>(i)];
        }
      }
      for (int h : hits) ASSERT_EQ(h, 1);
    }
  }
  EXPECT_GT(rejected, 0);
  EXPECT_GT(accepted, 0);
}

TEST(Bart, LargerKShrinksSpread) {
  Rng rng(9);
  const Matrix x = gaussian_matrix(60, 4, rng);
  const Vector y = 2.0 * x.col(0) + x.col(1).array().square().matrix() + 0.3 * gaussian_vector(60, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (double k : {0.5, 1.0, 2.0, 4.0, 8.0, 32.0}) {
    auto c = quick();
    c.k = k;
    const Vector m = posterior_mean(bart_fit(x, y, c), x);
    const double spread = m.maxCoeff() - m.minCoeff();
    EXPECT_LE(spread, prev) << "k=" << k;
    prev = spread;
  }
}

TEST(Bart, AffineTargetRescaling) {
  Rng rng(10);
  const Matrix x = gaussian_matrix(60, 4, rng);
  const Vector y = x.col(0) + 0.3 * gaussian_vector(60, rng);
  const double a = 37.5, b = -12.0;
  const Vector base = posterior_mean(bart_fit(x, y, quick()), x);
  const Vector scaled = posterior_mean(bart_fit(x, (a * y.array() + b).matrix(), quick()), x);
  const double sd = std::sqrt((y.array() - y.mean()).square().mean());
  EXPECT_LT(((scaled.array() - b) / a - base.array()).abs().maxCoeff(), 0.1 * sd);
}

TEST(Bart, ChainsAreBackendIndependent) {
  Rng rng(11);
  const Matrix x = gaussian_matrix(40, 3, rng);
  const Vector y = gaussian_vector(40, rng);
  auto c = quick(10);
  c.n_chains = 3;
  c.n_draws = 300;
  const auto s = bart_fit(x, y, c, Exec::serial());
  const auto p = bart_fit(x, y, c, Exec::openmp(3));
  EXPECT_EQ(s.train_fit, p.train_fit);
  EXPECT_EQ(s.sigma, p.sigma);
  EXPECT_EQ(s.draws(), 300u);
}

TEST(Bart, ColumnMismatchAndJson) {
  Rng rng(12);
  const Matrix x = gaussian_matrix(30, 3, rng);
  const auto post = bart_fit(x, gaussian_vector(30, rng), quick(5));
  EXPECT_THROW(posterior_draws(post, Matrix::Zero(2, 4)), DataError);
  const auto pred = bart_predict(post, x.topRows(4), 1);
  const auto j = to_json(post, pred);
  EXPECT_EQ(j["point"].size(), 4u);
  EXPECT_EQ(j["sigma"].size(), post.draws());
  EXPECT_EQ(j["variable_counts"].size(), 3u);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 1.0), 4.0);
}
