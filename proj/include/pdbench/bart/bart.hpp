#pragma once

#include "pdbench/core/exec.hpp"
#include "pdbench/core/linalg.hpp"
#include "pdbench/core/rng.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace pdbench::bart {

struct BartConfig {
  int num_trees = 50;
  double k = 2.0;
  double alpha = 0.95;
  double beta = 2.0;
  double nu = 3.0;
  double q = 0.90;
  int n_draws = 1000;
  int n_burn = 250;
  /// Independent chains, each burned in for n_burn sweeps; the n_draws kept
  /// draws are split across them and pooled.
  int n_chains = 4;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field is outside its domain.
  void validate() const;
};

/// Prior probability alpha (1 + depth)^-beta that a node at `depth` splits.
double split_prior_prob(int depth, double alpha, double beta);

/// Tree under construction by the sampler. Each node keeps the training rows
/// routed to it; removed nodes stay in the vector flagged dead.
struct SamplerNode {
  int var = -1;
  double cut = 0.0;
  int left = -1;
  int right = -1;
  int parent = -1;
  int depth = 0;
  double mu = 0.0;
  bool alive = true;
  /// Leaf has at least one column that is non-constant on its rows.
  bool growable = false;
  std::vector<Index> rows;

  bool leaf() const { return var < 0; }
  bool operator==(const SamplerNode&) const = default;
};

struct SamplerTree {
  std::vector<SamplerNode> nodes;

  static SamplerTree root(const Matrix& x);
  std::size_t leaf_count() const;
  bool operator==(const SamplerTree&) const = default;
};

enum class Move { None, Grow, Prune, Change };

struct StepResult {
  Move move = Move::None;
  bool accepted = false;
};

/// One Metropolis-Hastings structure proposal for `tree` against residuals
/// `r`, integrating out the leaf values. A rejected proposal leaves the tree
/// untouched.
StepResult structure_step(SamplerTree& tree, const Matrix& x, const Vector& r, double sigma2,
                          double tau2, const BartConfig& config, Rng& rng);

/// Compact tree stored per posterior draw.
struct StoredNode {
  int var = -1;
  double cut = 0.0;
  int left = -1;
  int right = -1;
  double mu = 0.0;
};

struct BartPosterior {
  BartConfig config;
  std::size_t n_columns = 0;
  /// Original-scale target = shift + scale * internal target.
  double shift = 0.0;
  double scale = 1.0;
  double sigma_hat = 0.0;
  double lambda = 0.0;
  /// Nodes of all stored trees; tree (d, j) starts at offsets[d * N + j].
  std::vector<StoredNode> nodes;
  std::vector<std::uint32_t> offsets;
  /// Per kept draw, original scale.
  std::vector<double> sigma;
  Matrix train_fit;  // draws x rows
  std::vector<std::uint64_t> variable_counts;

  std::size_t draws() const { return sigma.size(); }
  /// Sum-of-trees value of draw d for one row, original scale.
  double evaluate(std::size_t draw, const double* row, Index stride) const;
};

BartPosterior bart_fit(const Matrix& x, const Vector& y, const BartConfig& config,
                       const Exec& exec = Exec::serial());

/// f(x) per draw (draws x rows), original scale.
Matrix posterior_draws(const BartPosterior& post, const Matrix& x);

/// f(x) plus Gaussian noise with the draw's sigma (draws x rows).
Matrix predictive_draws(const BartPosterior& post, const Matrix& x, std::uint64_t seed);

struct BartPrediction {
  Vector point;
  Vector lower80, upper80, lower95, upper95;
};

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

/// Point = posterior mean of f; bands = quantiles of the predictive draws.
BartPrediction bart_predict(const BartPosterior& post, const Matrix& x, std::uint64_t seed);

/// Split counts per column over all kept draws.
const std::vector<std::uint64_t>& bart_variable_counts(const BartPosterior& post);

nlohmann::json to_json(const BartPosterior& post, const BartPrediction& prediction);

}  // namespace pdbench::bart
