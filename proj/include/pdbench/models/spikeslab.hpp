#pragma once

#include "pdbench/models/linear.hpp"

#include <cstdint>
#include <vector>

namespace pdbench::models {

struct SpikeSlabOptions {
  /// Cap on the number of retained predictors.
  std::size_t vars = 10;
  int draws = 2000;
  int burn = 500;
  double prior_inclusion = 0.5;
  /// Slab variance of a standardized coefficient is sigma^2 * slab_scale / n.
  double slab_scale = 2.0;
  /// Spike variance as a multiple of the slab variance.
  double spike_ratio = 1e-4;
};

struct SpikeSlabFit {
  LinearPredictor predictor;
  /// Posterior inclusion probability per column.
  std::vector<double> inclusion;
  std::vector<std::size_t> retained;
};

/// Collapsed single-site Gibbs sampler over Bernoulli inclusion indicators
/// with a Gaussian slab and a narrow Gaussian spike.
SpikeSlabFit fit_spikeslab(const Matrix& x, const Vector& y, const SpikeSlabOptions& options,
                           std::uint64_t seed);

}  // namespace pdbench::models
