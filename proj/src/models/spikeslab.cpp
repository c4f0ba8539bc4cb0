#include "pdbench/models/spikeslab.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pdbench::models {

SpikeSlabFit fit_spikeslab(const Matrix& x, const Vector& y, const SpikeSlabOptions& opt,
                           std::uint64_t seed) {
  if (x.rows() < 2) throw FitError("spikeslab: need at least two training rows");
  if (opt.draws < 1 || opt.burn < 0) throw FitError("spikeslab: invalid chain length");
  const auto s = Standardizer::fit(x);
  const Matrix z = s.transform(x);
  const Index n = z.rows();
  const Index p = z.cols();
  const double ym = y.mean();
  const Vector yc = y.array() - ym;

  const double slab = opt.slab_scale / static_cast<double>(n);
  const double spike = opt.spike_ratio * slab;
  const double log_prior_odds = std::log(opt.prior_inclusion / (1.0 - opt.prior_inclusion));
  // weak inverse-gamma prior on sigma^2
  constexpr double a0 = 1.0;
  const double b0 = 1e-3 * std::max(1e-12, yc.squaredNorm() / static_cast<double>(n));

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const Vector zz = z.colwise().squaredNorm().transpose();
  Vector beta = Vector::Zero(p);
  std::vector<char> gamma(static_cast<std::size_t>(p), 0);
  Vector r = yc;
  double sigma2 = std::max(1e-12, yc.squaredNorm() / static_cast<double>(n));

  Vector beta_sum = Vector::Zero(p);
  std::vector<double> incl_sum(static_cast<std::size_t>(p), 0.0);

  const int total = opt.burn + opt.draws;
  for (int it = 0; it < total; ++it) {
    for (Index j = 0; j < p; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (zz(j) <= 0.0) {
        gamma[ju] = 0;
        beta(j) = 0.0;
        continue;
      }
      r.noalias() += beta(j) * z.col(j);
      const double zr = z.col(j).dot(r);
      // log marginal of the partial residual under a coefficient variance v
      auto log_marginal = [&](double v) {
        const double d = 1.0 + v * zz(j);
        return -0.5 * std::log(d) + 0.5 * zr * zr * v / (sigma2 * d);
      };
      const double log_odds = log_prior_odds + log_marginal(slab) - log_marginal(spike);
      const double p_in = 1.0 / (1.0 + std::exp(-log_odds));
      gamma[ju] = unif(rng) < p_in ? 1 : 0;
      const double v = gamma[ju] ? slab : spike;
      const double d = 1.0 + v * zz(j);
      const double post_mean = v * zr / d;
      const double post_sd = std::sqrt(sigma2 * v / d);
      beta(j) = post_mean + post_sd * normal(rng);
      r.noalias() -= beta(j) * z.col(j);
    }
    double penalty = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double v = gamma[static_cast<std::size_t>(j)] ? slab : spike;
      penalty += beta(j) * beta(j) / v;
    }
    const double shape = a0 + 0.5 * static_cast<double>(n + p);
    const double rate = b0 + 0.5 * (r.squaredNorm() + penalty);
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    sigma2 = 1.0 / std::max(1e-300, g(rng));

    if (it >= opt.burn) {
      beta_sum += beta;
      for (Index j = 0; j < p; ++j) incl_sum[static_cast<std::size_t>(j)] += gamma[static_cast<std::size_t>(j)];
    }
  }

  SpikeSlabFit out;
  out.inclusion.resize(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    out.inclusion[static_cast<std::size_t>(j)] = incl_sum[static_cast<std::size_t>(j)] / opt.draws;
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.inclusion[a] > out.inclusion[b];
  });
  const std::size_t keep = std::min(opt.vars, order.size());
  out.retained.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  std::sort(out.retained.begin(), out.retained.end());

  Vector beta_std = Vector::Zero(p);
  for (auto j : out.retained) beta_std(static_cast<Index>(j)) = beta_sum(static_cast<Index>(j)) / opt.draws;
  Vector beta_raw = s.unscale_coefficients(beta_std);
  out.predictor = LinearPredictor(ym - s.mean.dot(beta_raw), beta_raw);
  return out;
}

}  // namespace pdbench::models
