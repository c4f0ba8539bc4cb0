#include "pdbench/models/bma.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

namespace pdbench::models {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SubmodelFit {
  double log_marginal = kNegInf;
  double intercept = 0.0;
  Vector beta;  // over the selected columns
};

SubmodelFit fit_submodel(const Matrix& x, const Vector& y, const std::vector<Index>& columns) {
  SubmodelFit out;
  const Index n = x.rows();
  const auto k = static_cast<Index>(columns.size());
  const double ym = y.mean();
  const Vector yc = y.array() - ym;
  if (k + 1 >= n) return out;  // needs at least one residual degree of freedom
  double rss = yc.squaredNorm();
  out.beta = Vector::Zero(k);
  Vector xm = Vector::Zero(k);
  if (k > 0) {
    Matrix xs(n, k);
    for (Index c = 0; c < k; ++c) {
      xs.col(c) = x.col(columns[static_cast<std::size_t>(c)]);
      xm(c) = xs.col(c).mean();
      xs.col(c).array() -= xm(c);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(xs);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) return out;
    out.beta = qr.solve(yc);
    rss = (yc - xs * out.beta).squaredNorm();
  }
  const double nd = static_cast<double>(n);
  const double tss = yc.squaredNorm();
  rss = std::max(rss, 1e-14 * std::max(tss, 1e-300));
  if (!(rss > 0.0)) rss = 1e-300;
  out.intercept = ym - xm.dot(out.beta);
  out.log_marginal = -0.5 * nd * std::log(rss / nd) - 0.5 * static_cast<double>(k) * std::log(nd);
  return out;
}

std::uint64_t model_key(const std::vector<int>& depth, int lags) {
  std::uint64_t key = 0;
  for (int d : depth) key = key * static_cast<std::uint64_t>(lags + 2) + static_cast<std::uint64_t>(d + 1);
  return key;
}

}  // namespace

std::vector<Index> bma_columns(const std::vector<int>& depth, const ColumnLayout& layout) {
  std::vector<Index> cols;
  for (int p = 0; p <= layout.lags; ++p) {
    for (std::size_t j = 0; j < depth.size(); ++j) {
      if (depth[j] >= p) cols.push_back(static_cast<Index>(p * layout.n_base + j));
    }
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

double bic_log_marginal(const Matrix& x, const Vector& y, const std::vector<Index>& columns) {
  return fit_submodel(x, y, columns).log_marginal;
}

Vector BmaPredictor::predict(const Matrix& x) const {
  Vector out = Vector::Zero(x.rows());
  for (const auto& m : models) {
    Vector pm = x * m.beta;
    pm.array() += m.intercept;
    out += m.weight * pm;
  }
  return out;
}

BmaPredictor fit_bma(const Matrix& x, const Vector& y, const ColumnLayout& layout,
                     const BmaOptions& opt, std::uint64_t seed) {
  if (x.rows() < 2) throw FitError("bma: need at least two training rows");
  if (static_cast<std::size_t>(x.cols()) != layout.n_base * static_cast<std::size_t>(layout.lags + 1)) {
    throw FitError("bma: design does not match the column layout");
  }
  const std::size_t nb = layout.n_base;
  const int states = layout.lags + 2;

  struct Entry {
    std::vector<int> depth;
    SubmodelFit fit;
  };
  std::unordered_map<std::uint64_t, Entry> cache;
  auto evaluate = [&](const std::vector<int>& depth) -> const Entry& {
    const auto key = model_key(depth, layout.lags);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, Entry{depth, fit_submodel(x, y, bma_columns(depth, layout))}).first;
    }
    return it->second;
  };

  BmaPredictor out;
  double space = 1.0;
  for (std::size_t j = 0; j < nb; ++j) space *= states;
  if (space <= static_cast<double>(opt.enumerate_limit)) {
    out.enumerated = true;
    std::vector<int> depth(nb, -1);
    while (true) {
      evaluate(depth);
      std::size_t j = 0;
      while (j < nb && ++depth[j] > layout.lags) depth[j++] = -1;
      if (j == nb) break;
    }
  } else {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick_var(0, nb - 1);
    std::uniform_int_distribution<int> pick_state(0, states - 2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> current(nb, -1);
    double current_lm = evaluate(current).fit.log_marginal;
    for (int it = 0; it < opt.mc3_draws; ++it) {
      std::vector<int> proposal = current;
      const auto j = pick_var(rng);
      int s = pick_state(rng) - 1;  // uniform over the other states
      if (s >= current[j]) ++s;
      proposal[j] = s;
      const double lm = evaluate(proposal).fit.log_marginal;
      const double log_ratio = lm - current_lm;
      if (lm > kNegInf && (log_ratio >= 0.0 || unif(rng) < std::exp(log_ratio))) {
        current = std::move(proposal);
        current_lm = lm;
      }
    }
  }
  out.visited = cache.size();

  // deterministic ordering of the visited set
  std::vector<const Entry*> entries;
  for (const auto& [key, e] : cache) {
    if (e.fit.log_marginal > kNegInf) entries.push_back(&e);
  }
  if (entries.empty()) throw FitError("bma: no identifiable submodel");
  std::sort(entries.begin(), entries.end(), [&](const Entry* a, const Entry* b) {
    return model_key(a->depth, layout.lags) < model_key(b->depth, layout.lags);
  });
  double max_lm = kNegInf;
  for (auto* e : entries) max_lm = std::max(max_lm, e->fit.log_marginal);
  double total = 0.0;
  for (auto* e : entries) total += std::exp(e->fit.log_marginal - max_lm);

  out.inclusion.assign(nb, 0.0);
  for (auto* e : entries) {
    const double w = std::exp(e->fit.log_marginal - max_lm) / total;
    if (w < opt.weight_floor) continue;
    BmaModel m;
    m.depth = e->depth;
    m.log_marginal = e->fit.log_marginal;
    m.weight = w;
    m.intercept = e->fit.intercept;
    m.beta = Vector::Zero(x.cols());
    const auto cols = bma_columns(e->depth, layout);
    for (std::size_t c = 0; c < cols.size(); ++c) m.beta(cols[c]) = e->fit.beta(static_cast<Index>(c));
    out.models.push_back(std::move(m));
  }
  double kept = 0.0;
  for (const auto& m : out.models) kept += m.weight;
  for (auto& m : out.models) {
    m.weight /= kept;
    for (std::size_t j = 0; j < nb; ++j) {
      if (m.depth[j] >= 0) out.inclusion[j] += m.weight;
    }
  }
  return out;
}

}  // namespace pdbench::models
