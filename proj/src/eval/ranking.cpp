#include "pdbench/eval/ranking.hpp"

#include "pdbench/core/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pdbench::eval {

bool stability_drop(std::size_t bad, std::size_t total, double threshold) {
  if (total == 0) return true;
  return static_cast<double>(bad) >= threshold * static_cast<double>(total) - 1e-12;
}

StabilityResult stability_filter(const MetricTable& table, double threshold) {
  StabilityResult out;
  const auto models = table.models();
  for (const auto& m : models) {
    out.bad[m] = 0;
    out.total[m] = 0;
  }
  for (const auto& r : table.rows) {
    ++out.total[r.model];
    if (r.status != Status::Ok) ++out.bad[r.model];
  }
  for (const auto& m : models) {
    (stability_drop(out.bad[m], out.total[m], threshold) ? out.dropped : out.kept).push_back(m);
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  auto key = [&](std::size_t i) {
    const double v = values[i];
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return key(a) < key(b); });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && key(order[j + 1]) == key(order[i])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

RankMatrix rank_models(const MetricTable& table, const std::vector<std::string>& models) {
  RankMatrix out;
  out.models = models;
  for (const auto& r : table.rows) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) continue;
    if (std::find(out.windows.begin(), out.windows.end(), r.window) == out.windows.end()) {
      out.windows.push_back(r.window);
    }
  }
  std::sort(out.windows.begin(), out.windows.end());
  const auto nw = static_cast<Index>(out.windows.size());
  const auto nm = static_cast<Index>(models.size());
  out.mae.setConstant(nw, nm, std::numeric_limits<double>::infinity());
  for (const auto& r : table.rows) {
    auto mi = std::find(models.begin(), models.end(), r.model);
    if (mi == models.end()) continue;
    const auto wi = std::lower_bound(out.windows.begin(), out.windows.end(), r.window) - out.windows.begin();
    if (r.status != Status::Failed && std::isfinite(r.mae)) out.mae(wi, mi - models.begin()) = r.mae;
  }
  out.ranks.resize(nw, nm);
  for (Index w = 0; w < nw; ++w) {
    std::vector<double> row(static_cast<std::size_t>(nm));
    for (Index m = 0; m < nm; ++m) row[static_cast<std::size_t>(m)] = out.mae(w, m);
    const auto rk = average_ranks(row);
    for (Index m = 0; m < nm; ++m) out.ranks(w, m) = rk[static_cast<std::size_t>(m)];
  }
  return out;
}

std::vector<std::string> RankTestResult::best_group() const {
  std::vector<std::string> out;
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (in_best_group[m]) out.push_back(models[m]);
  }
  return out;
}

RankTestResult rmcb(const RankMatrix& rm, double alpha) {
  const Index nw = rm.ranks.rows(), nm = rm.ranks.cols();
  if (nm < 2) throw DomainError("rmcb: needs at least two models");
  if (nw < 2) throw DomainError("rmcb: needs at least two windows");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("rmcb: alpha must lie in (0, 1)");

  RankTestResult out;
  out.models = rm.models;
  out.alpha = alpha;
  const Vector means = rm.mean_ranks();
  Index best = 0;
  for (Index m = 1; m < nm; ++m) {
    if (means(m) < means(best)) best = m;
  }
  out.best = static_cast<std::size_t>(best);

  // stacked ranks on an intercept (the best model) plus dummies for the others
  const Index n = nw * nm;
  Matrix design = Matrix::Zero(n, nm);
  Vector response(n);
  for (Index m = 0, row = 0; m < nm; ++m) {
    const Index dummy = m < best ? m + 1 : m;  // column 0 is the intercept
    for (Index w = 0; w < nw; ++w, ++row) {
      response(row) = rm.ranks(w, m);
      design(row, 0) = 1.0;
      if (m != best) design(row, dummy) = 1.0;
    }
  }
  const Vector coef = design.colPivHouseholderQr().solve(response);
  const double rss = (response - design * coef).squaredNorm();
  out.mean_rank.resize(nm);
  for (Index m = 0; m < nm; ++m) {
    const Index dummy = m < best ? m + 1 : m;
    out.mean_rank(m) = coef(0) + (m == best ? 0.0 : coef(dummy));
  }
  out.dof = static_cast<std::size_t>(n - nm);
  out.residual_variance = rss / static_cast<double>(out.dof);
  const boost::math::students_t t(static_cast<double>(out.dof));
  out.t_critical = boost::math::quantile(t, 1.0 - alpha / 2.0);
  out.half_width = out.t_critical * std::sqrt(out.residual_variance / static_cast<double>(nw));
  out.lower = out.mean_rank.array() - out.half_width;
  out.upper = out.mean_rank.array() + out.half_width;
  out.in_best_group.resize(static_cast<std::size_t>(nm));
  for (Index m = 0; m < nm; ++m) {
    out.in_best_group[static_cast<std::size_t>(m)] = out.lower(m) <= out.upper(best) && out.upper(m) >= out.lower(best);
  }
  return out;
}

nlohmann::json to_json(const RankTestResult& r) {
  nlohmann::json models = nlohmann::json::array();
  for (std::size_t m = 0; m < r.models.size(); ++m) {
    const auto i = static_cast<Index>(m);
    models.push_back({{"model", r.models[m]},
                      {"mean_rank", r.mean_rank(i)},
                      {"lower", r.lower(i)},
                      {"upper", r.upper(i)},
                      {"in_best_group", static_cast<bool>(r.in_best_group[m])}});
  }
  return {{"alpha", r.alpha},
          {"best", r.models[r.best]},
          {"dof", r.dof},
          {"t_critical", r.t_critical},
          {"half_width", r.half_width},
          {"residual_variance", r.residual_variance},
          {"models", models}};
}

}  // namespace pdbench::eval
