#include "pdbench/combine/combination.hpp"

#include "pdbench/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace pdbench::combine {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Avg: return "AVG";
    case Method::Ng: return "NG";
    case Method::Cls: return "CLS";
    case Method::Sea: return "SEA";
  }
  return "?";
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::All: return "all";
    case Scenario::Top8: return "top8";
    case Scenario::TopGroup: return "top_group";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (auto m : {Method::Avg, Method::Ng, Method::Cls, Method::Sea}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("unknown combination method '" + std::string(s) + "' (expected AVG, NG, CLS or SEA)");
}

Scenario parse_scenario(std::string_view s) {
  for (auto c : {Scenario::All, Scenario::Top8, Scenario::TopGroup}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown combination scenario '" + std::string(s) + "' (expected all, top8 or top_group)");
}

std::string combination_id(Method m, Scenario s) {
  return std::string(to_string(m)) + ":" + std::string(to_string(s));
}

std::size_t CombinationRun::unavailable() const {
  return static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(), [](const WindowCombination& w) { return !w.available; }));
}

ScenarioSelection select_scenario(const eval::RankTestResult& ranking, const eval::MetricTable& metrics,
                                  const std::vector<std::string>& kept, Scenario scenario) {
  ScenarioSelection out;
  out.scenario = scenario;
  switch (scenario) {
    case Scenario::All:
      out.members = kept;
      break;
    case Scenario::Top8:
      for (const auto& m : ranking.best_group()) {
        if (std::find(kept.begin(), kept.end(), m) != kept.end()) out.members.push_back(m);
      }
      break;
    case Scenario::TopGroup: {
      std::map<models::Category, std::pair<double, std::string>> best;
      for (const auto& m : kept) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& r : metrics.rows) {
          if (r.model == m && std::isfinite(r.mae)) sum += r.mae, ++n;
        }
        if (n == 0) continue;
        const double mean = sum / static_cast<double>(n);
        const auto cat = models::category_of(models::parse_model_id(m));
        auto it = best.find(cat);
        if (it == best.end() || mean < it->second.first) best[cat] = {mean, m};
      }
      for (const auto& [cat, entry] : best) out.members.push_back(entry.second);
      for (const auto& m : metrics.models()) {
        const auto cat = models::category_of(models::parse_model_id(m));
        if (!best.count(cat)) {
          const std::string w = "category " + std::string(models::to_string(cat)) + " has no kept model; skipped";
          if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
        }
      }
      break;
    }
  }
  return out;
}

CombinationWeights estimate_weights(Method method, const eval::Comparison& c, const std::vector<std::size_t>& members,
                                    std::size_t window, ErrorSample sample, std::size_t* observations,
                                    bool* clipped) {
  if (members.empty()) throw DomainError("combination has no members");
  const auto nm = static_cast<Index>(members.size());
  const std::size_t origin = c.plan.windows.at(window).train_end;
  std::vector<std::vector<double>> f_rows, a_rows;
  std::vector<double> actual;
  for (std::size_t w = 0; w < window; ++w) {
    bool ok = true;
    for (auto m : members) ok = ok && c.at(m, w).has_point();
    if (!ok) continue;
    const auto& ref = c.at(members.front(), w);
    for (std::size_t h = 0; h < ref.actual.size(); ++h) {
      if (sample == ErrorSample::Observed && ref.train_end + h >= origin) break;
      std::vector<double> row;
      for (auto m : members) row.push_back(c.at(m, w).point[h]);
      f_rows.push_back(std::move(row));
      actual.push_back(ref.actual[h]);
    }
  }
  if (observations) *observations = actual.size();
  const auto n = static_cast<Index>(actual.size());
  Matrix f(n, nm), e(n, nm);
  Vector a(n);
  for (Index i = 0; i < n; ++i) {
    a(i) = actual[static_cast<std::size_t>(i)];
    for (Index j = 0; j < nm; ++j) {
      f(i, j) = f_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      e(i, j) = a(i) - f(i, j);
    }
  }
  CombinationWeights out;
  out.method = method;
  for (auto m : members) out.members.push_back(c.models[m]);
  switch (method) {
    case Method::Avg:
      out.weights = Vector::Constant(nm, 1.0 / static_cast<double>(nm));
      break;
    case Method::Ng: {
      const auto s = estimate_mspe(e, out.members);
      if (clipped) *clipped = s.clipped;
      const auto r = combine_ng(s.sigma);
      out.weights = r.weights;
      out.regularized = r.regularized;
      break;
    }
    case Method::Cls:
      out.weights = combine_cls(f, a).weights;
      break;
    case Method::Sea: {
      const auto s = estimate_mspe(e, out.members);
      if (clipped) *clipped = s.clipped;
      out.weights = combine_sea(s.sigma);
      break;
    }
  }
  return out;
}

CombinationResult evaluate_combinations(const eval::Comparison& c, const data::DesignMatrix& design,
                                        const eval::RankTestResult& ranking, const std::vector<std::string>& kept,
                                        const CombinationOptions& options, const Exec& exec,
                                        const std::string& reference) {
  CombinationResult out;
  out.reference = reference;
  const std::size_t nw = c.plan.windows.size();
  auto index_of = [&](const std::string& m) -> std::size_t {
    const auto it = std::find(c.models.begin(), c.models.end(), m);
    if (it == c.models.end()) throw DomainError("combination member '" + m + "' is not in the comparison");
    return static_cast<std::size_t>(it - c.models.begin());
  };

  for (auto s : options.scenarios) {
    auto sel = select_scenario(ranking, c.metrics, kept, s);
    for (auto m : options.methods) {
      if (options.disable_inverse_on_all && s == Scenario::All && (m == Method::Ng || m == Method::Sea)) continue;
      CombinationRun run;
      run.method = m;
      run.scenario = s;
      run.id = combination_id(m, s);
      run.members = sel.members;
      out.runs.push_back(std::move(run));
    }
    out.scenarios.push_back(std::move(sel));
  }

  parallel_for(exec, out.runs.size(), [&](std::size_t r) {
    auto& run = out.runs[r];
    std::vector<std::size_t> idx;
    for (const auto& m : run.members) idx.push_back(index_of(m));
    bool have_fixed = false;
    CombinationWeights fixed;
    for (std::size_t w = 1; w < nw; ++w) {
      WindowCombination wc;
      wc.window = w;
      try {
        if (idx.empty()) throw DomainError("scenario has no members");
        for (auto m : idx) {
          if (!c.at(m, w).has_point()) throw DomainError("member '" + c.models[m] + "' has no forecast");
        }
        CombinationWeights cw;
        if (!options.reestimate && have_fixed) {
          cw = fixed;
        } else {
          cw = estimate_weights(run.method, c, idx, w, options.error_sample, &wc.observations, &wc.clipped);
          fixed = cw;
          have_fixed = true;
        }
        std::vector<std::vector<double>> paths;
        for (auto m : idx) paths.push_back(c.at(m, w).point);
        wc.weights = cw.weights;
        wc.regularized = cw.regularized;
        wc.point = combine_weighted(paths, cw.weights);
        wc.available = true;
      } catch (const Error& e) {
        wc.available = false;
        wc.reason = e.what();
      }
      run.windows.push_back(std::move(wc));
    }
  });

  for (auto& run : out.runs) {
    for (auto& wc : run.windows) {
      const auto& win = c.plan.windows[wc.window];
      eval::WindowForecast f;
      f.model = run.id;
      f.window = wc.window;
      f.train_end = win.train_end;
      f.actual = c.at(0, wc.window).actual;
      if (wc.available) {
        f.status = eval::Status::Ok;
        f.point = wc.point;
        double prev = design.level(static_cast<Index>(win.train_end) - 1);
        for (double v : f.point) f.diff_point.push_back(v - prev), prev = v;
      } else {
        f.status = eval::Status::Failed;
        f.message = wc.reason;
      }
      auto row = eval::score(f, design);
      wc.mae = row.mae;
      out.metrics.rows.push_back(std::move(row));
    }
  }

  // summary entries: reference, bma, combinations
  std::vector<std::string> ids;
  std::vector<std::vector<double>> mae_by_window;
  std::vector<std::size_t> unavailable;
  auto add_model = [&](const std::string& m) {
    const auto it = std::find(c.models.begin(), c.models.end(), m);
    if (it == c.models.end() || std::find(ids.begin(), ids.end(), m) != ids.end()) return;
    const auto mi = static_cast<std::size_t>(it - c.models.begin());
    std::vector<double> v(nw, kNaN);
    std::size_t missing = 0;
    for (std::size_t w = 1; w < nw; ++w) {
      const auto* row = c.metrics.find(c.models[mi], w);
      v[w] = row ? row->mae : kNaN;
      missing += std::isfinite(v[w]) ? 0 : 1;
    }
    ids.push_back(m);
    mae_by_window.push_back(std::move(v));
    unavailable.push_back(missing);
  };
  add_model(reference);
  add_model("bma");
  for (const auto& run : out.runs) {
    std::vector<double> v(nw, kNaN);
    for (const auto& wc : run.windows) v[wc.window] = wc.available ? wc.mae : kNaN;
    ids.push_back(run.id);
    mae_by_window.push_back(std::move(v));
    unavailable.push_back(run.unavailable());
  }
  for (std::size_t w = 1; w < nw; ++w) {
    bool all = !ids.empty();
    for (const auto& v : mae_by_window) all = all && std::isfinite(v[w]);
    if (all) out.summary_windows.push_back(w);
  }
  std::vector<double> rank_sum(ids.size(), 0.0), mae_sum(ids.size(), 0.0);
  for (auto w : out.summary_windows) {
    std::vector<double> col;
    for (const auto& v : mae_by_window) col.push_back(v[w]);
    const auto r = eval::average_ranks(col);
    for (std::size_t i = 0; i < ids.size(); ++i) rank_sum[i] += r[i], mae_sum[i] += col[i];
  }
  const auto nsum = static_cast<double>(out.summary_windows.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    SummaryRow row;
    row.id = ids[i];
    row.windows = out.summary_windows.size();
    row.unavailable = unavailable[i];
    row.mean_mae = nsum > 0 ? mae_sum[i] / nsum : kNaN;
    row.mean_rank = nsum > 0 ? rank_sum[i] / nsum : kNaN;
    out.summary.push_back(row);
  }
  const bool has_ref = !ids.empty() && ids.front() == reference;
  for (auto& row : out.summary) {
    row.mae_ratio = has_ref ? out.summary.front().mean_mae / row.mean_mae : kNaN;
    row.rank_ratio = has_ref ? out.summary.front().mean_rank / row.mean_rank : kNaN;
  }
  return out;
}

nlohmann::json to_json(const CombinationResult& r) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["scenarios"] = json::array();
  for (const auto& s : r.scenarios) {
    j["scenarios"].push_back({{"scenario", to_string(s.scenario)}, {"members", s.members}, {"warnings", s.warnings}});
  }
  j["runs"] = json::array();
  for (const auto& run : r.runs) {
    json jr{{"id", run.id},
            {"method", to_string(run.method)},
            {"scenario", to_string(run.scenario)},
            {"members", run.members},
            {"unavailable", run.unavailable()}};
    jr["windows"] = json::array();
    for (const auto& w : run.windows) {
      json jw{{"window", w.window}, {"available", w.available}, {"observations", w.observations}};
      if (w.available) {
        jw["weights"] = std::vector<double>(w.weights.data(), w.weights.data() + w.weights.size());
        jw["regularized"] = w.regularized;
        jw["clipped"] = w.clipped;
        jw["mae"] = num(w.mae);
      } else {
        jw["reason"] = w.reason;
      }
      jr["windows"].push_back(std::move(jw));
    }
    j["runs"].push_back(std::move(jr));
  }
  json js{{"reference", r.reference}, {"windows", r.summary_windows}};
  js["rows"] = json::array();
  for (const auto& row : r.summary) {
    js["rows"].push_back({{"id", row.id},
                          {"mean_mae", num(row.mean_mae)},
                          {"mean_rank", num(row.mean_rank)},
                          {"mae_ratio", num(row.mae_ratio)},
                          {"rank_ratio", num(row.rank_ratio)},
                          {"unavailable", row.unavailable}});
  }
  j["summary"] = std::move(js);
  return j;
}

std::string format_summary(const CombinationResult& r) {
  std::string s = "Average out-of-sample MAE and rank (" + std::to_string(r.summary_windows.size()) +
                  " common windows; ratios are " + r.reference + " / entry)\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s %12s\n", "model", "mean_mae", "mean_rank", "mae_ratio",
                "rank_ratio", "unavailable");
  s += line;
  for (const auto& row : r.summary) {
    std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s %12zu\n", row.id.c_str(),
                  fmt("%.4f", row.mean_mae).c_str(), fmt("%.3f", row.mean_rank).c_str(),
                  fmt("%.3f", row.mae_ratio).c_str(), fmt("%.3f", row.rank_ratio).c_str(), row.unavailable);
    s += line;
  }
  return s;
}

}  // namespace pdbench::combine
