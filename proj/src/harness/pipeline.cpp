#include "pdbench/harness/pipeline.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pdbench::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Fixed-precision number; empty for missing values.
std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

Exec exec_for(const RunConfig& c) { return c.jobs > 1 ? Exec::openmp(c.jobs) : Exec::serial(); }

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw OutputError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw OutputError("failed writing '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

data::TimeSeriesFrame select_variables(const data::TimeSeriesFrame& f, const std::vector<std::string>& vars) {
  std::vector<data::Column> cols;
  for (const auto& v : vars) {
    if (!f.has_column(v)) throw ConfigError("variables: '" + v + "' is not produced by the data source");
    cols.push_back(f.column(v));
  }
  return data::TimeSeriesFrame(f.index(), std::move(cols));
}

}  // namespace

std::uint64_t design_hash(const data::DesignMatrix& d) {
  std::string bytes;
  auto add = [&](const double* p, std::size_t n) { bytes.append(reinterpret_cast<const char*>(p), n * sizeof(double)); };
  add(d.x.data(), static_cast<std::size_t>(d.x.size()));
  add(d.y.data(), static_cast<std::size_t>(d.y.size()));
  add(d.level.data(), static_cast<std::size_t>(d.level.size()));
  for (const auto& n : d.column_names) bytes += n + ",";
  return fnv1a(bytes);
}

std::string tuning_cache_key(const ModelEntry& e, std::uint64_t data_hash, const RunConfig& c) {
  json fixed = json::object();
  for (const auto& [k, v] : e.params) fixed[k] = v;
  const json key{{"model", std::string(models::to_string(e.id))},
                 {"grid", hex64(e.grid.hash())},
                 {"data", hex64(data_hash)},
                 {"fixed", fixed},
                 {"initial", c.tuning_initial},
                 {"holdout", c.tuning_holdout},
                 {"max_failed_share", c.max_failed_share},
                 {"seed", c.model_seed(e.id)}};
  return hex64(fnv1a(key.dump()));
}

RunArtifacts run_pipeline(const RunConfig& config, Stage until, const Logger& log_fn) {
  auto log = [&](const std::string& m) {
    if (log_fn) log_fn(m);
  };
  RunArtifacts a;
  a.config = config;
  a.config_hash = config_hash(config);
  const Exec exec = exec_for(config);

  if (config.data.is_synthetic()) {
    a.synthetic = generate_synthetic(config.data.synthetic);
    a.raw = select_variables(a.synthetic->frame, config.variables);
  } else {
    data::CsvOptions opt;
    opt.variables = config.variables;
    opt.probability_column = config.logit ? config.target : std::string();
    a.raw = data::ingest_csv(config.data.csv, opt);
  }
  log("data: " + std::to_string(a.raw.rows()) + " quarters, " + std::to_string(a.raw.columns().size()) + " series");
  a.transformed = data::apply_transforms(a.raw, config.effective_transforms());
  a.stationarity = data::stationarity_report(a.transformed.frame);
  a.design = data::build_design(a.transformed.frame, config.target, config.lags, &a.transformed.levels);
  a.data_hash = design_hash(a.design);
  log("design: " + std::to_string(a.design.rows()) + " rows x " + std::to_string(a.design.cols()) + " columns");
  if (config.comparison_initial + config.comparison_holdout > a.design.rows()) {
    throw ConfigError("comparison: initial_train + holdout exceeds the " + std::to_string(a.design.rows()) +
                      " usable rows");
  }
  if (until == Stage::Generate) return a;

  // tuning
  std::optional<data::CvPlan> tune_plan;
  if (config.tuning_enabled) {
    tune_plan = data::rolling_windows(a.design.rows(), config.tuning_initial, config.tuning_holdout);
  }
  const fs::path cache_dir = fs::path(config.output_dir) / "cache";
  for (const auto& e : config.models) {
    TunedModel t;
    t.id = e.id;
    models::ModelSpec spec;
    spec.id = e.id;
    spec.seed = config.model_seed(e.id);
    spec.hyperparams = e.params;
    const std::string name(models::to_string(e.id));
    if (tune_plan && e.tune && !e.grid.axes.empty()) {
      const auto key = tuning_cache_key(e, a.data_hash, config);
      const fs::path file = cache_dir / ("tune_" + name + "_" + key + ".json");
      t.cache_file = file.string();
      if (config.tuning_cache && fs::exists(file)) {
        try {
          const auto j = json::parse(read_file(file));
          if (j.at("key").get<std::string>() == key) {
            t.result = tuning::tuning_from_json(j.at("result"));
            t.from_cache = true;
          }
        } catch (const std::exception&) {
          log("tuning cache entry " + file.string() + " is unreadable; retuning");
        }
      }
      if (!t.result) {
        try {
          tuning::TuneOptions opt;
          opt.max_failed_share = config.max_failed_share;
          opt.seed = spec.seed;
          t.result = tuning::tune(e.grid, a.design, *tune_plan, opt, exec, e.params);
        } catch (const FitError& err) {
          a.warnings.push_back(std::string("tuning ") + err.what() + "; using defaults");
        }
        if (t.result && config.tuning_cache) {
          write_file(file, json{{"key", key}, {"result", tuning::to_json(*t.result)}}.dump(1) + "\n");
        }
      }
      if (t.result) {
        spec.hyperparams = t.result->best;
        std::string best;
        for (const auto& [k, v] : t.result->best) best += " " + k + "=" + num(v);
        log("tuned " + name + (t.from_cache ? " (cached):" : ":") + best);
      }
    }
    a.tuned.push_back(std::move(t));
    a.specs.push_back(std::move(spec));
  }
  if (until == Stage::Tune) return a;

  const auto plan = data::rolling_windows(a.design.rows(), config.comparison_initial, config.comparison_holdout);
  log("comparison: " + std::to_string(plan.windows.size()) + " windows x " + std::to_string(a.specs.size()) +
      " models");
  a.comparison = eval::run_comparison(a.specs, a.design, plan, exec);
  a.stability = eval::stability_filter(a.comparison->metrics, config.stability_threshold);
  for (const auto& m : a.stability.dropped) {
    a.warnings.push_back("model " + m + " dropped by the stability filter (" + std::to_string(a.stability.bad.at(m)) +
                         " of " + std::to_string(a.stability.total.at(m)) + " windows failed or flat)");
  }
  if (a.stability.kept.size() >= 2 && plan.windows.size() >= 2) {
    a.ranks = eval::rank_models(a.comparison->metrics, a.stability.kept);
    a.ranking = eval::rmcb(*a.ranks, config.rmcb_alpha);
  } else {
    a.warnings.push_back("ranking needs at least two kept models and two windows; skipped");
  }
  if (until == Stage::Compare) return a;

  if (config.combination_enabled && a.ranking) {
    a.combinations = combine::evaluate_combinations(*a.comparison, a.design, *a.ranking, a.stability.kept,
                                                    config.combination, exec, config.reference_model);
    for (const auto& s : a.combinations->scenarios) {
      for (const auto& w : s.warnings) a.warnings.push_back(std::string(combine::to_string(s.scenario)) + ": " + w);
    }
  } else if (config.combination_enabled) {
    a.warnings.push_back("combinations need a ranking; skipped");
  }
  for (const auto& w : a.warnings) log("warning: " + w);
  return a;
}

namespace {

json ranking_document(const RunArtifacts& a) {
  const auto& c = *a.comparison;
  json bad = json::object();
  for (const auto& [m, n] : a.stability.bad) bad[m] = n;
  json doc{{"run",
            {{"config_hash", a.config_hash},
             {"data", a.config.data.is_synthetic() ? "synthetic" : a.config.data.csv},
             {"quarters", a.raw.rows()},
             {"design_rows", a.design.rows()},
             {"design_cols", a.design.cols()},
             {"windows", c.plan.windows.size()}}},
           {"stability",
            {{"threshold", a.config.stability_threshold},
             {"kept", a.stability.kept},
             {"dropped", a.stability.dropped},
             {"bad", bad}}}};
  json mean_mae = json::object();
  for (const auto& m : c.models) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : c.metrics.rows) {
      if (r.model == m && std::isfinite(r.mae)) sum += r.mae, ++n;
    }
    mean_mae[m] = n ? json(sum / static_cast<double>(n)) : json(nullptr);
  }
  doc["mean_mae"] = mean_mae;
  doc["rmcb"] = a.ranking ? eval::to_json(*a.ranking) : json(nullptr);
  return doc;
}

std::string metrics_csv(const RunArtifacts& a) {
  std::string s = "model,window,mae,rmse,mape,mase,status\n";
  auto add = [&](const eval::MetricRow& r) {
    s += r.model + "," + std::to_string(r.window) + "," + num(r.mae) + "," + num(r.rmse) + "," + num(r.mape) + "," +
         num(r.mase) + "," + std::string(eval::to_string(r.status)) + "\n";
  };
  for (const auto& r : a.comparison->metrics.rows) add(r);
  if (a.combinations) {
    for (const auto& r : a.combinations->metrics.rows) add(r);
  }
  return s;
}

std::string trailer(const RunArtifacts& a) { return "# config_hash=" + a.config_hash + "\n"; }

}  // namespace

std::string render_summary(const json& ranking, const json& combinations) {
  std::string s;
  char line[256];
  const auto& run = ranking.at("run");
  s += "pdbench run " + run.at("config_hash").get<std::string>() + "\n";
  std::snprintf(line, sizeof line, "data: %s, %zu quarters; design %zu x %zu; %zu comparison windows\n",
                run.at("data").get<std::string>().c_str(), run.at("quarters").get<std::size_t>(),
                run.at("design_rows").get<std::size_t>(), run.at("design_cols").get<std::size_t>(),
                run.at("windows").get<std::size_t>());
  s += line;
  const auto& st = ranking.at("stability");
  s += "kept: ";
  for (const auto& m : st.at("kept")) s += m.get<std::string>() + " ";
  s += "\ndropped: ";
  for (const auto& m : st.at("dropped")) s += m.get<std::string>() + " ";
  s += "\n\n";
  auto fmt = [](const json& v, const char* f) {
    if (v.is_null()) return std::string("-");
    char b[32];
    std::snprintf(b, sizeof b, f, v.get<double>());
    return std::string(b);
  };
  if (!ranking.at("rmcb").is_null()) {
    const auto& r = ranking.at("rmcb");
    std::snprintf(line, sizeof line, "Mean ranks with RMCB intervals (alpha %.2f, best %s)\n", r.at("alpha").get<double>(),
                  r.at("best").get<std::string>().c_str());
    s += line;
    std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %10s %6s\n", "model", "mean_mae", "mean_rank", "lower",
                  "upper", "best");
    s += line;
    std::vector<json> rows(r.at("models").begin(), r.at("models").end());
    std::stable_sort(rows.begin(), rows.end(), [](const json& x, const json& y) {
      return x.at("mean_rank").get<double>() < y.at("mean_rank").get<double>();
    });
    for (const auto& m : rows) {
      const auto name = m.at("model").get<std::string>();
      std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %10s %6s\n", name.c_str(),
                    fmt(ranking.at("mean_mae").at(name), "%.4f").c_str(), fmt(m.at("mean_rank"), "%.3f").c_str(),
                    fmt(m.at("lower"), "%.3f").c_str(), fmt(m.at("upper"), "%.3f").c_str(),
                    m.at("in_best_group").get<bool>() ? "yes" : "no");
      s += line;
    }
  } else {
    s += "No ranking (fewer than two kept models).\n";
  }
  if (!combinations.is_null()) {
    const auto& sum = combinations.at("summary");
    const auto ref = sum.at("reference").get<std::string>();
    std::snprintf(line, sizeof line, "\nAverage out-of-sample MAE and rank over %zu common windows (ratios: %s / entry)\n",
                  sum.at("windows").size(), ref.c_str());
    s += line;
    std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s %12s\n", "model", "mean_mae", "mean_rank", "mae_ratio",
                  "rank_ratio", "unavailable");
    s += line;
    for (const auto& row : sum.at("rows")) {
      std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s %12zu\n", row.at("id").get<std::string>().c_str(),
                    fmt(row.at("mean_mae"), "%.4f").c_str(), fmt(row.at("mean_rank"), "%.3f").c_str(),
                    fmt(row.at("mae_ratio"), "%.3f").c_str(), fmt(row.at("rank_ratio"), "%.3f").c_str(),
                    row.at("unavailable").get<std::size_t>());
      s += line;
    }
    s += "\nScenario members\n";
    for (const auto& sc : combinations.at("scenarios")) {
      s += "  " + sc.at("scenario").get<std::string>() + ":";
      for (const auto& m : sc.at("members")) s += " " + m.get<std::string>();
      s += "\n";
    }
  }
  return s;
}

std::vector<fs::path> emit_results(const RunArtifacts& a, Stage until, const fs::path& out) {
  std::vector<fs::path> written;
  auto put = [&](const fs::path& rel, const std::string& content) {
    write_file(out / rel, content);
    written.push_back(rel);
  };
  {
    auto cfg = to_json(a.config);
    cfg.erase("jobs");
    cfg.erase("output_dir");
    put("config.json", cfg.dump(2) + "\n");
  }
  put("data.csv", data::to_csv(a.raw) + trailer(a));
  if (a.synthetic) put("truth.json", a.synthetic->truth.dump(1) + "\n");
  put("stationarity.json", json{{"levels", data::to_json(data::stationarity_report(a.transformed.levels))},
                                {"differenced", data::to_json(a.stationarity)}}
                               .dump(1) +
                               "\n");
  if (until == Stage::Generate) return written;

  json tuned = json::array();
  for (const auto& t : a.tuned) {
    json entry{{"model", std::string(models::to_string(t.id))}};
    if (t.result) {
      entry["tuned"] = true;
      entry["result"] = tuning::to_json(*t.result);
    } else {
      entry["tuned"] = false;
    }
    tuned.push_back(std::move(entry));
  }
  json specs = json::array();
  for (const auto& s : a.specs) {
    specs.push_back({{"model", std::string(models::to_string(s.id))}, {"hyperparams", s.hyperparams}, {"seed", s.seed}});
  }
  put("tuning.json", json{{"config_hash", a.config_hash}, {"models", tuned}, {"specs", specs}}.dump(1) + "\n");
  if (until == Stage::Tune) return written;

  const auto& c = *a.comparison;
  {
    std::string s = "model,window,h,point,lo80,hi80,lo95,hi95,status\n";
    for (const auto& f : c.forecasts) {
      for (const auto& r : eval::to_records(f)) {
        s += r.model + "," + std::to_string(r.window) + "," + std::to_string(r.h) + "," + num(r.point) + "," +
             num(r.lower80) + "," + num(r.upper80) + "," + num(r.lower95) + "," + num(r.upper95) + "," +
             std::string(eval::to_string(r.status)) + "\n";
      }
    }
    put("forecasts.csv", s + trailer(a));
  }
  put("metrics.csv", metrics_csv(a) + trailer(a));
  {
    std::string s = "model,window,train_len,overfit,mae_diff,status\n";
    for (const auto& r : c.metrics.rows) {
      s += r.model + "," + std::to_string(r.window) + "," + std::to_string(r.train_len) + "," +
           (eval::overfit_window(r.train_len, a.design.cols()) ? "1" : "0") + "," + num(r.mae_diff) + "," +
           std::string(eval::to_string(r.status)) + "\n";
    }
    put("metrics_secondary.csv", s + trailer(a));
  }
  const json ranking = ranking_document(a);
  put("ranking.json", ranking.dump(1) + "\n");

  {
    std::string s = "model,window,train_len,overfit,mae\n";
    for (const auto& r : c.metrics.rows) {
      s += r.model + "," + std::to_string(r.window) + "," + std::to_string(r.train_len) + "," +
           (eval::overfit_window(r.train_len, a.design.cols()) ? "1" : "0") + "," + num(r.mae) + "\n";
    }
    put("plots/overfit_mae.csv", s + trailer(a));
  }
  if (a.ranking) {
    std::string s = "model,mean_rank,lower,upper,in_best_group\n";
    std::vector<std::size_t> order(a.ranking->models.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return a.ranking->mean_rank(static_cast<Index>(x)) < a.ranking->mean_rank(static_cast<Index>(y));
    });
    for (auto i : order) {
      const auto k = static_cast<Index>(i);
      s += a.ranking->models[i] + "," + num(a.ranking->mean_rank(k)) + "," + num(a.ranking->lower(k)) + "," +
           num(a.ranking->upper(k)) + "," + (a.ranking->in_best_group[i] ? "1" : "0") + "\n";
    }
    put("plots/rank_intervals.csv", s + trailer(a));
  }
  {
    std::string s = "row,period,level\n";
    for (std::size_t i = 0; i < a.design.rows(); ++i) {
      s += std::to_string(i) + "," + a.design.origin[i].label() + "," + num(a.design.level(static_cast<Index>(i))) + "\n";
    }
    put("plots/actual_levels.csv", s + trailer(a));
    std::string f = "model,window,h,period,actual,point,lo80,hi80,lo95,hi95\n";
    for (const auto& model : a.config.plot_models) {
      const auto it = std::find(c.models.begin(), c.models.end(), model);
      if (it == c.models.end()) continue;
      const auto m = static_cast<std::size_t>(it - c.models.begin());
      for (auto w : a.config.plot_windows) {
        if (w >= c.plan.windows.size()) continue;
        const auto& fc = c.at(m, w);
        for (std::size_t h = 0; h < fc.actual.size(); ++h) {
          auto band = [&](const std::vector<double>& v) { return v.empty() ? std::string() : num(v[h]); };
          f += model + "," + std::to_string(w) + "," + std::to_string(h + 1) + "," +
               a.design.origin[fc.train_end + h].label() + "," + num(fc.actual[h]) + "," +
               (fc.has_point() ? num(fc.point[h]) : std::string()) + "," + band(fc.lower80) + "," + band(fc.upper80) +
               "," + band(fc.lower95) + "," + band(fc.upper95) + "\n";
        }
      }
    }
    put("plots/forecast_segments.csv", f + trailer(a));
  }
  if (until == Stage::Compare) {
    put("summary.txt", render_summary(ranking, nullptr));
    return written;
  }
  json combos = nullptr;
  if (a.combinations) {
    combos = combine::to_json(*a.combinations);
    put("combinations.json", combos.dump(1) + "\n");
  }
  put("summary.txt", render_summary(ranking, combos));
  return written;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const OutputError*>(&e)) return 4;
  return 1;
}

}  // namespace pdbench::harness
