#include "pdbench/harness/config.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/core/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace pdbench::harness {

namespace {

using ojson = nlohmann::ordered_json;

/// Field reader that tracks consumed keys so leftovers can be reported.
class Section {
 public:
  Section(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const ojson& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(path(key) + ": has the wrong type");
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(path(k) + ": unknown field");
    }
  }

 private:
  const ojson& j_;
  std::string path_;
  std::set<std::string> used_;
};

models::ModelId model_id(const std::string& name, const std::string& where) {
  try {
    return models::parse_model_id(name);
  } catch (const Error&) {
    throw ConfigError(where + ": unknown model '" + name + "'");
  }
}

tuning::Grid default_grid(models::ModelId id) {
  for (auto& g : tuning::default_grids()) {
    if (g.model == id) return g;
  }
  return {id, {}, 1};
}

ModelEntry parse_model(const ojson& j, const std::string& path) {
  if (j.is_string()) {
    ModelEntry e;
    e.id = model_id(j.get<std::string>(), path);
    e.grid = default_grid(e.id);
    return e;
  }
  Section s(j, path);
  std::string id;
  s.get("id", id);
  if (id.empty()) throw ConfigError(path + ".id: required");
  ModelEntry e;
  e.id = model_id(id, s.path("id"));
  e.grid = default_grid(e.id);
  if (s.has("grid")) {
    const auto& g = s.raw("grid");
    if (!g.is_object()) throw ConfigError(s.path("grid") + ": expected an object of axis -> values");
    e.grid.axes.clear();
    for (const auto& [name, values] : g.items()) {
      std::vector<double> v;
      try {
        v = values.get<std::vector<double>>();
      } catch (const nlohmann::json::exception&) {
        throw ConfigError(s.path("grid") + "." + name + ": expected a list of numbers");
      }
      e.grid.axes.emplace_back(name, std::move(v));
    }
  }
  s.get("cap", e.grid.cap);
  if (s.has("params")) {
    const auto& p = s.raw("params");
    if (!p.is_object()) throw ConfigError(s.path("params") + ": expected an object");
    for (const auto& [name, value] : p.items()) {
      if (!value.is_number()) throw ConfigError(s.path("params") + "." + name + ": expected a number");
      e.params[name] = value.get<double>();
    }
  }
  s.get("tune", e.tune);
  s.finish();
  try {
    e.grid.validate();
    models::ModelSpec spec;
    spec.id = e.id;
    spec.hyperparams = e.params;
    spec.validate();
  } catch (const ConfigError& err) {
    throw ConfigError(path + ": " + err.what());
  }
  for (const auto& [axis, values] : e.grid.axes) {
    if (e.params.count(axis)) throw ConfigError(path + ": '" + axis + "' is both a grid axis and a fixed parameter");
  }
  return e;
}

template <class T, class F>
std::vector<T> parse_list(Section& s, const std::string& key, F parse_one, std::vector<T> fallback) {
  if (!s.has(key)) return fallback;
  const auto& j = s.raw(key);
  if (!j.is_array()) throw ConfigError(s.path(key) + ": expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) throw ConfigError(s.path(key) + "[" + std::to_string(i) + "]: expected a string");
    try {
      out.push_back(parse_one(j[i].get<std::string>()));
    } catch (const ConfigError& e) {
      throw ConfigError(s.path(key) + "[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<ModelEntry> default_model_entries() {
  std::vector<ModelEntry> out;
  for (auto id : models::all_models()) {
    ModelEntry e;
    e.id = id;
    e.grid = default_grid(id);
    out.push_back(std::move(e));
  }
  return out;
}

void RunConfig::restrict_models(const std::vector<std::string>& names) {
  std::vector<ModelEntry> kept;
  for (const auto& n : names) {
    const auto id = model_id(n, "--models");
    const auto it = std::find_if(models.begin(), models.end(), [&](const ModelEntry& e) { return e.id == id; });
    if (it != models.end()) {
      kept.push_back(*it);
    } else {
      ModelEntry e;
      e.id = id;
      e.grid = default_grid(id);
      kept.push_back(std::move(e));
    }
  }
  models = std::move(kept);
}

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  if (!data.synthetic_seed_fixed) data.synthetic.seed = derive_seed(s, fnv1a("synthetic"));
}

std::uint64_t RunConfig::model_seed(models::ModelId id) const {
  return derive_seed(seed, fnv1a(models::to_string(id)));
}

data::TransformPlan RunConfig::effective_transforms() const {
  data::TransformPlan p = transforms;
  p.logit_column = logit ? target : std::string();
  if (!seasonal_adjust) p.seasonal_columns.clear();
  return p;
}

RunConfig parse_config(const ojson& j) {
  RunConfig c;
  c.models = default_model_entries();
  Section root(j, "");

  if (root.has("data")) {
    Section d(root.raw("data"), "data");
    std::string source = "synthetic";
    d.get("source", source);
    if (source == "csv") {
      d.get("csv", c.data.csv);
      if (c.data.csv.empty()) throw ConfigError("data.csv: required when data.source is \"csv\"");
    } else if (source != "synthetic") {
      throw ConfigError("data.source: expected \"synthetic\" or \"csv\"");
    } else if (d.has("csv")) {
      d.raw("csv");
    }
    if (d.has("synthetic")) {
      try {
        const auto& sj = d.raw("synthetic");
        c.data.synthetic = synthetic_from_json(nlohmann::json::parse(sj.dump()));
        c.data.synthetic_seed_fixed = sj.is_object() && sj.contains("seed");
        c.data.synthetic.validate();
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("data.") + e.what());
      }
    }
    d.finish();
  }
  root.get("variables", c.variables);
  root.get("target", c.target);
  if (std::find(c.variables.begin(), c.variables.end(), c.target) == c.variables.end()) {
    throw ConfigError("target: '" + c.target + "' is not in variables");
  }
  if (root.has("transforms")) {
    Section t(root.raw("transforms"), "transforms");
    t.get("logit", c.logit);
    t.get("seasonal_adjust", c.seasonal_adjust);
    t.get("seasonal_columns", c.transforms.seasonal_columns);
    t.get("period", c.transforms.period);
    t.get("difference", c.transforms.difference_order);
    t.finish();
    if (c.transforms.period < 2) throw ConfigError("transforms.period: must be at least 2");
    if (c.transforms.difference_order < 0) throw ConfigError("transforms.difference: must be non-negative");
  }
  root.get("lags", c.lags);
  if (c.lags < 0) throw ConfigError("lags: must be non-negative");

  if (root.has("tuning")) {
    Section t(root.raw("tuning"), "tuning");
    t.get("enabled", c.tuning_enabled);
    t.get("initial_train", c.tuning_initial);
    t.get("holdout", c.tuning_holdout);
    t.get("max_failed_share", c.max_failed_share);
    t.get("cache", c.tuning_cache);
    t.finish();
    if (!(c.max_failed_share >= 0.0 && c.max_failed_share <= 1.0)) {
      throw ConfigError("tuning.max_failed_share: must lie in [0, 1]");
    }
  }
  if (root.has("comparison")) {
    Section t(root.raw("comparison"), "comparison");
    t.get("initial_train", c.comparison_initial);
    t.get("holdout", c.comparison_holdout);
    t.get("stability_threshold", c.stability_threshold);
    t.get("rmcb_alpha", c.rmcb_alpha);
    t.finish();
    if (!(c.stability_threshold > 0.0 && c.stability_threshold <= 1.0)) {
      throw ConfigError("comparison.stability_threshold: must lie in (0, 1]");
    }
    if (!(c.rmcb_alpha > 0.0 && c.rmcb_alpha < 1.0)) throw ConfigError("comparison.rmcb_alpha: must lie in (0, 1)");
  }
  if (root.has("models")) {
    const auto& m = root.raw("models");
    if (!m.is_array() || m.empty()) throw ConfigError("models: expected a non-empty list");
    c.models.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      auto e = parse_model(m[i], "models[" + std::to_string(i) + "]");
      for (const auto& prev : c.models) {
        if (prev.id == e.id) throw ConfigError("models[" + std::to_string(i) + "]: duplicate model");
      }
      c.models.push_back(std::move(e));
    }
  }
  if (root.has("combination")) {
    Section t(root.raw("combination"), "combination");
    t.get("enabled", c.combination_enabled);
    c.combination.methods = parse_list<combine::Method>(t, "methods", combine::parse_method, c.combination.methods);
    c.combination.scenarios =
        parse_list<combine::Scenario>(t, "scenarios", combine::parse_scenario, c.combination.scenarios);
    t.get("reestimate", c.combination.reestimate);
    std::string sample = "observed";
    t.get("error_sample", sample);
    if (sample == "observed") {
      c.combination.error_sample = combine::ErrorSample::Observed;
    } else if (sample == "all_prior") {
      c.combination.error_sample = combine::ErrorSample::AllPrior;
    } else {
      throw ConfigError("combination.error_sample: expected \"observed\" or \"all_prior\"");
    }
    t.get("disable_inverse_on_all", c.combination.disable_inverse_on_all);
    t.get("reference", c.reference_model);
    t.finish();
  }
  if (root.has("plots")) {
    Section t(root.raw("plots"), "plots");
    t.get("windows", c.plot_windows);
    t.get("models", c.plot_models);
    t.finish();
  }
  if (!root.has("seed")) throw ConfigError("seed: required");
  std::uint64_t seed = 0;
  root.get("seed", seed);
  c.set_seed(seed);
  root.get("jobs", c.jobs);
  if (c.jobs < 1) throw ConfigError("jobs: must be at least 1");
  root.get("output_dir", c.output_dir);
  root.finish();

  const auto data_ok = [&](std::size_t t_eff) {
    if (c.comparison_initial + c.comparison_holdout > t_eff) {
      throw ConfigError("comparison: initial_train + holdout = " +
                        std::to_string(c.comparison_initial + c.comparison_holdout) + " exceeds the " +
                        std::to_string(t_eff) + " usable rows");
    }
    if (c.tuning_enabled && c.tuning_initial + c.tuning_holdout > t_eff) {
      throw ConfigError("tuning: initial_train + holdout = " + std::to_string(c.tuning_initial + c.tuning_holdout) +
                        " exceeds the " + std::to_string(t_eff) + " usable rows");
    }
  };
  if (c.data.is_synthetic()) {
    const std::size_t lost = static_cast<std::size_t>(c.transforms.difference_order + c.lags);
    if (c.data.synthetic.T <= lost) throw ConfigError("data.synthetic.T: too short for the lags and differencing");
    data_ok(c.data.synthetic.T - lost);
    if (c.data.synthetic.n_covariates + 1 != c.variables.size()) {
      throw ConfigError("variables: synthetic data has " + std::to_string(c.data.synthetic.n_covariates) +
                        " covariates but " + std::to_string(c.variables.size() - 1) + " are listed");
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ojson j;
  try {
    j = ojson::parse(ss.str(), nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return parse_config(j);
}

ojson to_json(const RunConfig& c) {
  ojson data{{"source", c.data.is_synthetic() ? "synthetic" : "csv"}};
  if (c.data.is_synthetic()) {
    data["synthetic"] = ojson::parse(to_json(c.data.synthetic).dump());
  } else {
    data["csv"] = c.data.csv;
  }
  ojson models = ojson::array();
  for (const auto& m : c.models) {
    ojson grid = ojson::object();
    for (const auto& [axis, values] : m.grid.axes) {
      ojson v = ojson::array();
      for (double x : values) v.push_back(std::isfinite(x) ? ojson(x) : ojson(nullptr));
      grid[axis] = v;
    }
    models.push_back({{"id", std::string(models::to_string(m.id))},
                      {"grid", grid},
                      {"cap", m.grid.cap},
                      {"params", m.params},
                      {"tune", m.tune}});
  }
  ojson methods = ojson::array(), scenarios = ojson::array();
  for (auto m : c.combination.methods) methods.push_back(std::string(combine::to_string(m)));
  for (auto s : c.combination.scenarios) scenarios.push_back(std::string(combine::to_string(s)));
  return {{"data", data},
          {"variables", c.variables},
          {"target", c.target},
          {"transforms",
           {{"logit", c.logit},
            {"seasonal_adjust", c.seasonal_adjust},
            {"seasonal_columns", c.transforms.seasonal_columns},
            {"period", c.transforms.period},
            {"difference", c.transforms.difference_order}}},
          {"lags", c.lags},
          {"tuning",
           {{"enabled", c.tuning_enabled},
            {"initial_train", c.tuning_initial},
            {"holdout", c.tuning_holdout},
            {"max_failed_share", c.max_failed_share},
            {"cache", c.tuning_cache}}},
          {"comparison",
           {{"initial_train", c.comparison_initial},
            {"holdout", c.comparison_holdout},
            {"stability_threshold", c.stability_threshold},
            {"rmcb_alpha", c.rmcb_alpha}}},
          {"models", models},
          {"combination",
           {{"enabled", c.combination_enabled},
            {"methods", methods},
            {"scenarios", scenarios},
            {"reestimate", c.combination.reestimate},
            {"error_sample", c.combination.error_sample == combine::ErrorSample::Observed ? "observed" : "all_prior"},
            {"disable_inverse_on_all", c.combination.disable_inverse_on_all},
            {"reference", c.reference_model}}},
          {"plots", {{"windows", c.plot_windows}, {"models", c.plot_models}}},
          {"seed", c.seed},
          {"jobs", c.jobs},
          {"output_dir", c.output_dir}};
}

std::string config_hash(const RunConfig& c) {
  auto j = to_json(c);
  // execution-only settings do not change results
  j.erase("jobs");
  j.erase("output_dir");
  j["tuning"].erase("cache");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace pdbench::harness
