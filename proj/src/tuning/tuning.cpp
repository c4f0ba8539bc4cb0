#include "pdbench/tuning/tuning.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/core/rng.hpp"
#include "pdbench/eval/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace pdbench::tuning {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double from_json_number(const nlohmann::json& j) { return j.is_null() ? kInf : j.get<double>(); }

nlohmann::json point_to_json(const Point& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : p) j[k] = finite_or_null(v);
  return j;
}

Point point_from_json(const nlohmann::json& j) {
  Point p;
  for (const auto& [k, v] : j.items()) p[k] = from_json_number(v);
  return p;
}

nlohmann::json values_to_json(const std::vector<double>& values) {
  nlohmann::json j = nlohmann::json::array();
  for (double v : values) j.push_back(finite_or_null(v));
  return j;
}

}  // namespace

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (const auto& [name, values] : axes) n *= values.size();
  return n;
}

std::vector<Point> Grid::points() const {
  std::vector<Point> out(1);
  for (const auto& [name, values] : axes) {
    std::vector<Point> next;
    next.reserve(out.size() * values.size());
    for (const auto& p : out) {
      for (double v : values) {
        Point q = p;
        q[name] = v;
        next.push_back(std::move(q));
      }
    }
    out = std::move(next);
  }
  return out;
}

void Grid::validate() const {
  const std::string m(models::to_string(model));
  const auto& params = models::declared_params(model);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto& [name, values] = axes[i];
    auto it = std::find_if(params.begin(), params.end(), [&](const auto& p) { return p.name == name; });
    if (it == params.end()) throw ConfigError("grid " + m + ": '" + name + "' is not a hyperparameter");
    if (!it->tunable) throw ConfigError("grid " + m + ": '" + name + "' is not tunable");
    if (values.empty()) throw ConfigError("grid " + m + ": axis '" + name + "' is empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (axes[j].first == name) throw ConfigError("grid " + m + ": duplicate axis '" + name + "'");
    }
    models::ModelSpec probe{model, {}, 0};
    for (double v : values) {
      probe.hyperparams = {{name, v}};
      probe.validate();
    }
  }
  if (size() > cap) {
    throw ConfigError("grid " + m + ": " + std::to_string(size()) + " points exceed the cap of " + std::to_string(cap));
  }
}

std::uint64_t Grid::hash() const {
  std::string s(models::to_string(model));
  char buf[64];
  for (const auto& [name, values] : axes) {
    s += "|" + name;
    for (double v : values) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      s += buf;
    }
  }
  return fnv1a(s);
}

int complexity_direction(models::ModelId model, const std::string& p) {
  using models::ModelId;
  switch (model) {
    case ModelId::Lm: return p == "intercept" ? 1 : 0;
    case ModelId::Ridge: return p == "lambda" ? -1 : 0;
    case ModelId::Lasso: return p == "fraction" ? 1 : 0;
    case ModelId::Pcr: return p == "ncomp" ? 1 : 0;
    case ModelId::SpikeSlab: return p == "vars" ? 1 : 0;
    case ModelId::Bma: return 0;
    case ModelId::Es: return 0;
    case ModelId::Cart: return p == "cp" ? -1 : 0;
    case ModelId::Rf:
      if (p == "min_node_size") return -1;
      if (p == "num_trees") return 1;
      return 0;
    case ModelId::Nn: return (p == "layer1" || p == "layer2" || p == "layer3") ? 1 : 0;
    case ModelId::Bart:
      if (p == "num_trees" || p == "alpha") return 1;
      if (p == "k" || p == "beta") return -1;
      return 0;
  }
  return 0;
}

bool simpler(const Grid& grid, const Point& a, const Point& b) {
  for (const auto& [name, values] : grid.axes) {
    const int dir = complexity_direction(grid.model, name);
    if (dir == 0) continue;
    const double va = a.at(name) * dir, vb = b.at(name) * dir;
    if (va < vb) return true;
    if (va > vb) return false;
  }
  return false;
}

std::size_t select_best(const Grid& grid, const std::vector<Point>& points, const std::vector<double>& mean_mae,
                        const std::vector<bool>& excluded) {
  std::size_t best = points.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (excluded[i] || !std::isfinite(mean_mae[i])) continue;
    if (best == points.size() || mean_mae[i] < mean_mae[best] ||
        (mean_mae[i] == mean_mae[best] && simpler(grid, points[i], points[best]))) {
      best = i;
    }
  }
  if (best == points.size()) {
    throw FitError("tune: every grid point failed for model " + std::string(models::to_string(grid.model)));
  }
  return best;
}

TuningResult tune(const Grid& grid, const data::DesignMatrix& design, const data::CvPlan& plan,
                  const TuneOptions& options, const Exec& exec, const Point& fixed) {
  grid.validate();
  TuningResult out;
  out.model = grid.model;
  out.points = grid.points();
  out.windows = plan.windows.size();
  const std::size_t np = out.points.size(), nw = out.windows;
  if (nw == 0) throw ConfigError("tune: empty window plan");
  out.window_mae.setConstant(static_cast<Index>(np), static_cast<Index>(nw), kInf);

  parallel_for(exec, np * nw, [&](std::size_t task) {
    const std::size_t p = task / nw, w = task % nw;
    models::ModelSpec spec{grid.model, fixed, options.seed};
    for (const auto& [k, v] : out.points[p]) spec.hyperparams[k] = v;
    const auto f = eval::forecast_window(spec, design, plan.windows[w]);
    if (f.has_point()) {
      const auto row = eval::score(f, design);
      out.window_mae(static_cast<Index>(p), static_cast<Index>(w)) = row.mae;
    }
  });
  out.fits = np * nw;

  out.mean_mae.assign(np, kInf);
  out.excluded.assign(np, false);
  for (std::size_t p = 0; p < np; ++p) {
    std::size_t failed = 0;
    double sum = 0.0;
    for (std::size_t w = 0; w < nw; ++w) {
      const double v = out.window_mae(static_cast<Index>(p), static_cast<Index>(w));
      if (std::isfinite(v)) {
        sum += v;
      } else {
        ++failed;
      }
    }
    if (static_cast<double>(failed) > options.max_failed_share * static_cast<double>(nw)) {
      out.excluded[p] = true;
    } else {
      out.mean_mae[p] = sum / static_cast<double>(nw - failed);
    }
  }
  out.best_index = select_best(grid, out.points, out.mean_mae, out.excluded);
  out.best = out.points[out.best_index];
  for (const auto& [k, v] : fixed) out.best.try_emplace(k, v);
  return out;
}

std::vector<Grid> default_grids() {
  using models::ModelId;
  return {
      {ModelId::Lm, {{"intercept", {0, 1}}}, 10},
      {ModelId::Ridge, {{"lambda", {0.01, 0.1, 1, 10, 100, 1000}}}, 50},
      {ModelId::Lasso, {{"fraction", {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0}}}, 50},
      {ModelId::Pcr, {{"ncomp", {1, 2, 3, 5, 8, 12}}}, 50},
      {ModelId::SpikeSlab, {{"vars", {5, 10, 20, 40}}}, 50},
      {ModelId::Bma, {}, 1},
      {ModelId::Es, {{"alpha", {-1, 0.1, 0.3, 0.5, 0.9}}}, 50},
      {ModelId::Cart, {{"cp", {0, 0.001, 0.01, 0.05, 0.1, 0.3}}}, 50},
      {ModelId::Rf, {{"mtry", {4, 13, 40}}, {"min_node_size", {2, 5}}}, 50},
      {ModelId::Nn, {{"layer1", {1, 3, 5, 8}}, {"layer2", {0, 3}}}, 50},
      {ModelId::Bart, {{"num_trees", {50, 200}}, {"k", {2, 3, 5}}}, 50},
  };
}

std::size_t total_fits(const std::vector<Grid>& grids, std::size_t windows) {
  std::size_t n = 0;
  for (const auto& g : grids) n += g.size() * windows;
  return n;
}

nlohmann::json to_json(const Grid& g) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& [name, values] : g.axes) axes.push_back({{"name", name}, {"values", values_to_json(values)}});
  return {{"model", std::string(models::to_string(g.model))}, {"axes", axes}, {"cap", g.cap}};
}

Grid grid_from_json(models::ModelId model, const nlohmann::json& j) {
  Grid g;
  g.model = model;
  if (j.contains("cap")) g.cap = j.at("cap").get<std::size_t>();
  if (j.contains("axes")) {
    for (const auto& a : j.at("axes")) {
      std::vector<double> values;
      for (const auto& v : a.at("values")) values.push_back(from_json_number(v));
      g.axes.emplace_back(a.at("name").get<std::string>(), std::move(values));
    }
  }
  return g;
}

nlohmann::json to_json(const TuningResult& r) {
  nlohmann::json points = nlohmann::json::array(), means = nlohmann::json::array(), wm = nlohmann::json::array();
  for (std::size_t p = 0; p < r.points.size(); ++p) {
    points.push_back(point_to_json(r.points[p]));
    means.push_back(finite_or_null(r.mean_mae[p]));
    nlohmann::json row = nlohmann::json::array();
    for (Index w = 0; w < r.window_mae.cols(); ++w) row.push_back(finite_or_null(r.window_mae(static_cast<Index>(p), w)));
    wm.push_back(row);
  }
  nlohmann::json excluded = nlohmann::json::array();
  for (bool e : r.excluded) excluded.push_back(e);
  return {{"model", std::string(models::to_string(r.model))},
          {"best", point_to_json(r.best)},
          {"best_index", r.best_index},
          {"points", points},
          {"mean_mae", means},
          {"window_mae", wm},
          {"excluded", excluded},
          {"windows", r.windows},
          {"fits", r.fits}};
}

TuningResult tuning_from_json(const nlohmann::json& j) {
  TuningResult r;
  r.model = models::parse_model_id(j.at("model").get<std::string>());
  r.best = point_from_json(j.at("best"));
  r.best_index = j.at("best_index").get<std::size_t>();
  for (const auto& p : j.at("points")) r.points.push_back(point_from_json(p));
  for (const auto& v : j.at("mean_mae")) r.mean_mae.push_back(from_json_number(v));
  r.windows = j.at("windows").get<std::size_t>();
  r.fits = j.at("fits").get<std::size_t>();
  for (const auto& e : j.at("excluded")) r.excluded.push_back(e.get<bool>());
  const auto& wm = j.at("window_mae");
  r.window_mae.resize(static_cast<Index>(wm.size()), static_cast<Index>(r.windows));
  for (std::size_t p = 0; p < wm.size(); ++p) {
    for (std::size_t w = 0; w < r.windows; ++w) r.window_mae(static_cast<Index>(p), static_cast<Index>(w)) = from_json_number(wm[p][w]);
  }
  return r;
}

}  // namespace pdbench::tuning
