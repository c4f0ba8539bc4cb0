#include "pdbench/eval/comparison.hpp"

#include "pdbench/bart/bart.hpp"
#include "pdbench/core/error.hpp"
#include "pdbench/core/rng.hpp"
#include "pdbench/data/transforms.hpp"
#include "pdbench/eval/metrics.hpp"

#include <cmath>
#include <limits>

namespace pdbench::eval {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::Failed: return "failed";
    case Status::Flat: return "flat";
  }
  return "failed";
}

Status parse_status(std::string_view s) {
  if (s == "ok") return Status::Ok;
  if (s == "flat") return Status::Flat;
  if (s == "failed") return Status::Failed;
  throw DataError("unknown forecast status '" + std::string(s) + "'");
}

std::vector<ForecastRecord> to_records(const WindowForecast& f) {
  std::vector<ForecastRecord> out;
  const std::size_t h = f.actual.size();
  for (std::size_t i = 0; i < h; ++i) {
    ForecastRecord r;
    r.model = f.model;
    r.window = f.window;
    r.h = static_cast<int>(i + 1);
    r.status = f.status;
    if (f.has_point()) r.point = f.point[i];
    if (f.has_intervals()) {
      r.lower80 = f.lower80[i];
      r.upper80 = f.upper80[i];
      r.lower95 = f.lower95[i];
      r.upper95 = f.upper95[i];
    }
    out.push_back(r);
  }
  return out;
}

double path_sd(const std::vector<double>& d) {
  if (d.empty()) return 0.0;
  double m = 0.0;
  for (double v : d) m += v;
  m /= static_cast<double>(d.size());
  double s = 0.0;
  for (double v : d) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(d.size()));
}

std::uint64_t window_seed(std::uint64_t model_seed, std::size_t window) {
  return derive_seed(model_seed, 0x77696e64u, window);
}

WindowForecast forecast_window(const models::ModelSpec& spec, const data::DesignMatrix& design,
                               const data::Window& w, const Exec& inner) {
  if (w.train_end < 1 || w.train_end + w.holdout > design.rows()) {
    throw DomainError("forecast_window: window exceeds the design");
  }
  WindowForecast f;
  f.model = std::string(models::to_string(spec.id));
  f.window = w.id;
  f.train_end = w.train_end;
  const auto te = static_cast<Index>(w.train_end);
  const auto h = static_cast<Index>(w.holdout);
  const Vector actual = design.level.segment(te, h);
  f.actual = to_std(actual);
  const double last_level = design.level(te - 1);

  models::ModelSpec s = spec;
  s.seed = window_seed(spec.seed, w.id);
  models::FitOptions opt;
  opt.layout = models::ColumnLayout{design.n_base(), design.lags};
  opt.column_names = design.column_names;
  opt.exec = inner;
  try {
    // only training rows reach the estimator
    const Matrix x_train = design.x.topRows(te);
    const Vector y_train = design.y.head(te);
    const auto model = models::fit(s, x_train, y_train, opt);
    const Matrix x_future = design.x.middleRows(te, h);
    const Vector diffs = models::predict(model, x_future);
    if (!diffs.allFinite()) throw FitError("non-finite forecast");
    f.diff_point = to_std(diffs);
    f.point = data::reintegrate_forecast(last_level, f.diff_point);
    if (auto draws = model.state->predictive_draws(x_future)) {
      const Matrix& dm = *draws;
      f.lower80.resize(f.point.size());
      f.upper80.resize(f.point.size());
      f.lower95.resize(f.point.size());
      f.upper95.resize(f.point.size());
      // each draw is a differenced path; reintegrate before taking quantiles
      Matrix levels(dm.rows(), h);
      for (Index d = 0; d < dm.rows(); ++d) {
        double acc = last_level;
        for (Index i = 0; i < h; ++i) levels(d, i) = acc += dm(d, i);
      }
      for (Index i = 0; i < h; ++i) {
        std::vector<double> col(levels.col(i).data(), levels.col(i).data() + levels.rows());
        const auto k = static_cast<std::size_t>(i);
        f.lower80[k] = std::min(bart::quantile(col, 0.10), f.point[k]);
        f.upper80[k] = std::max(bart::quantile(col, 0.90), f.point[k]);
        f.lower95[k] = std::min(bart::quantile(col, 0.025), f.lower80[k]);
        f.upper95[k] = std::max(bart::quantile(col, 0.975), f.upper80[k]);
      }
    }
    f.status = (!model.state->horizon_constant() && path_sd(f.diff_point) < kFlatTolerance) ? Status::Flat : Status::Ok;
  } catch (const std::exception& e) {
    f.status = Status::Failed;
    f.message = e.what();
    f.point.clear();
    f.diff_point.clear();
    f.lower80.clear();
    f.upper80.clear();
    f.lower95.clear();
    f.upper95.clear();
  }
  return f;
}

std::vector<std::string> MetricTable::models() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
  }
  return out;
}

const MetricRow* MetricTable::find(const std::string& model, std::size_t window) const {
  for (const auto& r : rows) {
    if (r.model == model && r.window == window) return &r;
  }
  return nullptr;
}

MetricRow score(const WindowForecast& f, const data::DesignMatrix& design) {
  MetricRow r;
  r.model = f.model;
  r.window = f.window;
  r.train_len = f.train_end;
  r.status = f.status;
  if (!f.has_point()) {
    r.mae = r.rmse = r.mape = r.mase = r.mae_diff = kNaN;
    return r;
  }
  r.mae = mae(f.actual, f.point);
  r.rmse = rmse(f.actual, f.point);
  r.mape = mape(f.actual, f.point);
  const auto te = static_cast<Index>(f.train_end);
  const double scale = design.y.head(te).cwiseAbs().mean();
  r.mase = mase(f.actual, f.point, scale);
  const auto h = static_cast<Index>(f.actual.size());
  const auto actual_diff = to_std(design.y.segment(te, h));
  r.mae_diff = mae(actual_diff, f.diff_point);
  return r;
}

Comparison run_comparison(const std::vector<models::ModelSpec>& specs, const data::DesignMatrix& design,
                          const data::CvPlan& plan, const Exec& exec) {
  Comparison c;
  c.plan = plan;
  for (const auto& s : specs) c.models.emplace_back(models::to_string(s.id));
  const std::size_t nw = plan.windows.size();
  c.forecasts.resize(specs.size() * nw);
  parallel_for(exec, c.forecasts.size(), [&](std::size_t task) {
    const std::size_t m = task / nw, w = task % nw;
    c.forecasts[task] = forecast_window(specs[m], design, plan.windows[w]);
  });
  for (const auto& f : c.forecasts) c.metrics.rows.push_back(score(f, design));
  return c;
}

}  // namespace pdbench::eval
