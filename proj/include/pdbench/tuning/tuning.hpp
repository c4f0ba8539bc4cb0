#pragma once

#include "pdbench/core/exec.hpp"
#include "pdbench/core/linalg.hpp"
#include "pdbench/data/cv_plan.hpp"
#include "pdbench/data/design.hpp"
#include "pdbench/models/model.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pdbench::tuning {

using Point = std::map<std::string, double>;

struct Grid {
  models::ModelId model = models::ModelId::Lm;
  /// Axes in declaration order; the first axis varies slowest.
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  std::size_t cap = 2000;

  std::size_t size() const;
  std::vector<Point> points() const;
  /// Throws ConfigError for undeclared or non-tunable axes, values outside a
  /// parameter's range, empty axes, or a product exceeding the cap.
  void validate() const;
  std::uint64_t hash() const;
};

/// +1 when larger values of a tunable make the model more complex, -1 when
/// they make it simpler, 0 when neutral.
int complexity_direction(models::ModelId model, const std::string& param);

/// True when `a` is strictly simpler than `b`, comparing axes in order.
bool simpler(const Grid& grid, const Point& a, const Point& b);

struct TuningResult {
  models::ModelId model = models::ModelId::Lm;
  Point best;
  std::size_t best_index = 0;
  std::vector<Point> points;
  /// Mean MAE per point; +inf for excluded points.
  std::vector<double> mean_mae;
  /// points x windows; +inf where the fit failed.
  Matrix window_mae;
  std::vector<bool> excluded;
  std::size_t windows = 0;
  std::size_t fits = 0;
};

struct TuneOptions {
  /// Grid points with a larger share of failed windows are excluded.
  double max_failed_share = 0.25;
  std::uint64_t seed = 0;
};

/// Grid search over the windows of `plan`; every point is scored by the mean
/// reintegrated MAE. Throws FitError naming the model when no point survives.
TuningResult tune(const Grid& grid, const data::DesignMatrix& design, const data::CvPlan& plan,
                  const TuneOptions& options = {}, const Exec& exec = Exec::serial(),
                  const Point& fixed = {});

/// Index of the selected point: lowest mean, then simplest, then grid order.
std::size_t select_best(const Grid& grid, const std::vector<Point>& points, const std::vector<double>& mean_mae,
                        const std::vector<bool>& excluded);

/// Shipped grids for every zoo member.
std::vector<Grid> default_grids();
std::size_t total_fits(const std::vector<Grid>& grids, std::size_t windows);

nlohmann::json to_json(const TuningResult& r);
TuningResult tuning_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Grid& g);
Grid grid_from_json(models::ModelId model, const nlohmann::json& j);

}  // namespace pdbench::tuning
