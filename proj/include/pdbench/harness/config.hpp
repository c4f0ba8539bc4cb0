#pragma once

#include "pdbench/combine/combination.hpp"
#include "pdbench/data/transforms.hpp"
#include "pdbench/harness/synthetic.hpp"
#include "pdbench/models/model.hpp"
#include "pdbench/tuning/tuning.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pdbench::harness {

struct DataSource {
  /// Empty means synthetic.
  std::string csv;
  SyntheticSpec synthetic;
  /// When false the generator seed follows the master seed.
  bool synthetic_seed_fixed = false;

  bool is_synthetic() const { return csv.empty(); }
};

struct ModelEntry {
  models::ModelId id = models::ModelId::Lm;
  tuning::Grid grid;
  /// Non-tuned hyperparameters applied to every fit.
  tuning::Point params;
  bool tune = true;
};

struct RunConfig {
  DataSource data;
  std::vector<std::string> variables = data::default_variables();
  std::string target = "PD";
  bool logit = true;
  bool seasonal_adjust = true;
  data::TransformPlan transforms;
  int lags = 4;

  bool tuning_enabled = true;
  std::size_t tuning_initial = 41;
  std::size_t tuning_holdout = 12;
  double max_failed_share = 0.25;
  bool tuning_cache = true;

  std::size_t comparison_initial = 4;
  std::size_t comparison_holdout = 12;
  double stability_threshold = 0.25;
  double rmcb_alpha = 0.05;

  std::vector<ModelEntry> models;

  bool combination_enabled = true;
  combine::CombinationOptions combination;
  std::string reference_model = "bart";

  std::vector<std::size_t> plot_windows{0, 12, 24, 36, 48};
  std::vector<std::string> plot_models{"bart"};

  std::uint64_t seed = 20240101;
  int jobs = 1;
  std::string output_dir = "out";

  /// Keeps only the listed models, in the given order; names absent from the
  /// config get their shipped grid.
  void restrict_models(const std::vector<std::string>& names);
  std::uint64_t model_seed(models::ModelId id) const;
  /// Sets the master seed and, unless pinned in the file, the generator seed.
  void set_seed(std::uint64_t s);
  /// Transform plan after the on/off toggles.
  data::TransformPlan effective_transforms() const;
};

/// Every zoo member with its shipped grid.
std::vector<ModelEntry> default_model_entries();

/// Parses a config document; unknown or malformed fields raise ConfigError
/// naming the field path.
RunConfig parse_config(const nlohmann::ordered_json& j);
/// Reads a JSON file that may contain comments.
RunConfig load_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const RunConfig& c);
/// Hex digest of the canonical serialization.
std::string config_hash(const RunConfig& c);

}  // namespace pdbench::harness
