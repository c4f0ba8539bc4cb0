#pragma once

#include "pdbench/combine/combination.hpp"
#include "pdbench/data/stationarity.hpp"
#include "pdbench/data/transforms.hpp"
#include "pdbench/eval/comparison.hpp"
#include "pdbench/eval/ranking.hpp"
#include "pdbench/harness/config.hpp"
#include "pdbench/harness/synthetic.hpp"
#include "pdbench/tuning/tuning.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pdbench::harness {

enum class Stage { Generate, Tune, Compare, Combine };

struct TunedModel {
  models::ModelId id = models::ModelId::Lm;
  /// Absent when the model has nothing to tune or tuning is disabled.
  std::optional<tuning::TuningResult> result;
  bool from_cache = false;
  std::string cache_file;
};

struct RunArtifacts {
  RunConfig config;
  std::string config_hash;
  data::TimeSeriesFrame raw;
  std::optional<SyntheticData> synthetic;
  data::TransformedData transformed;
  data::StationarityReport stationarity;
  data::DesignMatrix design;
  std::uint64_t data_hash = 0;

  std::vector<TunedModel> tuned;
  std::vector<models::ModelSpec> specs;

  std::optional<eval::Comparison> comparison;
  eval::StabilityResult stability;
  std::optional<eval::RankMatrix> ranks;
  std::optional<eval::RankTestResult> ranking;
  std::optional<combine::CombinationResult> combinations;
  std::vector<std::string> warnings;
};

using Logger = std::function<void(const std::string&)>;

/// Runs every stage up to and including `until`. Tuning results are read
/// from and written to `<output_dir>/cache` when caching is on.
RunArtifacts run_pipeline(const RunConfig& config, Stage until, const Logger& log = {});

/// Byte-stable hash of the design matrix contents.
std::uint64_t design_hash(const data::DesignMatrix& d);

/// Cache key of one model's tuning run.
std::string tuning_cache_key(const ModelEntry& entry, std::uint64_t data_hash, const RunConfig& config);

/// Writes the artifacts of the completed stages; OutputError when the
/// directory cannot be created or written.
std::vector<std::filesystem::path> emit_results(const RunArtifacts& a, Stage until, const std::filesystem::path& out);

/// Aligned text summary rendered from ranking.json and (possibly null)
/// combinations.json documents.
std::string render_summary(const nlohmann::json& ranking, const nlohmann::json& combinations);

/// 0 ok, 1 other failure, 2 configuration, 3 data, 4 output.
int exit_code(const std::exception& e);

}  // namespace pdbench::harness
