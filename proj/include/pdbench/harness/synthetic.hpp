#pragma once

#include "pdbench/core/linalg.hpp"
#include "pdbench/data/frame.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pdbench::harness {

enum class TermShape { Linear, Tanh, SignedSquare };

std::string_view to_string(TermShape s);
TermShape parse_term_shape(std::string_view s);

/// coef * shape(scale * dx) where dx is the lagged first difference of `variable`.
struct DgpTerm {
  std::string variable;
  int lag = 0;
  double coef = 0.0;
  TermShape shape = TermShape::Linear;
  double scale = 1.0;
};

/// Extra AR innovations applied to covariates during quarters [start, end] (1-based).
struct Regime {
  std::size_t start = 0;
  std::size_t end = 0;
  std::map<std::string, double> shock;
};

struct SyntheticSpec {
  std::size_t T = 69;
  std::size_t n_covariates = 8;
  data::Period start{2002, 2};
  double ar = 0.6;
  double innovation_sd = 1.0;
  std::vector<DgpTerm> terms = default_terms();
  std::vector<Regime> regimes = default_regimes();
  double noise_sd = 0.03;
  double initial_pd = 3.0;
  /// Additive quarterly pattern on the seasonally adjusted covariates.
  double seasonal_amplitude = 0.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError on unknown variables, negative lags, regimes
  /// outside [1, T] or non-positive sizes.
  void validate() const;
  std::vector<std::string> covariates() const;

  static std::vector<DgpTerm> default_terms();
  static std::vector<Regime> default_regimes();
};

struct SyntheticData {
  data::TimeSeriesFrame frame;
  /// Latent logit PD per quarter.
  Vector latent;
  /// Design columns carrying signal, e.g. "GDP_l1".
  std::vector<std::string> active_columns;
  nlohmann::json truth;
};

/// Covariates follow AR(1) processes with regime shocks; the latent logit PD
/// accumulates a sparse function of lagged covariate differences plus noise.
/// DataError when the latent path leaves the range where PD is representable
/// strictly inside (0, 100).
SyntheticData generate_synthetic(const SyntheticSpec& spec);

nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_from_json(const nlohmann::json& j);

}  // namespace pdbench::harness
