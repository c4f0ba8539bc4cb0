#pragma once

#include "pdbench/core/exec.hpp"
#include "pdbench/core/linalg.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pdbench::models {

enum class ModelId { Lm, Ridge, Lasso, Pcr, SpikeSlab, Bma, Es, Cart, Rf, Nn, Bart };

/// The nine model groups of the comparison.
enum class Category {
  GeneralizedLinear,
  ModelAveraging,
  ExponentialSmoothing,
  AdditiveModels,
  Mars,
  SupportVector,
  GaussianProcess,
  TreeBased,
  NeuralNetwork,
};

std::string_view to_string(ModelId id);
std::string_view to_string(Category c);
ModelId parse_model_id(std::string_view name);
Category category_of(ModelId id);
const std::vector<ModelId>& all_models();

struct ParamInfo {
  std::string name;
  double default_value;
  bool tunable;
  bool integer;
  double lower;
  double upper;
};

/// Accepted hyperparameter names per model with defaults and bounds.
const std::vector<ParamInfo>& declared_params(ModelId id);

struct ModelSpec {
  ModelId id = ModelId::Lm;
  std::map<std::string, double> hyperparams;
  std::uint64_t seed = 0;

  Category category() const { return category_of(id); }
  /// Value of `name`, falling back to the declared default.
  double param(const std::string& name) const;
  /// Throws ConfigError for undeclared names or out-of-range values.
  void validate() const;
};

/// How design columns group into base variables and lags.
struct ColumnLayout {
  std::size_t n_base = 0;
  int lags = 0;
};

struct FitOptions {
  std::optional<ColumnLayout> layout;
  std::vector<std::string> column_names;
  Exec exec = Exec::serial();
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Vector predict(const Matrix& x) const = 0;
  /// Predictive draws (draws x rows), for models with a posterior.
  virtual std::optional<Matrix> predictive_draws(const Matrix& /*x*/) const { return std::nullopt; }
  /// True when the forecast is constant over the horizon by construction.
  virtual bool horizon_constant() const { return false; }
};

struct FittedModel {
  ModelId id = ModelId::Lm;
  std::shared_ptr<const Predictor> state;
  std::vector<std::string> column_names;
  std::size_t n_columns = 0;
  double target_mean = 0.0;
  double target_sd = 0.0;
};

/// Estimates `spec` on training rows. Throws FitError when estimation is
/// impossible; callers turn that into a failed forecast status.
FittedModel fit(const ModelSpec& spec, const Matrix& x, const Vector& y, const FitOptions& options = {});

/// Point predictions for `x_future`; DataError on column mismatch.
Vector predict(const FittedModel& model, const Matrix& x_future);

}  // namespace pdbench::models
