#include "pdbench/models/model.hpp"

#include "pdbench/bart/bart.hpp"
#include "pdbench/core/error.hpp"
#include "pdbench/models/bma.hpp"
#include "pdbench/models/forest.hpp"
#include "pdbench/models/linear.hpp"
#include "pdbench/models/neural_net.hpp"
#include "pdbench/models/smoothing.hpp"
#include "pdbench/models/spikeslab.hpp"
#include "pdbench/models/tree.hpp"

#include <cmath>
#include <limits>

namespace pdbench::models {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entry {
  ModelId id;
  std::string_view name;
  Category category;
};

constexpr Entry kRegistry[] = {
    {ModelId::Lm, "lm", Category::GeneralizedLinear},
    {ModelId::Ridge, "ridge", Category::GeneralizedLinear},
    {ModelId::Lasso, "lasso", Category::GeneralizedLinear},
    {ModelId::Pcr, "pcr", Category::GeneralizedLinear},
    {ModelId::SpikeSlab, "spikeslab", Category::GeneralizedLinear},
    {ModelId::Bma, "bma", Category::ModelAveraging},
    {ModelId::Es, "es", Category::ExponentialSmoothing},
    {ModelId::Cart, "cart", Category::TreeBased},
    {ModelId::Rf, "rf", Category::TreeBased},
    {ModelId::Nn, "nn", Category::NeuralNetwork},
    {ModelId::Bart, "bart", Category::TreeBased},
};

const Entry& entry(ModelId id) {
  for (const auto& e : kRegistry) {
    if (e.id == id) return e;
  }
  throw DomainError("unknown model id");
}

class BartPredictor : public Predictor {
 public:
  explicit BartPredictor(bart::BartPosterior post) : post_(std::move(post)) {}
  Vector predict(const Matrix& x) const override {
    return bart::posterior_draws(post_, x).colwise().mean().transpose();
  }
  std::optional<Matrix> predictive_draws(const Matrix& x) const override {
    return bart::predictive_draws(post_, x, post_.config.seed);
  }
  const bart::BartPosterior& posterior() const { return post_; }

 private:
  bart::BartPosterior post_;
};

int as_int(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

std::string_view to_string(ModelId id) { return entry(id).name; }

std::string_view to_string(Category c) {
  switch (c) {
    case Category::GeneralizedLinear: return "generalized_linear";
    case Category::ModelAveraging: return "model_averaging";
    case Category::ExponentialSmoothing: return "exponential_smoothing";
    case Category::AdditiveModels: return "additive_models";
    case Category::Mars: return "mars";
    case Category::SupportVector: return "support_vector";
    case Category::GaussianProcess: return "gaussian_process";
    case Category::TreeBased: return "tree_based";
    case Category::NeuralNetwork: return "neural_network";
  }
  return "unknown";
}

ModelId parse_model_id(std::string_view name) {
  for (const auto& e : kRegistry) {
    if (e.name == name) return e.id;
  }
  throw ConfigError("unknown model '" + std::string(name) + "'");
}

Category category_of(ModelId id) { return entry(id).category; }

const std::vector<ModelId>& all_models() {
  static const std::vector<ModelId> ids = [] {
    std::vector<ModelId> v;
    for (const auto& e : kRegistry) v.push_back(e.id);
    return v;
  }();
  return ids;
}

const std::vector<ParamInfo>& declared_params(ModelId id) {
  //                         name, default, tunable, integer, lower, upper
  static const std::vector<ParamInfo> lm{{"intercept", 1, true, true, 0, 1}};
  static const std::vector<ParamInfo> ridge{{"lambda", 1.0, true, false, 0, kInf}};
  static const std::vector<ParamInfo> lasso{{"fraction", 0.5, true, false, 0, 1}};
  static const std::vector<ParamInfo> pcr{{"ncomp", 3, true, true, 0, kInf}};
  static const std::vector<ParamInfo> spikeslab{{"vars", 10, true, true, 1, kInf},
                                                {"draws", 2000, false, true, 1, kInf},
                                                {"burn", 500, false, true, 0, kInf}};
  static const std::vector<ParamInfo> bma{{"draws", 10000, false, true, 1, kInf}};
  static const std::vector<ParamInfo> es{{"alpha", -1, true, false, -1, 1}};
  static const std::vector<ParamInfo> cart{{"cp", 0.01, true, false, 0, kInf},
                                           {"min_split", 6, false, true, 2, kInf},
                                           {"min_leaf", 2, false, true, 1, kInf}};
  static const std::vector<ParamInfo> rf{{"mtry", -1, true, true, -1, kInf},
                                         {"min_node_size", 5, true, true, 1, kInf},
                                         {"num_trees", 500, false, true, 1, kInf},
                                         {"bootstrap", 1, false, true, 0, 1}};
  static const std::vector<ParamInfo> nn{{"layer1", 5, true, true, 0, kInf},
                                         {"layer2", 0, true, true, 0, kInf},
                                         {"layer3", 0, true, true, 0, kInf},
                                         {"max_epochs", 5000, false, true, 1, kInf}};
  static const std::vector<ParamInfo> bart{{"num_trees", 50, true, true, 1, kInf},
                                           {"k", 2, true, false, 1e-12, kInf},
                                           {"alpha", 0.95, true, false, 1e-12, 1 - 1e-12},
                                           {"beta", 2, true, false, 0, kInf},
                                           {"nu", 3, true, false, 1e-12, kInf},
                                           {"q", 0.9, false, false, 1e-12, 1 - 1e-12},
                                           {"n_draws", 1000, false, true, 1, kInf},
                                           {"n_burn", 250, false, true, 0, kInf},
                                           {"n_chains", 4, false, true, 1, kInf}};
  switch (id) {
    case ModelId::Lm: return lm;
    case ModelId::Ridge: return ridge;
    case ModelId::Lasso: return lasso;
    case ModelId::Pcr: return pcr;
    case ModelId::SpikeSlab: return spikeslab;
    case ModelId::Bma: return bma;
    case ModelId::Es: return es;
    case ModelId::Cart: return cart;
    case ModelId::Rf: return rf;
    case ModelId::Nn: return nn;
    case ModelId::Bart: return bart;
  }
  throw DomainError("unknown model id");
}

double ModelSpec::param(const std::string& name) const {
  if (auto it = hyperparams.find(name); it != hyperparams.end()) return it->second;
  for (const auto& p : declared_params(id)) {
    if (p.name == name) return p.default_value;
  }
  throw ConfigError(std::string(to_string(id)) + ": no hyperparameter '" + name + "'");
}

void ModelSpec::validate() const {
  const auto& params = declared_params(id);
  for (const auto& [name, value] : hyperparams) {
    auto it = std::find_if(params.begin(), params.end(), [&](const ParamInfo& p) { return p.name == name; });
    const std::string where = std::string(to_string(id)) + "." + name;
    if (it == params.end()) throw ConfigError(where + ": not a declared hyperparameter");
    if (!std::isfinite(value) && !(value == kInf && it->upper == kInf)) {
      throw ConfigError(where + ": value must be finite");
    }
    if (value < it->lower || value > it->upper) throw ConfigError(where + ": value out of range");
    if (it->integer && std::isfinite(value) && value != std::round(value)) {
      throw ConfigError(where + ": value must be an integer");
    }
  }
}

FittedModel fit(const ModelSpec& spec, const Matrix& x, const Vector& y, const FitOptions& options) {
  spec.validate();
  if (x.rows() == 0) throw FitError(std::string(to_string(spec.id)) + ": empty training design");
  if (y.size() != x.rows()) throw DataError("fit: target length does not match design rows");
  if (!x.allFinite() || !y.allFinite()) throw FitError(std::string(to_string(spec.id)) + ": non-finite training data");

  FittedModel out;
  out.id = spec.id;
  out.n_columns = static_cast<std::size_t>(x.cols());
  out.column_names = options.column_names;
  out.target_mean = y.mean();
  out.target_sd = y.size() > 1 ? std::sqrt((y.array() - out.target_mean).square().sum() / (y.size() - 1.0)) : 0.0;

  switch (spec.id) {
    case ModelId::Lm:
      out.state = std::make_shared<LinearPredictor>(fit_ols(x, y, spec.param("intercept") != 0.0));
      break;
    case ModelId::Ridge:
      out.state = std::make_shared<LinearPredictor>(fit_ridge(x, y, spec.param("lambda")));
      break;
    case ModelId::Lasso:
      out.state = std::make_shared<LinearPredictor>(fit_lasso(x, y, spec.param("fraction")));
      break;
    case ModelId::Pcr:
      out.state = std::make_shared<LinearPredictor>(fit_pcr(x, y, static_cast<std::size_t>(as_int(spec.param("ncomp")))).predictor);
      break;
    case ModelId::SpikeSlab: {
      SpikeSlabOptions o;
      o.vars = as_int(spec.param("vars"));
      o.draws = as_int(spec.param("draws"));
      o.burn = as_int(spec.param("burn"));
      out.state = std::make_shared<LinearPredictor>(fit_spikeslab(x, y, o, spec.seed).predictor);
      break;
    }
    case ModelId::Bma: {
      ColumnLayout layout = options.layout.value_or(ColumnLayout{static_cast<std::size_t>(x.cols()), 0});
      BmaOptions o;
      o.mc3_draws = as_int(spec.param("draws"));
      out.state = std::make_shared<BmaPredictor>(fit_bma(x, y, layout, o, spec.seed));
      break;
    }
    case ModelId::Es:
      out.state = std::make_shared<SesPredictor>(fit_ses(y, spec.param("alpha")));
      break;
    case ModelId::Cart: {
      TreeOptions o;
      o.cp = spec.param("cp");
      o.min_split = as_int(spec.param("min_split"));
      o.min_leaf = as_int(spec.param("min_leaf"));
      out.state = std::make_shared<CartPredictor>(fit_cart(x, y, o));
      break;
    }
    case ModelId::Rf: {
      ForestOptions o;
      o.mtry = as_int(spec.param("mtry"));
      o.min_node_size = as_int(spec.param("min_node_size"));
      o.num_trees = as_int(spec.param("num_trees"));
      o.bootstrap = spec.param("bootstrap") != 0.0;
      out.state = std::make_shared<ForestPredictor>(fit_forest(x, y, o, spec.seed, options.exec));
      break;
    }
    case ModelId::Nn: {
      NeuralNetOptions o;
      o.hidden = {as_int(spec.param("layer1")), as_int(spec.param("layer2")), as_int(spec.param("layer3"))};
      o.max_epochs = as_int(spec.param("max_epochs"));
      out.state = std::make_shared<NeuralNetPredictor>(fit_neural_net(x, y, o, spec.seed));
      break;
    }
    case ModelId::Bart: {
      bart::BartConfig c;
      c.num_trees = as_int(spec.param("num_trees"));
      c.k = spec.param("k");
      c.alpha = spec.param("alpha");
      c.beta = spec.param("beta");
      c.nu = spec.param("nu");
      c.q = spec.param("q");
      c.n_draws = as_int(spec.param("n_draws"));
      c.n_burn = as_int(spec.param("n_burn"));
      c.n_chains = as_int(spec.param("n_chains"));
      c.seed = spec.seed;
      out.state = std::make_shared<BartPredictor>(bart::bart_fit(x, y, c, options.exec));
      break;
    }
  }
  return out;
}

Vector predict(const FittedModel& model, const Matrix& x_future) {
  if (!model.state) throw DomainError("predict: model has no fitted state");
  if (static_cast<std::size_t>(x_future.cols()) != model.n_columns) {
    throw DataError(std::string(to_string(model.id)) + ": prediction design has " + std::to_string(x_future.cols()) +
                    " columns, expected " + std::to_string(model.n_columns));
  }
  return model.state->predict(x_future);
}

}  // namespace pdbench::models
