#include "pdbench/harness/synthetic.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/core/rng.hpp"
#include "pdbench/data/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pdbench::harness {

namespace {

constexpr double kMaxLatent = 15.0;

double apply_shape(TermShape s, double x) {
  switch (s) {
    case TermShape::Linear: return x;
    case TermShape::Tanh: return std::tanh(x);
    case TermShape::SignedSquare: return x * std::abs(x);
  }
  return x;
}

}  // namespace

std::string_view to_string(TermShape s) {
  switch (s) {
    case TermShape::Linear: return "linear";
    case TermShape::Tanh: return "tanh";
    case TermShape::SignedSquare: return "signed_square";
  }
  return "?";
}

TermShape parse_term_shape(std::string_view s) {
  for (auto t : {TermShape::Linear, TermShape::Tanh, TermShape::SignedSquare}) {
    if (s == to_string(t)) return t;
  }
  throw ConfigError("unknown term shape '" + std::string(s) + "' (expected linear, tanh or signed_square)");
}

std::vector<DgpTerm> SyntheticSpec::default_terms() {
  return {{"GDP", 1, -0.15, TermShape::Linear, 1.0},
          {"UNE", 0, 0.12, TermShape::Tanh, 1.5},
          {"STR", 2, 0.06, TermShape::SignedSquare, 1.0}};
}

std::vector<Regime> SyntheticSpec::default_regimes() {
  return {{26, 31, {{"GDP", -1.5}, {"UNE", 1.0}}}, {46, 49, {{"GDP", -0.8}, {"UNE", 0.5}}}};
}

std::vector<std::string> SyntheticSpec::covariates() const {
  const auto& defaults = data::default_variables();
  if (n_covariates + 1 == defaults.size()) return {defaults.begin() + 1, defaults.end()};
  std::vector<std::string> out;
  for (std::size_t j = 0; j < n_covariates; ++j) out.push_back("X" + std::to_string(j + 1));
  return out;
}

void SyntheticSpec::validate() const {
  if (T < 3) throw ConfigError("synthetic.T must be at least 3");
  if (n_covariates == 0) throw ConfigError("synthetic.n_covariates must be positive");
  if (!(std::abs(ar) < 1.0)) throw ConfigError("synthetic.ar must lie in (-1, 1) for stationarity");
  if (!(innovation_sd > 0.0)) throw ConfigError("synthetic.innovation_sd must be positive");
  if (!(noise_sd >= 0.0)) throw ConfigError("synthetic.noise_sd must be non-negative");
  if (!(initial_pd > 0.0 && initial_pd < 100.0)) throw ConfigError("synthetic.initial_pd must lie in (0, 100)");
  const auto names = covariates();
  auto known = [&](const std::string& v) { return std::find(names.begin(), names.end(), v) != names.end(); };
  for (const auto& t : terms) {
    if (!known(t.variable)) throw ConfigError("synthetic.terms: unknown variable '" + t.variable + "'");
    if (t.lag < 0) throw ConfigError("synthetic.terms: negative lag for '" + t.variable + "'");
  }
  for (const auto& r : regimes) {
    if (r.start < 1 || r.end > T || r.start > r.end) {
      throw ConfigError("synthetic.regimes: [" + std::to_string(r.start) + ", " + std::to_string(r.end) +
                        "] outside [1, " + std::to_string(T) + "]");
    }
    for (const auto& [v, s] : r.shock) {
      if (!known(v)) throw ConfigError("synthetic.regimes: unknown variable '" + v + "'");
    }
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const auto names = spec.covariates();
  const std::size_t t_len = spec.T, n = names.size();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::vector<double>> x(n, std::vector<double>(t_len, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    // start from the stationary distribution
    x[j][0] = spec.innovation_sd / std::sqrt(1.0 - spec.ar * spec.ar) * normal(rng);
  }
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double shock = 0.0;
      for (const auto& r : spec.regimes) {
        const auto it = r.shock.find(names[j]);
        if (it != r.shock.end() && t + 1 >= r.start && t + 1 <= r.end) shock += it->second;
      }
      x[j][t] = spec.ar * x[j][t - 1] + spec.innovation_sd * normal(rng) + shock;
    }
  }

  auto index_of = [&](const std::string& v) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), v) - names.begin());
  };
  Vector z(static_cast<Index>(t_len));
  z(0) = data::logit_transform(spec.initial_pd);
  for (std::size_t t = 1; t < t_len; ++t) {
    double dz = spec.noise_sd * normal(rng);
    for (const auto& term : spec.terms) {
      const std::size_t lag = static_cast<std::size_t>(term.lag);
      if (t < lag + 1) continue;  // the lagged difference is not yet defined
      const auto& s = x[index_of(term.variable)];
      const double dx = s[t - lag] - s[t - lag - 1];
      dz += term.coef * apply_shape(term.shape, term.scale * dx);
    }
    z(static_cast<Index>(t)) = z(static_cast<Index>(t) - 1) + dz;
    if (std::abs(z(static_cast<Index>(t))) > kMaxLatent) {
      throw DataError("synthetic latent logit PD reached " + std::to_string(z(static_cast<Index>(t))) +
                      " at quarter " + std::to_string(t + 1) + "; PD would leave (0, 100), tighten the noise");
    }
  }

  std::vector<data::Period> index;
  data::Period p = spec.start;
  for (std::size_t t = 0; t < t_len; ++t, p = p.next()) index.push_back(p);
  std::vector<data::Column> cols;
  data::Column pd{"PD", {}, {}};
  for (std::size_t t = 0; t < t_len; ++t) pd.values.push_back(data::inverse_logit(z(static_cast<Index>(t))));
  cols.push_back(std::move(pd));
  static constexpr double kPattern[4] = {1.0, -0.5, 0.5, -1.0};
  for (std::size_t j = 0; j < n; ++j) {
    data::Column c{names[j], x[j], {}};
    if (spec.seasonal_amplitude != 0.0) {
      for (std::size_t t = 0; t < t_len; ++t) {
        c.values[t] += spec.seasonal_amplitude * kPattern[static_cast<std::size_t>(index[t].quarter() - 1)];
      }
    }
    cols.push_back(std::move(c));
  }

  SyntheticData out;
  out.frame = data::TimeSeriesFrame(std::move(index), std::move(cols));
  out.latent = z;
  for (const auto& term : spec.terms) {
    const std::string col = term.variable + "_l" + std::to_string(term.lag);
    if (std::find(out.active_columns.begin(), out.active_columns.end(), col) == out.active_columns.end()) {
      out.active_columns.push_back(col);
    }
  }
  out.truth = {{"spec", to_json(spec)},
               {"active_columns", out.active_columns},
               {"latent_logit_pd", std::vector<double>(z.data(), z.data() + z.size())}};
  return out;
}

nlohmann::json to_json(const SyntheticSpec& s) {
  using nlohmann::json;
  json terms = json::array(), regimes = json::array();
  for (const auto& t : s.terms) {
    terms.push_back({{"variable", t.variable}, {"lag", t.lag}, {"coef", t.coef}, {"shape", to_string(t.shape)}, {"scale", t.scale}});
  }
  for (const auto& r : s.regimes) regimes.push_back({{"start", r.start}, {"end", r.end}, {"shock", r.shock}});
  return {{"T", s.T},
          {"n_covariates", s.n_covariates},
          {"start", s.start.label()},
          {"ar", s.ar},
          {"innovation_sd", s.innovation_sd},
          {"terms", terms},
          {"regimes", regimes},
          {"noise_sd", s.noise_sd},
          {"initial_pd", s.initial_pd},
          {"seasonal_amplitude", s.seasonal_amplitude},
          {"seed", s.seed}};
}

SyntheticSpec synthetic_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  static const std::vector<std::string> known = {"T", "n_covariates", "start", "ar", "innovation_sd", "terms",
                                                 "regimes", "noise_sd", "initial_pd", "seasonal_amplitude", "seed"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("synthetic: unknown field '" + k + "'");
  }
  try {
    if (j.contains("T")) s.T = j.at("T").get<std::size_t>();
    if (j.contains("n_covariates")) s.n_covariates = j.at("n_covariates").get<std::size_t>();
    if (j.contains("start")) s.start = data::Period::parse(j.at("start").get<std::string>());
    if (j.contains("ar")) s.ar = j.at("ar").get<double>();
    if (j.contains("innovation_sd")) s.innovation_sd = j.at("innovation_sd").get<double>();
    if (j.contains("noise_sd")) s.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("initial_pd")) s.initial_pd = j.at("initial_pd").get<double>();
    if (j.contains("seasonal_amplitude")) s.seasonal_amplitude = j.at("seasonal_amplitude").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("terms")) {
      s.terms.clear();
      for (const auto& t : j.at("terms")) {
        DgpTerm term;
        term.variable = t.at("variable").get<std::string>();
        term.lag = t.value("lag", 0);
        term.coef = t.at("coef").get<double>();
        term.shape = parse_term_shape(t.value("shape", std::string("linear")));
        term.scale = t.value("scale", 1.0);
        s.terms.push_back(std::move(term));
      }
    }
    if (j.contains("regimes")) {
      s.regimes.clear();
      for (const auto& r : j.at("regimes")) {
        Regime reg;
        reg.start = r.at("start").get<std::size_t>();
        reg.end = r.at("end").get<std::size_t>();
        reg.shock = r.at("shock").get<std::map<std::string, double>>();
        s.regimes.push_back(std::move(reg));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("synthetic.start: ") + e.what());
  }
  return s;
}

}  // namespace pdbench::harness
