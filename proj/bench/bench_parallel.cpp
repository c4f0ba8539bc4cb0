// Serial reference vs OpenMP backend on the pipeline's parallel kernels.
// Argument 0 selects the serial path; n > 0 runs OpenMP with n threads.
// Every OpenMP result is checked against the serial one before timing.

#include "pdbench/bart/bart.hpp"
#include "pdbench/combine/combination.hpp"
#include "pdbench/data/cv_plan.hpp"
#include "pdbench/eval/comparison.hpp"
#include "pdbench/eval/ranking.hpp"
#include "pdbench/harness/config.hpp"
#include "pdbench/harness/synthetic.hpp"
#include "pdbench/tuning/tuning.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <thread>

using namespace pdbench;

namespace {

Exec exec_for(const benchmark::State& state) {
  const auto threads = static_cast<int>(state.range(0));
  return threads == 0 ? Exec::serial() : Exec::openmp(threads);
}

const data::DesignMatrix& design() {
  static const data::DesignMatrix d = [] {
    const auto c = harness::parse_config(nlohmann::ordered_json{{"seed", 11}});
    const auto raw = harness::generate_synthetic(c.data.synthetic).frame;
    const auto t = data::apply_transforms(raw, c.effective_transforms());
    return data::build_design(t.frame, c.target, c.lags, &t.levels);
  }();
  return d;
}

std::vector<models::ModelSpec> comparison_specs() {
  std::vector<models::ModelSpec> specs;
  for (auto id : {models::ModelId::Lm, models::ModelId::Ridge, models::ModelId::Lasso, models::ModelId::Cart,
                  models::ModelId::Rf}) {
    models::ModelSpec s;
    s.id = id;
    s.seed = 5;
    if (id == models::ModelId::Rf) s.hyperparams["num_trees"] = 100;
    specs.push_back(s);
  }
  return specs;
}

bool same_metrics(const eval::MetricTable& a, const eval::MetricTable& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const double x = a.rows[i].mae, y = b.rows[i].mae;
    if (a.rows[i].model != b.rows[i].model || !(x == y || (std::isnan(x) && std::isnan(y)))) return false;
  }
  return true;
}

void BM_Comparison(benchmark::State& state) {
  const auto specs = comparison_specs();
  const auto plan = data::rolling_windows(design().rows(), 4, 12);
  const auto exec = exec_for(state);
  const auto reference = eval::run_comparison(specs, design(), plan, Exec::serial());
  if (!same_metrics(eval::run_comparison(specs, design(), plan, exec).metrics, reference.metrics)) {
    state.SkipWithError("backend result mismatch");
    return;
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::run_comparison(specs, design(), plan, exec));
  state.counters["fits"] = static_cast<double>(specs.size() * plan.windows.size());
}

void BM_Tuning(benchmark::State& state) {
  tuning::Grid grid{models::ModelId::Ridge, {{"lambda", {0.01, 0.1, 1, 10, 100, 1000}}}, 50};
  const auto plan = data::rolling_windows(design().rows(), 41, 12);
  const auto exec = exec_for(state);
  const auto reference = tuning::tune(grid, design(), plan, {}, Exec::serial());
  if (tuning::tune(grid, design(), plan, {}, exec).mean_mae != reference.mean_mae) {
    state.SkipWithError("backend result mismatch");
    return;
  }
  for (auto _ : state) benchmark::DoNotOptimize(tuning::tune(grid, design(), plan, {}, exec));
}

void BM_BartChains(benchmark::State& state) {
  const auto& d = design();
  bart::BartConfig c;
  c.n_draws = 400;
  c.n_burn = 100;
  c.n_chains = 4;
  c.seed = 3;
  const auto exec = exec_for(state);
  const auto reference = bart::bart_fit(d.x, d.y, c, Exec::serial());
  if (bart::bart_fit(d.x, d.y, c, exec).sigma != reference.sigma) {
    state.SkipWithError("backend result mismatch");
    return;
  }
  for (auto _ : state) benchmark::DoNotOptimize(bart::bart_fit(d.x, d.y, c, exec));
}

void BM_Combinations(benchmark::State& state) {
  const auto specs = comparison_specs();
  const auto plan = data::rolling_windows(design().rows(), 4, 12);
  const auto cmp = eval::run_comparison(specs, design(), plan);
  std::vector<std::string> kept;
  for (const auto& s : specs) kept.emplace_back(models::to_string(s.id));
  const auto ranking = eval::rmcb(eval::rank_models(cmp.metrics, kept));
  combine::CombinationOptions opt;
  const auto exec = exec_for(state);
  const auto reference = combine::evaluate_combinations(cmp, design(), ranking, kept, opt, Exec::serial(), "rf");
  if (combine::to_json(combine::evaluate_combinations(cmp, design(), ranking, kept, opt, exec, "rf")) !=
      combine::to_json(reference)) {
    state.SkipWithError("backend result mismatch");
    return;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(combine::evaluate_combinations(cmp, design(), ranking, kept, opt, exec, "rf"));
  }
}

void backends(benchmark::internal::Benchmark* b) {
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  b->Arg(0);
  for (int t = 1; t <= std::max(4, hw); t *= 2) b->Arg(t);
  b->ArgName("threads")->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_Comparison)->Apply(backends);
BENCHMARK(BM_Tuning)->Apply(backends);
BENCHMARK(BM_BartChains)->Apply(backends);
BENCHMARK(BM_Combinations)->Apply(backends);

BENCHMARK_MAIN();
