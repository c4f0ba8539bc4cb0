#include "pdbench/core/error.hpp"
#include "pdbench/harness/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace pdbench;
namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<std::string> models;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

harness::RunConfig resolve(const Flags& f) {
  auto c = harness::load_config(f.config);
  if (f.seed) c.set_seed(*f.seed);
  if (f.out) c.output_dir = *f.out;
  if (f.jobs) {
    if (*f.jobs < 1) throw ConfigError("--jobs: must be at least 1");
    c.jobs = *f.jobs;
  }
  if (f.models) c.restrict_models(split_list(*f.models));
  return c;
}

void log_line(const std::string& m) { std::fprintf(stderr, "pdbench: %s\n", m.c_str()); }

int run_stage(const Flags& f, harness::Stage stage) {
  const auto c = resolve(f);
  const auto artifacts = harness::run_pipeline(c, stage, log_line);
  const auto files = harness::emit_results(artifacts, stage, c.output_dir);
  for (const auto& p : files) std::printf("%s\n", (fs::path(c.output_dir) / p).string().c_str());
  if (stage >= harness::Stage::Compare) {
    std::ifstream in(fs::path(c.output_dir) / "summary.txt");
    std::cerr << in.rdbuf();
  }
  return 0;
}

nlohmann::json read_json(const fs::path& p, bool required) {
  std::ifstream in(p);
  if (!in) {
    if (required) throw DataError("cannot read '" + p.string() + "'; run `compare` first");
    return nullptr;
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

int report(const Flags& f) {
  fs::path dir;
  if (f.out) {
    dir = *f.out;
  } else if (!f.config.empty()) {
    dir = resolve(f).output_dir;
  } else {
    throw ConfigError("report: pass --out or --config");
  }
  const auto ranking = read_json(dir / "ranking.json", true);
  const auto combos = read_json(dir / "combinations.json", false);
  const auto text = harness::render_summary(ranking, combos);
  std::ofstream out(dir / "summary.txt", std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write '" + (dir / "summary.txt").string() + "'");
  out << text;
  std::printf("%s", text.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark of PD satellite models: tune, compare, rank and combine."};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", flags.config, "JSON config file (comments allowed)");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { flags.seed = v; },
                                            "Master seed (overrides the config)");
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { flags.out = v; },
                                          "Output directory (overrides the config)");
    sub->add_option_function<int>("--jobs", [&](const int& v) { flags.jobs = v; },
                                  "Worker threads; 1 runs the serial path");
    sub->add_option_function<std::string>("--models", [&](const std::string& v) { flags.models = v; },
                                          "Comma-separated model list (overrides the config)");
  };

  struct Verb {
    const char* name;
    const char* help;
    harness::Stage stage;
  };
  const Verb verbs[] = {
      {"generate", "Load or generate data, transform it and write the design inputs", harness::Stage::Generate},
      {"tune", "Grid-search hyperparameters (cached under <out>/cache)", harness::Stage::Tune},
      {"compare", "Rolling-origin comparison, stability filter and RMCB ranking", harness::Stage::Compare},
      {"combine", "Everything up to forecast combinations", harness::Stage::Combine},
      {"run", "All stages", harness::Stage::Combine},
  };
  int status = 0;
  std::vector<std::pair<CLI::App*, harness::Stage>> subs;
  for (const auto& v : verbs) {
    auto* sub = app.add_subcommand(v.name, v.help);
    add_common(sub, true);
    subs.emplace_back(sub, v.stage);
  }
  auto* rep = app.add_subcommand("report", "Re-render summary.txt from ranking.json and combinations.json");
  add_common(rep, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (rep->parsed()) {
      status = report(flags);
    } else {
      for (const auto& [sub, stage] : subs) {
        if (sub->parsed()) status = run_stage(flags, stage);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pdbench: error: %s\n", e.what());
    return harness::exit_code(e);
  }
  return status;
}
