#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mcls/commands.hpp"
#include "mcls/core.hpp"

namespace {

spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("MCLS_LOG_LEVEL");
  const std::string value = env ? env : "warn";
  if (value == "error") return spdlog::level::err;
  if (value == "info") return spdlog::level::info;
  if (value == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

void add_overrides(CLI::App* cmd, mcls::ConfigOverrides& o) {
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--members", o.members, "Member sets, e.g. ANN+DT,DT+kNN or all");
  cmd->add_option("--arch", o.architectures, "Architectures, comma separated");
  cmd->add_option("--resampling", o.resamplings, "Resampling procedures, comma separated");
  cmd->add_option("--folds", o.folds, "Cross-validation folds");
  cmd->add_option("--reps", o.replications, "Replications");
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("mcls");
  logger->set_level(level_from_env());
  logger->set_pattern("[%l] %v");

  mcls::CommandContext ctx{std::cout, std::cerr, [&](mcls::LogLevel level, const std::string& message) {
                             switch (level) {
                               case mcls::LogLevel::error: logger->error(message); break;
                               case mcls::LogLevel::warn: logger->warn(message); break;
                               case mcls::LogLevel::info: logger->info(message); break;
                               case mcls::LogLevel::debug: logger->debug(message); break;
                             }
                           }};

  CLI::App app{"Ensemble classifier study runner"};
  app.require_subcommand(1);

  std::string config;
  mcls::ConfigOverrides overrides;

  auto* validate = app.add_subcommand("validate", "Check a config and its inputs");
  validate->add_option("--config", config, "Config file")->required();

  auto* grid = app.add_subcommand("grid", "Run the factorial experiment grid");
  grid->add_option("--config", config, "Config file")->required();
  add_overrides(grid, overrides);
  grid->add_flag("--save-models", overrides.save_models, "Refit and save the best model of each family");

  auto* rank = app.add_subcommand("rank", "Rank features by single-feature tree error");
  rank->add_option("--config", config, "Config file")->required();
  add_overrides(rank, overrides);

  std::string results;
  std::optional<std::filesystem::path> report_out;
  auto* report = app.add_subcommand("report", "Summarize a results CSV");
  report->add_option("results", results, "Results CSV")->required();
  report->add_option("--out", report_out, "Report directory");

  std::string model, dataset;
  std::optional<std::filesystem::path> schema, predict_out;
  auto* predict = app.add_subcommand("predict", "Score a dataset with a saved model");
  predict->add_option("--model", model, "Model JSON")->required();
  predict->add_option("--data", dataset, "Dataset CSV")->required();
  predict->add_option("--schema", schema, "Schema JSON of the dataset");
  predict->add_option("--out", predict_out, "Predictions CSV (default stdout)");

  std::string synth_out = "data";
  std::size_t rows = 600;
  std::uint64_t synth_seed = 2024;
  auto* synth = app.add_subcommand("synth", "Write the synthetic behavioural benchmark");
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--rows", rows, "Row count")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mcls::kExitInputError;
  }

  try {
    if (*validate) return mcls::cmd_validate(config, ctx);
    if (*grid) return mcls::cmd_grid(config, overrides, ctx);
    if (*rank) return mcls::cmd_rank(config, overrides, ctx);
    if (*report) return mcls::cmd_report(results, report_out, ctx);
    if (*predict) return mcls::cmd_predict(model, dataset, schema, predict_out, ctx);
    if (*synth) return mcls::cmd_synth(synth_out, rows, synth_seed, ctx);
  } catch (const std::exception& e) {
    logger->error(e.what());
    return mcls::kExitInputError;
  }
  return mcls::kExitInputError;
}
