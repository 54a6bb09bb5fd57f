#ifndef MCLS_COMMANDS_HPP
#define MCLS_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

namespace mcls {

enum ExitCode : int { kExitOk = 0, kExitCellFailures = 1, kExitInputError = 2 };

enum class LogLevel { error, warn, info, debug };

/// Output streams and an optional log sink shared by every command.
struct CommandContext {
  std::ostream& out;
  std::ostream& err;
  std::function<void(LogLevel, const std::string&)> log;

  void emit(LogLevel level, const std::string& message) const {
    if (log) log(level, message);
  }
};

/// Command-line overrides of config settings.
struct ConfigOverrides {
  std::optional<std::filesystem::path> out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> members;
  std::optional<std::string> architectures;
  std::optional<std::string> resamplings;
  std::optional<int> folds;
  std::optional<int> replications;
  bool save_models = false;
};

int cmd_validate(const std::filesystem::path& config, const CommandContext& ctx);
int cmd_grid(const std::filesystem::path& config, const ConfigOverrides& overrides, const CommandContext& ctx);
int cmd_rank(const std::filesystem::path& config, const ConfigOverrides& overrides, const CommandContext& ctx);

/// Report files go to `out_dir`, by default a "report" directory next to the results.
int cmd_report(const std::filesystem::path& results, const std::optional<std::filesystem::path>& out_dir,
               const CommandContext& ctx);

/// Scores a dataset with a serialized model. Without `schema` the CSV is read
/// against the model's own features; other columns, such as a label, are skipped.
int cmd_predict(const std::filesystem::path& model, const std::filesystem::path& dataset,
                const std::optional<std::filesystem::path>& schema, const std::optional<std::filesystem::path>& out,
                const CommandContext& ctx);

/// Writes the bundled behavioural benchmark as CSV plus schema.
int cmd_synth(const std::filesystem::path& out_dir, std::size_t rows, std::uint64_t seed, const CommandContext& ctx);

}  // namespace mcls

#endif  // MCLS_COMMANDS_HPP
