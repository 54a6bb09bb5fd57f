#ifndef MCLS_CONFIG_HPP
#define MCLS_CONFIG_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mcls/evaluation.hpp"

namespace mcls {

/// A value from a key = value config line.
struct ConfigValue {
  enum class Kind { string, number, boolean, list };
  Kind kind = Kind::string;
  std::string text;  // string payload, or the raw token for numbers
  double number = 0.0;
  bool flag = false;
  std::vector<ConfigValue> items;
  int line = 0;
};

/// Flat "section.key" table. Syntax errors are appended to `diagnostics`.
std::map<std::string, ConfigValue> parse_config_text(std::string_view text, std::vector<std::string>& diagnostics);

struct ExperimentConfig {
  std::filesystem::path dataset;
  std::filesystem::path schema;
  std::filesystem::path output_dir = "results";
  GridSpec grid;
};

/// Builds a configuration from text; paths resolve against `base_dir`.
/// Every problem found is appended to `diagnostics`.
ExperimentConfig config_from_text(std::string_view text, const std::filesystem::path& base_dir,
                                  std::vector<std::string>& diagnostics);

/// Reads and parses a config file; throws Error listing all diagnostics.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks the referenced files: schema parses, dataset loads against it.
std::vector<std::string> check_config_inputs(const ExperimentConfig& config);

/// Comma list of member-set labels, or "all" for the full catalog.
std::vector<MemberSet> parse_member_sets(std::string_view text);

}  // namespace mcls

#endif  // MCLS_CONFIG_HPP
