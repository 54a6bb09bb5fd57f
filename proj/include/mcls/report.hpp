#ifndef MCLS_REPORT_HPP
#define MCLS_REPORT_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcls/anova.hpp"
#include "mcls/config.hpp"
#include "mcls/feature_ranking.hpp"

namespace mcls {

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Result table text. Without wall time the column is left empty, which is
/// the form used for determinism comparisons.
std::string results_csv(std::span<const ExperimentCell> cells, bool include_wall_time = true);
void write_results_csv(std::span<const ExperimentCell> cells, const std::filesystem::path& path);
std::vector<ExperimentCell> read_results_csv(const std::filesystem::path& path);

/// Run manifest: config hash, seeds, seed derivation rule and cell counts.
nlohmann::json grid_manifest(const ExperimentConfig& config, std::string_view config_text,
                             std::span<const ExperimentCell> cells);

FeatureRanking read_ranking_csv(const std::filesystem::path& path);

struct GroupSummary {
  std::vector<std::string> key;
  double mean_smoothed_error = 0.0;
  double std_smoothed_error = 0.0;
  double mean_zero_one_error = 0.0;
  std::size_t cells = 0;
};

using GroupKey = std::function<std::vector<std::string>(const ExperimentCell&)>;

/// Successful cells grouped by `key_of`. Sorted by ascending mean smoothed
/// error (ties by key), or by key alone when `by_key` is set.
std::vector<GroupSummary> summarize(std::span<const ExperimentCell> cells, const GroupKey& key_of, bool by_key = false);

/// Writes the figure tables, anova.csv and summary.txt into `out_dir` and
/// returns the summary text. Throws before writing anything when `cells`
/// holds no successful cell.
std::string write_report(std::span<const ExperimentCell> cells, const std::filesystem::path& out_dir,
                         const std::optional<FeatureRanking>& ranking = std::nullopt);

}  // namespace mcls

#endif  // MCLS_REPORT_HPP
