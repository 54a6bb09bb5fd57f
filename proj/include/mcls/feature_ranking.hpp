#ifndef MCLS_FEATURE_RANKING_HPP
#define MCLS_FEATURE_RANKING_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "mcls/evaluation.hpp"

namespace mcls {

struct FeatureScore {
  std::string feature;
  double cv_error_mean = 0.0;
  double cv_error_std = 0.0;
  double mutual_information = 0.0;  // bits
};

struct FeatureRanking {
  std::vector<FeatureScore> scores;  // ascending cv_error_mean, ties by name
};

/// Quartile cut points of a numeric column, duplicates removed.
std::vector<double> quartile_cuts(std::vector<double> values);

/// Discrete code of each row for feature `j`: the category index, or the
/// number of quartile cut points strictly below a numeric value.
std::vector<int> discretize(const Dataset& ds, std::size_t j);

/// I(X;Y) = H(Y) - H(Y|X) in bits from empirical counts, clamped at 0.
double mutual_information(const Dataset& ds, std::size_t j);

struct RankingOptions {
  TreeParams tree{.min_leaf = 2, .max_depth = 3};
  SmoothedErrorConfig smoothing;
};

/// Mean and sample standard deviation over folds of the smoothed error of a
/// tree that sees feature `j` only.
std::pair<double, double> per_feature_cv_error(const Dataset& ds, std::size_t j, const FoldAssignment& folds,
                                               const RankingOptions& options = {});

FeatureRanking rank_features(const Dataset& ds, const FoldAssignment& folds, const RankingOptions& options = {});

/// "19.43 ± 0.12" from percent values.
std::string format_mean_std(double mean_pct, double std_pct);

/// Columns: rank, feature, cv_error_mean_pct, cv_error_std_pct, mutual_information_bits.
void write_ranking_csv(const FeatureRanking& ranking, const std::filesystem::path& path);

/// Aligned text table with one "NN.NN ± N.NN" row per feature.
std::string ranking_table(const FeatureRanking& ranking);

}  // namespace mcls

#endif  // MCLS_FEATURE_RANKING_HPP
