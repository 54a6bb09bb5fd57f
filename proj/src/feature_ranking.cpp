#include "mcls/feature_ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mcls {

std::vector<double> quartile_cuts(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  std::vector<double> cuts;
  for (double q : {0.25, 0.5, 0.75}) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double cut = values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
  }
  return cuts;
}

std::vector<int> discretize(const Dataset& ds, std::size_t j) {
  if (j >= ds.feature_count()) throw Error("feature index " + std::to_string(j) + " out of range");
  std::vector<int> codes(ds.size());
  if (ds.features()[j].is_categorical()) {
    for (std::size_t i = 0; i < ds.size(); ++i) codes[i] = static_cast<int>(ds[i].values[j]);
    return codes;
  }
  std::vector<double> column(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) column[i] = ds[i].values[j];
  const auto cuts = quartile_cuts(column);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    codes[i] = static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), column[i]) - cuts.begin());
  }
  return codes;
}

double mutual_information(const Dataset& ds, std::size_t j) {
  if (ds.empty()) throw Error("mutual information of an empty dataset");
  const auto codes = discretize(ds, j);
  std::map<int, std::array<double, 2>> joint;
  std::array<double, 2> label_counts{0.0, 0.0};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto y = static_cast<std::size_t>(ds[i].label);
    joint[codes[i]][y] += 1.0;
    label_counts[y] += 1.0;
  }
  const double n = static_cast<double>(ds.size());
  double conditional = 0.0;
  for (const auto& [code, counts] : joint) {
    conditional += (counts[0] + counts[1]) / n * entropy_bits(counts);
  }
  return std::max(0.0, entropy_bits(label_counts) - conditional);
}

std::pair<double, double> per_feature_cv_error(const Dataset& ds, std::size_t j, const FoldAssignment& folds,
                                               const RankingOptions& options) {
  if (folds.k < 2) throw Error("per-feature cross-validation needs at least 2 folds");
  if (folds.fold_of.size() != ds.size()) throw Error("fold assignment does not cover the dataset");
  if (j >= ds.feature_count()) throw Error("feature index " + std::to_string(j) + " out of range");
  const std::array<std::size_t, 1> only{j};
  TreeParams params = options.tree;
  params.leaf_alpha = options.smoothing.prior_alpha;

  std::vector<double> errors;
  for (int f = 0; f < folds.k; ++f) {
    const Dataset train = ds.subset(folds.rows_not_in(f)).project(only);
    const Dataset test = ds.subset(folds.rows_in(f)).project(only);
    if (!train.has_both_classes()) throw Error("fold " + std::to_string(f) + " lacks a class in its training part");
    if (test.empty()) throw Error("fold " + std::to_string(f) + " is empty");
    errors.push_back(smoothed_error(*train_tree(train, params), test, options.smoothing));
  }
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= static_cast<double>(errors.size());
  double var = 0.0;
  for (double e : errors) var += (e - mean) * (e - mean);
  var /= static_cast<double>(errors.size() - 1);
  return {mean, std::sqrt(var)};
}

FeatureRanking rank_features(const Dataset& ds, const FoldAssignment& folds, const RankingOptions& options) {
  if (ds.feature_count() == 0) throw Error("ranking needs at least one feature");
  FeatureRanking ranking;
  for (std::size_t j = 0; j < ds.feature_count(); ++j) {
    const auto [mean, sd] = per_feature_cv_error(ds, j, folds, options);
    ranking.scores.push_back({ds.features()[j].name, mean, sd, mutual_information(ds, j)});
  }
  std::sort(ranking.scores.begin(), ranking.scores.end(), [](const FeatureScore& a, const FeatureScore& b) {
    if (a.cv_error_mean != b.cv_error_mean) return a.cv_error_mean < b.cv_error_mean;
    return a.feature < b.feature;
  });
  return ranking;
}

std::string format_mean_std(double mean_pct, double std_pct) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f \xC2\xB1 %.2f", mean_pct, std_pct);
  return buf;
}

void write_ranking_csv(const FeatureRanking& ranking, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write ranking file '" + path.string() + "'");
  out << "rank,feature,cv_error_mean_pct,cv_error_std_pct,mutual_information_bits\n";
  for (std::size_t r = 0; r < ranking.scores.size(); ++r) {
    const auto& s = ranking.scores[r];
    out << r + 1 << ',' << s.feature << ',' << format_double(100.0 * s.cv_error_mean) << ','
        << format_double(100.0 * s.cv_error_std) << ',' << format_double(s.mutual_information) << '\n';
  }
}

std::string ranking_table(const FeatureRanking& ranking) {
  std::size_t width = 7;
  for (const auto& s : ranking.scores) width = std::max(width, s.feature.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-4s  %-*s  %-22s  %s\n", "Rank", static_cast<int>(width), "Feature",
                "Cross-validation error", "MI (bits)");
  out << line;
  for (std::size_t r = 0; r < ranking.scores.size(); ++r) {
    const auto& s = ranking.scores[r];
    const auto cell = format_mean_std(100.0 * s.cv_error_mean, 100.0 * s.cv_error_std);
    std::snprintf(line, sizeof(line), "%-4zu  %-*s  %-23s  %.4f\n", r + 1, static_cast<int>(width), s.feature.c_str(),
                  cell.c_str(), s.mutual_information);
    out << line;
  }
  return out.str();
}

}  // namespace mcls
