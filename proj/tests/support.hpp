#ifndef MCLS_TESTS_SUPPORT_HPP
#define MCLS_TESTS_SUPPORT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcls/dataset.hpp"

namespace mcls::testing {

// Rows get consecutive ids.
inline Dataset table(Schema features, const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  std::vector<Instance> instances;
  for (std::size_t i = 0; i < rows.size(); ++i) instances.push_back({rows[i], labels[i], 1.0, i});
  return Dataset(std::move(features), "label", std::move(instances));
}

inline Dataset numeric_table(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  Schema features;
  for (std::size_t j = 0; j < rows.front().size(); ++j) features.push_back(FeatureSpec::numeric("x" + std::to_string(j)));
  return table(std::move(features), rows, labels);
}

// Random categorical table: `arity[j]` categories for feature j.
inline Dataset random_categorical(Rng& rng, const std::vector<std::size_t>& arity, std::size_t rows) {
  Schema features;
  for (std::size_t j = 0; j < arity.size(); ++j) {
    std::vector<std::string> cats;
    for (std::size_t c = 0; c < arity[j]; ++c) cats.push_back("c" + std::to_string(c));
    features.push_back(FeatureSpec::categorical("f" + std::to_string(j), cats));
  }
  std::vector<std::vector<double>> values;
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> row;
    for (auto a : arity) row.push_back(static_cast<double>(rng.index(a)));
    values.push_back(row);
    labels.push_back(i < 2 ? static_cast<int>(i) : static_cast<int>(rng.index(2)));
  }
  return table(std::move(features), values, labels);
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// Fresh directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mcls_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}


// Central finite differences of `loss` at `x`.
template <typename Loss>
Eigen::VectorXd central_difference(const Loss& loss, Eigen::VectorXd x, double step = 1e-5) {
  Eigen::VectorXd grad(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = loss(x);
    x[i] = keep - step;
    const double down = loss(x);
    x[i] = keep;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

// Largest componentwise relative error, with a small absolute floor.
inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-7});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

// Entropy in bits of a label multiset given as counts.
inline double entropy_of_counts(double c0, double c1) {
  double h = 0.0;
  for (double c : {c0, c1}) {
    if (c > 0.0) h -= c / (c0 + c1) * std::log2(c / (c0 + c1));
  }
  return h;
}

// Information gain of splitting `ds` one way per category of feature `j`.
inline double categorical_gain(const Dataset& ds, std::size_t j) {
  const std::size_t k = ds.features()[j].categories.size();
  std::vector<std::array<double, 2>> counts(k, {0.0, 0.0});
  std::array<double, 2> total{0.0, 0.0};
  for (const auto& x : ds.instances()) {
    counts[static_cast<std::size_t>(x.values[j])][static_cast<std::size_t>(x.label)] += 1.0;
    total[static_cast<std::size_t>(x.label)] += 1.0;
  }
  const double n = total[0] + total[1];
  double conditional = 0.0;
  for (const auto& c : counts) conditional += (c[0] + c[1]) / n * entropy_of_counts(c[0], c[1]);
  return entropy_of_counts(total[0], total[1]) - conditional;
}

// Naive Bayes posterior of class 1 from raw frequencies: Laplace priors and
// Dirichlet(alpha) smoothed categorical conditionals.
inline double bayes_oracle_p1(const Dataset& train, const Instance& x, double alpha) {
  std::array<double, 2> n_c{0.0, 0.0};
  for (const auto& r : train.instances()) n_c[static_cast<std::size_t>(r.label)] += 1.0;
  const double n = n_c[0] + n_c[1];
  std::array<double, 2> joint{};
  for (int c = 0; c < 2; ++c) {
    double p = (n_c[static_cast<std::size_t>(c)] + 1.0) / (n + 2.0);
    for (std::size_t j = 0; j < train.feature_count(); ++j) {
      double hits = 0.0;
      for (const auto& r : train.instances()) hits += (r.label == c && r.values[j] == x.values[j]) ? 1.0 : 0.0;
      const double k = static_cast<double>(train.features()[j].categories.size());
      p *= (hits + alpha) / (n_c[static_cast<std::size_t>(c)] + alpha * k);
    }
    joint[static_cast<std::size_t>(c)] = p;
  }
  return joint[1] / (joint[0] + joint[1]);
}

// Two-factor balanced layout y[i][j][k]: a levels, b levels, r replicates.
struct Grid2 {
  std::vector<std::vector<std::vector<double>>> y;
};

struct BruteAnova {
  double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_res = 0.0;
  double f_a = 0.0, f_b = 0.0, f_ab = 0.0;
};

// Textbook two-pass sums of squares; the interaction and residual terms are
// summed from their own deviations rather than obtained by subtraction.
inline BruteAnova brute_force_anova(const Grid2& g, bool interaction) {
  const std::size_t a = g.y.size(), b = g.y[0].size(), r = g.y[0][0].size();
  const double n = static_cast<double>(a * b * r);
  double grand = 0.0;
  for (const auto& row : g.y)
    for (const auto& cell : row)
      for (double v : cell) grand += v;
  grand /= n;
  std::vector<double> mean_a(a, 0.0), mean_b(b, 0.0);
  std::vector<std::vector<double>> mean_ab(a, std::vector<double>(b, 0.0));
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      for (double v : g.y[i][j]) {
        mean_a[i] += v / static_cast<double>(b * r);
        mean_b[j] += v / static_cast<double>(a * r);
        mean_ab[i][j] += v / static_cast<double>(r);
      }
  BruteAnova out;
  for (double m : mean_a) out.ss_a += static_cast<double>(b * r) * (m - grand) * (m - grand);
  for (double m : mean_b) out.ss_b += static_cast<double>(a * r) * (m - grand) * (m - grand);
  double ss_within = 0.0;
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      const double d = mean_ab[i][j] - mean_a[i] - mean_b[j] + grand;
      out.ss_ab += static_cast<double>(r) * d * d;
      for (double v : g.y[i][j]) ss_within += (v - mean_ab[i][j]) * (v - mean_ab[i][j]);
    }
  const double df_a = static_cast<double>(a - 1), df_b = static_cast<double>(b - 1);
  const double df_ab = df_a * df_b;
  double df_res = 0.0;
  if (interaction) {
    out.ss_res = ss_within;
    df_res = n - static_cast<double>(a * b);
  } else {
    out.ss_res = ss_within + out.ss_ab;
    df_res = n - 1.0 - df_a - df_b;
  }
  const double ms_res = out.ss_res / df_res;
  out.f_a = out.ss_a / df_a / ms_res;
  out.f_b = out.ss_b / df_b / ms_res;
  out.f_ab = out.ss_ab / df_ab / ms_res;
  return out;
}

inline Grid2 random_grid2(Rng& rng, std::size_t a, std::size_t b, std::size_t r) {
  Grid2 g;
  g.y.assign(a, std::vector<std::vector<double>>(b));
  std::vector<double> effect_a(a), effect_b(b);
  for (auto& e : effect_a) e = rng.normal();
  for (auto& e : effect_b) e = rng.normal();
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t k = 0; k < r; ++k) g.y[i][j].push_back(effect_a[i] + effect_b[j] + rng.normal());
  return g;
}

}  // namespace mcls::testing

#endif  // MCLS_TESTS_SUPPORT_HPP
