#include <doctest.h>

#include <cmath>
#include <set>

#include "mcls/members.hpp"
#include "mcls/resampling.hpp"
#include "mcls/tree.hpp"
#include "support.hpp"

using namespace mcls;
using namespace mcls::testing;

namespace {

Dataset indexed(std::size_t n) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(static_cast<int>(i % 2));
  }
  return numeric_table(rows, labels);
}

double total(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

}  // namespace

TEST_CASE("bootstrap of a single row repeats it") {
  const Dataset one = numeric_table({{3.0}}, {1});
  const Dataset b = bootstrap_sample(one, 5);
  REQUIRE(b.size() == 1);
  CHECK(b[0] == one[0]);
  CHECK_THROWS_AS(bootstrap_sample(Dataset(one.features(), "label", {}), 1), Error);
}

TEST_CASE("bootstrap unique fraction matches 1 - (1 - 1/n)^n") {
  const std::size_t n = 1000;
  const Dataset ds = indexed(n);
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto ids = bootstrap_sample(ds, seed).ids();
    sum += static_cast<double>(std::set<std::size_t>(ids.begin(), ids.end()).size()) / static_cast<double>(n);
  }
  const double expected = 1.0 - std::pow(1.0 - 1.0 / static_cast<double>(n), static_cast<double>(n));
  CHECK(std::abs(sum / 200.0 - expected) < 0.02);
  CHECK(std::abs(sum / 200.0 - 0.632) < 0.02);
}

TEST_CASE("bootstrap and feature subsets are pure functions of the seed") {
  const Dataset ds = indexed(50);
  CHECK(bootstrap_sample(ds, 77) == bootstrap_sample(ds, 77));
  CHECK_FALSE(bootstrap_sample(ds, 77) == bootstrap_sample(ds, 78));
  Schema named;
  for (int j = 0; j < 6; ++j) named.push_back(FeatureSpec::numeric("x" + std::to_string(j)));
  CHECK(feature_subset(named, 0.5, 9) == feature_subset(named, 0.5, 9));
}

TEST_CASE("bootstrap keeps both classes") {
  std::vector<std::vector<double>> rows(20, {0.0});
  std::vector<int> labels(20, 0);
  labels[7] = 1;
  const Dataset ds = numeric_table(rows, labels);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset b = bootstrap_sample(ds, seed);
    CHECK(b.has_both_classes());
  }
}

TEST_CASE("weighted resampling follows the weights") {
  // Rows 2,3 are class 0 and rows 4,5 class 1, so the both-classes redraw
  // leaves the within-class odds at 1:3.
  const Dataset ds = numeric_table({{0}, {1}, {2}, {3}, {4}, {5}}, {0, 1, 0, 0, 1, 1});
  const std::vector<double> w{0.0, 0.0, 1.0, 3.0, 1.0, 3.0};
  std::array<double, 6> hits{};
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const Dataset r = weighted_resample(ds.with_weights(w), seed);
    CHECK(r.has_uniform_weights());
    for (auto id : r.ids()) hits[id] += 1.0;
  }
  CHECK(hits[0] == 0.0);
  CHECK(hits[1] == 0.0);
  CHECK(hits[3] / (hits[2] + hits[3]) == doctest::Approx(0.75).epsilon(0.05));
  CHECK(hits[5] / (hits[4] + hits[5]) == doctest::Approx(0.75).epsilon(0.05));
}

TEST_CASE("boost alpha closed form") {
  CHECK(boost_alpha(0.5) == 0.0);
  CHECK(boost_alpha(0.7) == 0.0);
  CHECK(std::abs(boost_alpha(0.1) - 0.5 * std::log(9.0)) < 1e-12);
  CHECK(std::abs(boost_alpha(0.3) - 0.5 * std::log(7.0 / 3.0)) < 1e-12);
  CHECK(boost_alpha(0.0) == doctest::Approx(0.5 * std::log((1.0 - 1e-6) / 1e-6)));
}

TEST_CASE("boost round at error one half leaves uniform weights") {
  const std::vector<int> truth{0, 1, 0, 1};
  const std::vector<int> pred{0, 1, 1, 0};
  const auto s = boost_round(BoostState::uniform(4), pred, truth);
  CHECK(s.alphas.back() == 0.0);
  for (double w : s.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("boost round with no error keeps uniform weights and caps alpha") {
  const std::vector<int> truth{0, 1, 1, 0, 1};
  const auto s = boost_round(BoostState::uniform(5), truth, truth);
  CHECK(s.alphas.back() == boost_alpha(0.0));
  for (double w : s.weights) CHECK(w == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("boost round with error 0.1 upweights the miss") {
  std::vector<int> truth(10, 1);
  std::vector<int> pred(10, 1);
  pred[3] = 0;
  const auto s = boost_round(BoostState::uniform(10), pred, truth);
  CHECK(std::abs(s.alphas.back() - 0.5 * std::log(9.0)) < 1e-12);
  CHECK(s.errors.back() == doctest::Approx(0.1));
  CHECK(s.weights[3] == doctest::Approx(0.5));
  CHECK(s.weights[0] == doctest::Approx(0.5 / 9.0));
  CHECK_THROWS_AS(boost_round(BoostState::uniform(10), std::vector<int>{1}, truth), Error);
}

TEST_CASE("boost weights stay a distribution over random rounds") {
  Rng rng(4);
  const std::size_t n = 25;
  std::vector<int> truth(n);
  for (auto& t : truth) t = static_cast<int>(rng.index(2));
  BoostState s = BoostState::uniform(n);
  for (int round = 0; round < 100; ++round) {
    const double flip = rng.uniform(0.0, 0.8);
    std::vector<int> pred(truth);
    for (auto& p : pred) {
      if (rng.uniform() < flip) p = 1 - p;
    }
    s = boost_round(std::move(s), pred, truth);
    CHECK(std::abs(total(s.weights) - 1.0) < 1e-9);
    for (double w : s.weights) CHECK(w >= 0.0);
    CHECK((s.alphas.back() > 0.0) == (s.errors.back() < 0.5));
  }
}

TEST_CASE("feature subset sizes and uniformity") {
  Schema six;
  for (int j = 0; j < 6; ++j) six.push_back(FeatureSpec::numeric("f" + std::to_string(j)));
  CHECK(feature_subset(six, 1.0, 3) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(feature_subset(six, 0.01, 3).size() == 1);
  std::array<int, 6> hits{};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto subset = feature_subset(six, 0.5, seed);
    REQUIRE(subset.size() == 3);
    CHECK(std::set<std::size_t>(subset.begin(), subset.end()).size() == 3);
    for (auto j : subset) ++hits[j];
  }
  for (int h : hits) CHECK(std::abs(h / 1000.0 - 0.5) <= 0.05);
  CHECK_THROWS_AS(feature_subset(Schema{}, 0.5, 1), Error);
  CHECK_THROWS_AS(feature_subset(six, 0.0, 1), Error);
}

TEST_CASE("stacking meta dataset shape and constant member column") {
  Schema s{FeatureSpec::categorical("flat", {"a", "b"}), FeatureSpec::numeric("x")};
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({0.0, static_cast<double>(i)});
    labels.push_back(i % 2);
  }
  const Dataset train = table(s, rows, labels);
  const auto folds = make_folds(train, 5, 1, true);
  const std::vector<ClassifierKind> members{ClassifierKind::nbc, ClassifierKind::dt};
  HyperParams params;
  const Dataset projected = train.project(std::vector<std::size_t>{0});
  const Dataset meta = stack_meta_dataset(members, projected, folds, projected, params);
  CHECK(meta.size() == 10);
  CHECK(meta.feature_count() == 2);
  CHECK(meta.labels() == train.labels());
  for (const auto& row : meta.instances()) CHECK(row.values[0] == 0.5);
}

TEST_CASE("stacking meta features are leakage free") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
      rows.push_back({rng.normal(), rng.normal()});
      labels.push_back(i % 2);
    }
    const Dataset train = numeric_table(rows, labels);
    const auto folds = make_folds(train, 3, rng.next(), true);
    StackingAudit audit;
    const std::vector<ClassifierKind> members{ClassifierKind::lgd, ClassifierKind::knn};
    stack_meta_dataset(members, train, folds, train, HyperParams{}, &audit);
    REQUIRE(audit.scored_by.size() == train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      CHECK(audit.scored_by[i] == folds.fold_of[i]);
      const auto& fitted = audit.fold_training_ids[static_cast<std::size_t>(audit.scored_by[i])];
      CHECK(std::find(fitted.begin(), fitted.end(), train[i].id) == fitted.end());
    }
  }
}

TEST_CASE("randomised configurations") {
  SUBCASE("deterministic per seed") {
    for (auto kind : kAllClassifierKinds) {
      const auto a = randomise_config(kind, 0.5, 11);
      const auto b = randomise_config(kind, 0.5, 11);
      CHECK(a.tree.random_top == b.tree.random_top);
      CHECK(a.tree.seed == b.tree.seed);
      CHECK(a.ann.seed == b.ann.seed);
      CHECK(a.knn.k_jitter == b.knn.k_jitter);
      CHECK(a.logistic.seed == b.logistic.seed);
      CHECK(a.nbc.alpha == b.nbc.alpha);
    }
  }
  SUBCASE("per-kind perturbations") {
    CHECK(randomise_config(ClassifierKind::dt, 0.5, 1).tree.random_top == 10);
    CHECK(randomise_config(ClassifierKind::dt, 1.0, 1).tree.random_top == 20);
    CHECK(randomise_config(ClassifierKind::lgd, 0.5, 1).logistic.subsample == 0.8);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const double a = randomise_config(ClassifierKind::nbc, 0.5, seed).nbc.alpha;
      CHECK(a >= 0.5);
      CHECK(a <= 2.0);
      const int j = randomise_config(ClassifierKind::knn, 0.5, seed).knn.k_jitter;
      CHECK(std::abs(j) <= 2);
    }
    CHECK_THROWS_AS(randomise_config(ClassifierKind::dt, 0.0, 1), Error);
  }
}

TEST_CASE("tree randomisation limit and divergence") {
  Schema s{FeatureSpec::categorical("a", {"n", "y"}), FeatureSpec::categorical("b", {"n", "y"}),
           FeatureSpec::numeric("noise")};
  Rng rng(13);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const int y = i % 2;
    rows.push_back({static_cast<double>(y), static_cast<double>(y), rng.normal()});
    labels.push_back(y);
  }
  const Dataset ds = table(s, rows, labels);

  const auto plain = train_tree(ds);
  const auto limit = train_tree(ds, randomise_config(ClassifierKind::dt, 1e-9, 5).tree);
  CHECK(limit->root().feature == plain->root().feature);
  CHECK(limit->nodes().size() == plain->nodes().size());

  std::set<int> roots;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    roots.insert(train_tree(ds, randomise_config(ClassifierKind::dt, 0.5, seed).tree)->root().feature);
  }
  CHECK(roots.size() >= 2);
}

TEST_CASE("resampling names and parameter checks") {
  for (auto kind : kAllResamplingKinds) CHECK(parse_resampling_kind(to_string(kind)) == kind);
  CHECK_THROWS_AS(parse_resampling_kind("jackknife"), Error);
  ResamplingParams p;
  p.subset_fraction = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p.subset_fraction = 0.5;
  p.boosting_rounds = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}
