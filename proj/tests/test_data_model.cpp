#include <doctest.h>

#include <fstream>
#include <set>

#include "mcls/dataset.hpp"
#include "mcls/synthetic.hpp"
#include "support.hpp"

using namespace mcls;
using mcls::testing::numeric_table;
using mcls::testing::scratch_dir;

namespace {

Dataset balanced(std::size_t n) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(static_cast<int>(i % 2));
  }
  return numeric_table(rows, labels);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

const char* kTwoFeatureSchema =
    R"({"label": "y", "features": [{"name": "a", "kind": "numeric"},)"
    R"( {"name": "b", "kind": "categorical", "categories": ["lo", "hi"]}]})";

}  // namespace

TEST_CASE("schema validation rejects malformed feature lists") {
  CHECK_THROWS_WITH_AS(validate_schema(Schema{FeatureSpec::numeric("a"), FeatureSpec::numeric("a")}),
                       doctest::Contains("duplicate feature name"), Error);
  CHECK_THROWS_AS(validate_schema(Schema{FeatureSpec::categorical("c", {"only"})}), Error);
  CHECK_THROWS_AS(validate_schema(Schema{{"n", FeatureKind::numeric, {"x", "y"}}}), Error);
  CHECK_NOTHROW(validate_schema(Schema{FeatureSpec::categorical("c", {"p", "q"})}));
}

TEST_CASE("instances are checked against the schema") {
  Schema s{FeatureSpec::numeric("a"), FeatureSpec::categorical("b", {"p", "q"})};
  CHECK_NOTHROW(check_instance(s, Instance{{0.5, 1.0}}));
  CHECK_THROWS_WITH_AS(check_instance(s, Instance{{0.5, 2.0}}), doctest::Contains("'b'"), Error);
  CHECK_THROWS_AS(check_instance(s, Instance{{0.5}}), Error);
  CHECK_THROWS_AS(Dataset(s, "label", {Instance{{0.0, 0.0}, 2}}), Error);
}

TEST_CASE("largest remainder sizes") {
  const std::array<double, 3> f{0.6, 0.3, 0.1};
  CHECK(largest_remainder_sizes(100, f) == std::vector<std::size_t>{60, 30, 10});
  CHECK(largest_remainder_sizes(10, f) == std::vector<std::size_t>{6, 3, 1});
  const std::array<double, 2> halves{0.5, 0.5};
  CHECK(largest_remainder_sizes(7, halves) == std::vector<std::size_t>{4, 3});
}

TEST_CASE("train/validation/test split sizes and disjointness") {
  for (std::size_t n : {100u, 10u}) {
    const Dataset ds = balanced(n);
    SplitSpec spec;
    spec.seed = 7;
    const auto parts = split_train_val_test(ds, spec);
    CHECK(parts.train.size() == n * 6 / 10);
    CHECK(parts.validation.size() == n * 3 / 10);
    CHECK(parts.test.size() == n / 10);

    std::set<std::size_t> seen;
    for (const auto* part : {&parts.train, &parts.validation, &parts.test}) {
      for (auto id : part->ids()) CHECK(seen.insert(id).second);
    }
    CHECK(seen.size() == n);

    const auto again = split_train_val_test(ds, spec);
    CHECK(again.train == parts.train);
    CHECK(again.validation == parts.validation);
    CHECK(again.test == parts.test);
  }
}

TEST_CASE("stratified split keeps class shares within one instance") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 20 + rng.index(80);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back({rng.normal()});
      labels.push_back(i < 2 ? static_cast<int>(i) : (rng.uniform() < 0.3 ? 1 : 0));
    }
    const Dataset ds = numeric_table(rows, labels);
    SplitSpec spec;
    spec.seed = rng.next();
    const auto parts = split_train_val_test(ds, spec);
    const double share1 = static_cast<double>(ds.class_counts()[1]) / static_cast<double>(n);
    for (const auto* part : {&parts.train, &parts.validation, &parts.test}) {
      const double expected = share1 * static_cast<double>(part->size());
      CHECK(std::abs(static_cast<double>(part->class_counts()[1]) - expected) <= 1.0);
    }
  }
}

TEST_CASE("split rejects bad fractions") {
  SplitSpec spec;
  spec.train_fraction = 0.65;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.train_fraction = -0.1;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("fold sizes") {
  SUBCASE("exact division") {
    const auto folds = make_folds(balanced(10), 5, 3);
    CHECK(folds.sizes() == std::vector<std::size_t>(5, 2));
  }
  SUBCASE("remainder") {
    auto sizes = make_folds(balanced(11), 5, 3).sizes();
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{2, 2, 2, 2, 3});
  }
  SUBCASE("stratified class counts") {
    const Dataset ds = balanced(20);
    const auto folds = make_folds(ds, 5, 99, true);
    for (int f = 0; f < 5; ++f) {
      std::array<int, 2> count{0, 0};
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (folds.fold_of[i] == f) ++count[static_cast<std::size_t>(ds[i].label)];
      }
      CHECK(count[0] == 2);
      CHECK(count[1] == 2);
    }
  }
  SUBCASE("too many folds") { CHECK_THROWS_AS(make_folds(balanced(4), 5, 1), Error); }
}

TEST_CASE("folds are exhaustive, balanced and reproducible") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 10 + rng.index(90);
    const int k = 2 + static_cast<int>(rng.index(9));
    const bool stratified = trial % 2 == 0;
    const Dataset ds = balanced(n);
    const auto seed = rng.next();
    const auto folds = make_folds(ds, k, seed, stratified);
    REQUIRE(folds.fold_of.size() == n);
    const auto sizes = folds.sizes();
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
    for (int f = 0; f < k; ++f) CHECK(folds.rows_in(f).size() + folds.rows_not_in(f).size() == n);
    CHECK(make_folds(ds, k, seed, stratified).fold_of == folds.fold_of);
  }
}

TEST_CASE("CSV round trip reproduces the dataset") {
  const auto dir = scratch_dir("roundtrip");
  Schema s{FeatureSpec::numeric("a"), FeatureSpec::categorical("b", {"lo", "hi"})};
  std::vector<Instance> rows{{{0.1, 0.0}, 0, 1.0, 0}, {{-2.5e-7, 1.0}, 1, 1.0, 1},
                             {{1.0 / 3.0, 1.0}, 0, 1.0, 2}, {{1e300, 0.0}, 1, 1.0, 3}};
  const Dataset ds(s, "y", rows);
  save_dataset(ds, dir / "d.csv", dir / "d.json");
  const Dataset back = load_dataset(dir / "d.csv", dir / "d.json");
  CHECK(back == ds);
  CHECK(back.size() == 4);
  CHECK(back.feature_count() == 2);

  const Dataset bench = make_behavioural_dataset(40, 1);
  save_dataset(bench, dir / "b.csv", dir / "b.json");
  const Dataset bench_back = load_dataset(dir / "b.csv", dir / "b.json");
  CHECK(bench_back.feature_count() == 6);
  CHECK(bench_back == bench);
}

TEST_CASE("loading reports bad input") {
  const auto dir = scratch_dir("load_errors");
  write_text(dir / "s.json", kTwoFeatureSchema);

  write_text(dir / "empty.csv", "a,b,y\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir / "empty.csv", dir / "s.json"), doctest::Contains("empty dataset"), Error);
  LoadOptions lenient;
  lenient.allow_empty = true;
  CHECK(load_dataset(dir / "empty.csv", dir / "s.json", lenient).empty());

  write_text(dir / "nolabel.csv", "a,b\n1,lo\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir / "nolabel.csv", dir / "s.json"), doctest::Contains("label column"), Error);

  write_text(dir / "badcat.csv", "a,b,y\n1,mid,0\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir / "badcat.csv", dir / "s.json"), doctest::Contains("unknown category"), Error);

  write_text(dir / "badnum.csv", "a,b,y\n1,lo,0\nx,hi,1\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir / "badnum.csv", dir / "s.json"), doctest::Contains("row 2"), Error);

  write_text(dir / "missing.csv", "a,b,y\n,lo,0\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir / "missing.csv", dir / "s.json"), doctest::Contains("missing value"), Error);

  write_text(dir / "blank.csv", "");
  CHECK_THROWS_AS(load_dataset(dir / "blank.csv", dir / "s.json"), Error);

  write_text(dir / "dup.json",
             R"({"label": "y", "features": [{"name": "a", "kind": "numeric"}, {"name": "a", "kind": "numeric"}]})");
  CHECK_THROWS_WITH_AS(load_schema(dir / "dup.json"), doctest::Contains("duplicate"), Error);
}

TEST_CASE("weights and subsets keep ids") {
  const Dataset ds = balanced(6);
  const std::vector<std::size_t> rows{5, 5, 0};
  const Dataset sub = ds.subset(rows);
  CHECK(sub.ids() == std::vector<std::size_t>{5, 5, 0});
  const std::vector<double> w{0.0, 2.0, 1.0};
  CHECK(sub.with_weights(w).total_weight() == doctest::Approx(3.0));
  CHECK_THROWS_AS(sub.with_weights(std::vector<double>{0.0, 0.0, 0.0}), Error);
}
