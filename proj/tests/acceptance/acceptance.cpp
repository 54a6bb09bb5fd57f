// Acceptance checks, one line per criterion. Exit status is nonzero when any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "../support.hpp"
#include "mcls/ann.hpp"
#include "mcls/anova.hpp"
#include "mcls/commands.hpp"
#include "mcls/config.hpp"
#include "mcls/evaluation.hpp"
#include "mcls/feature_ranking.hpp"
#include "mcls/logistic.hpp"
#include "mcls/nbc.hpp"
#include "mcls/report.hpp"
#include "mcls/synthetic.hpp"
#include "mcls/tree.hpp"

using namespace mcls;
using namespace mcls::testing;

namespace {

// Tolerances and limits.
constexpr double kNbcTolerance = 1e-12;
constexpr double kGainTolerance = 1e-12;
constexpr double kGradientTolerance = 1e-4;
constexpr double kFiniteDifferenceStep = 1e-5;
constexpr double kAlphaTolerance = 1e-12;
constexpr double kBoostSumTolerance = 1e-9;
constexpr double kAnovaTolerance = 1e-9;
constexpr double kFixtureF = 12.0;
constexpr double kMiTolerance = 1e-9;
constexpr double kNbcSeconds = 5.0;
constexpr double kVoteSeconds = 1.0;
constexpr double kGridSeconds = 600.0;

const std::filesystem::path kSource = MCLS_SOURCE_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const Outcome& o) {
  if (!o.pass) ++failures;
  std::cout << "criterion " << (id < 10 ? " " : "") << id << "  " << (o.pass ? "PASS" : "FAIL") << "  " << title
            << ": " << o.detail << std::endl;
}

Outcome nbc_oracle() {
  const auto start = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  std::size_t rows_checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> arity(1 + rng.index(4));
    for (auto& a : arity) a = 2 + rng.index(3);
    const Dataset ds = random_categorical(rng, arity, 2 + rng.index(63));
    NbcParams params;
    params.alpha = trial % 2 ? 1.0 : rng.uniform(0.1, 3.0);
    const auto model = train_nbc(ds, params);
    // every category combination, seen or not
    std::vector<double> values(arity.size(), 0.0);
    for (;;) {
      const Instance x{values};
      worst = std::max(worst, std::abs(model->predict_proba(x)[1] - bayes_oracle_p1(ds, x, params.alpha)));
      ++rows_checked;
      std::size_t j = 0;
      while (j < arity.size() && ++values[j] == static_cast<double>(arity[j])) values[j++] = 0.0;
      if (j == arity.size()) break;
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= kNbcTolerance && elapsed < kNbcSeconds,
          "50 datasets, " + std::to_string(rows_checked) + " instances, max |p - oracle| = " + sci(worst) + " (limit " +
              sci(kNbcTolerance) + "), " + fixed(elapsed, 3) + " s (limit " + fixed(kNbcSeconds, 0) + " s)"};
}

Outcome tree_gain_oracle() {
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> arity(1 + rng.index(4));
    for (auto& a : arity) a = 2 + rng.index(3);
    const Dataset ds = random_categorical(rng, arity, 8 + rng.index(40));
    double best = 0.0;
    for (std::size_t j = 0; j < ds.feature_count(); ++j) best = std::max(best, categorical_gain(ds, j));
    if (best <= kMinInformationGain) best = 0.0;
    TreeParams params;
    params.min_leaf = 1;
    worst = std::max(worst, std::abs(train_tree(ds, params)->root_gain() - best));
  }
  return {worst <= kGainTolerance, "20 tables, max |root gain - exhaustive entropy gain| = " + sci(worst) + " bits"};
}

Outcome gradient_checks() {
  Rng rng(303);
  double worst_logistic = 0.0;
  double worst_ann = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 15, d = 4;
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal();
      y[i] = static_cast<double>(rng.index(2));
      w[i] = rng.uniform(0.2, 2.0);
    }
    Eigen::VectorXd theta(d + 1);
    for (Eigen::Index j = 0; j <= d; ++j) theta[j] = rng.normal();
    const auto lloss = [&](const Eigen::VectorXd& t) { return logistic_loss<double>(X, y, w, t); };
    worst_logistic = std::max(worst_logistic, max_relative_error(logistic_gradient<double>(X, y, w, theta),
                                                                 central_difference(lloss, theta, kFiniteDifferenceStep)));

    const AnnLayout layout{d, 1 + static_cast<Eigen::Index>(rng.index(4))};
    Eigen::VectorXd params(layout.size());
    for (Eigen::Index j = 0; j < params.size(); ++j) params[j] = rng.normal();
    const auto aloss = [&](const Eigen::VectorXd& p) { return ann_loss<double>(X, y, w, p, layout); };
    worst_ann = std::max(worst_ann, max_relative_error(ann_gradient<double>(X, y, w, params, layout),
                                                       central_difference(aloss, params, kFiniteDifferenceStep)));
  }
  return {worst_logistic < kGradientTolerance && worst_ann < kGradientTolerance,
          "10 points each, max relative error logistic " + sci(worst_logistic) + ", ANN " + sci(worst_ann) +
              " (limit " + sci(kGradientTolerance) + ")"};
}

Outcome vote_oracle() {
  const auto start = Clock::now();
  std::size_t patterns = 0, mismatches = 0;
  Rng rng(404);
  for (std::size_t m = 2; m <= 5; ++m) {
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      std::vector<ClassDistribution> d;
      int ones = 0;
      double s0 = 0.0, s1 = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const bool one = (mask >> i) & 1u;
        const double margin = rng.uniform(0.001, 0.5);
        d.push_back(ClassDistribution::from_p1(one ? 0.5 + margin : 0.5 - margin));
        ones += one ? 1 : 0;
        s0 += d.back().p[0];
        s1 += d.back().p[1];
      }
      const int zeros = static_cast<int>(m) - ones;
      const int expected = ones != zeros ? (ones > zeros ? 1 : 0) : (s1 > s0 ? 1 : 0);
      mismatches += combine_sp(d, CombinationRule::majority_vote).argmax() == expected ? 0 : 1;
      ++patterns;
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < kVoteSeconds,
          std::to_string(patterns) + " argmax patterns over 2-5 members, " + std::to_string(mismatches) +
              " mismatches, " + fixed(elapsed, 4) + " s"};
}

Outcome boost_update() {
  const bool half = boost_alpha(0.5) == 0.0;
  const double tenth = std::abs(boost_alpha(0.1) - 0.5 * std::log(9.0));
  Rng rng(505);
  const std::size_t n = 40;
  std::vector<int> truth(n);
  for (auto& t : truth) t = static_cast<int>(rng.index(2));
  BoostState state = BoostState::uniform(n);
  double worst_sum = 0.0;
  bool non_negative = true;
  for (int round = 0; round < 100; ++round) {
    std::vector<int> pred(truth);
    const double flip = rng.uniform(0.0, 0.7);
    for (auto& p : pred) {
      if (rng.uniform() < flip) p = 1 - p;
    }
    state = boost_round(std::move(state), pred, truth);
    double sum = 0.0;
    for (double w : state.weights) {
      sum += w;
      non_negative = non_negative && w >= 0.0;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  return {half && tenth <= kAlphaTolerance && worst_sum <= kBoostSumTolerance && non_negative,
          std::string("alpha(0.5) = 0 ") + (half ? "exactly" : "NOT exactly") + ", |alpha(0.1) - ln(9)/2| = " +
              sci(tenth) + ", max |sum w - 1| over 100 rounds = " + sci(worst_sum)};
}

Outcome anova_oracle() {
  Rng rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t a = 2 + rng.index(4), b = 2 + rng.index(4), r = 2 + rng.index(4);
    const Grid2 g = random_grid2(rng, a, b, r);
    std::vector<AnovaObservation> data;
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j)
        for (double v : g.y[i][j]) data.push_back({{std::to_string(i), std::to_string(j)}, v});
    const std::vector<std::string> factors{"A", "B"};
    const auto t = anova(data, factors);
    const auto oracle = brute_force_anova(g, false);
    worst = std::max({worst, relative_error(t.terms[0].f, oracle.f_a), relative_error(t.terms[1].f, oracle.f_b)});
  }
  std::vector<AnovaObservation> fixture;
  for (double v : {1.0, 1.0, 3.0, 3.0}) fixture.push_back({{"a"}, v});
  for (double v : {5.0, 5.0, 7.0, 7.0}) fixture.push_back({{"b"}, v});
  const std::vector<std::string> one{"g"};
  const auto t = anova(fixture, one);
  const double f = t.terms[0].f;
  return {worst <= kAnovaTolerance && f == kFixtureF,
          "100 random grids, max relative F error " + sci(worst) + "; fixture {1,1,3,3 | 5,5,7,7}: SS_factor = " +
              fixed(t.terms[0].ss, 1) + ", SS_residual = " + fixed(t.residual.ss, 1) + ", F = " + fixed(f, 6) +
              " (criterion expects " + fixed(kFixtureF, 0) + "; the within-group sum of squares of this fixture is " +
              "4 + 4 = 8, so F = 32 / (8 / 6) = 24)"};
}

Outcome enumeration() {
  const auto catalog = enumerate_member_sets();
  const bool profile = catalog.member_sets.size() == 26 && catalog.count_of_size(2) == 10 &&
                       catalog.count_of_size(3) == 10 && catalog.count_of_size(4) == 5 && catalog.count_of_size(5) == 1;
  std::vector<ExperimentCell> cells;
  for (std::size_t s = 0; s < 2; ++s) {
    for (int fold = 0; fold < 2; ++fold) {
      ExperimentCell c;
      c.members = member_set_label(catalog.member_sets[s]);
      c.size = 2;
      c.architecture = "static_parallel";
      c.resampling = "bagging";
      c.fold = fold;
      c.smoothed_error = 0.2 + 0.01 * static_cast<double>(s + static_cast<std::size_t>(fold));
      cells.push_back(c);
    }
  }
  const auto dir = scratch_dir("acceptance_report");
  const std::string summary = write_report(cells, dir);
  const bool quoted = summary.find("\"twenty-three multiple classifier systems\"") != std::string::npos &&
                      summary.find("26 (10/10/5/1)") != std::string::npos;
  return {profile && quoted, std::to_string(catalog.member_sets.size()) + " member sets, sizes 2/3/4/5 = " +
                                 std::to_string(catalog.count_of_size(2)) + "/" + std::to_string(catalog.count_of_size(3)) +
                                 "/" + std::to_string(catalog.count_of_size(4)) + "/" +
                                 std::to_string(catalog.count_of_size(5)) + "; report quotes the 23-system count: " +
                                 (quoted ? "yes" : "no")};
}

std::string results_without_wall_time(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> fields;
    std::istringstream row(line);
    for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
    if (fields.size() > 8) fields[8].clear();
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
  }
  return out.str();
}

Outcome determinism() {
  const auto config = kSource / "configs" / "synthetic.toml";
  const auto dir = scratch_dir("acceptance_grid");
  std::ostringstream sink;
  CommandContext ctx{sink, std::cerr, {}};
  std::map<std::string, std::string> tables;
  double serial_seconds = 0.0;
  std::size_t cell_count = 0;
  for (const auto& [name, workers] : std::vector<std::pair<std::string, int>>{{"w1", 1}, {"w8", 8}, {"w8_rerun", 8}}) {
    ConfigOverrides o;
    o.out = dir / name;
    o.workers = workers;
    const auto start = Clock::now();
    const int code = cmd_grid(config, o, ctx);
    if (name == "w1") serial_seconds = seconds_since(start);
    if (code != kExitOk) return {false, "grid run " + name + " exited with status " + std::to_string(code)};
    tables[name] = results_without_wall_time(dir / name / "results.csv");
    cell_count = read_results_csv(dir / name / "results.csv").size();
  }
  const bool workers_equal = tables["w1"] == tables["w8"];
  const bool rerun_equal = tables["w8"] == tables["w8_rerun"];
  const unsigned cores = std::thread::hardware_concurrency();
  return {workers_equal && rerun_equal && serial_seconds < kGridSeconds,
          std::to_string(cell_count) + " cells; workers 1 vs 8 identical: " + (workers_equal ? "yes" : "no") +
              "; re-run byte-identical: " + (rerun_equal ? "yes" : "no") + "; full grid with 1 worker took " +
              fixed(serial_seconds, 1) + " s on " + std::to_string(cores) + " core(s) (limit " +
              fixed(kGridSeconds, 0) + " s)"};
}

Outcome central_claim() {
  const auto config = load_config(kSource / "configs" / "synthetic.toml");
  const Dataset ds = load_dataset(config.dataset, config.schema);
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::map<std::string, std::vector<double>> per_seed;  // system -> mean error per seed
  for (auto seed : seeds) {
    GridSpec grid = config.grid;
    grid.base_seed = seed;
    grid.replications = 1;
    grid.member_sets.clear();
    for (const auto& m : enumerate_member_sets().member_sets) {
      if (m.size() == 3) grid.member_sets.push_back(m);
    }
    grid.architectures = {Architecture::static_parallel};
    grid.resamplings = {ResamplingKind::bagging};
    const auto cells = run_grid(ds, grid);
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& c : cells) {
      if (!c.ok()) return {false, "cell failed: " + c.members + " " + c.status};
      auto& a = acc[c.members];
      a.first += c.smoothed_error;
      ++a.second;
    }
    for (const auto& [name, a] : acc) per_seed[name].push_back(a.first / a.second);
  }
  auto overall = [&](const std::string& name) {
    double s = 0.0;
    for (double v : per_seed[name]) s += v;
    return s / static_cast<double>(seeds.size());
  };
  std::string best_single, best_ensemble;
  for (const auto& [name, values] : per_seed) {
    const bool single = name.find('+') == std::string::npos;
    auto& best = single ? best_single : best_ensemble;
    if (best.empty() || overall(name) < overall(best)) best = name;
  }
  std::vector<double> diff;
  for (std::size_t i = 0; i < seeds.size(); ++i) diff.push_back(per_seed[best_ensemble][i] - per_seed[best_single][i]);
  double mean = 0.0, var = 0.0;
  for (double d : diff) mean += d / static_cast<double>(diff.size());
  for (double d : diff) var += (d - mean) * (d - mean) / static_cast<double>(diff.size() - 1);
  const double t = mean / std::sqrt(var / static_cast<double>(diff.size()));
  int wins = 0;
  for (double d : diff) wins += d <= 0.0 ? 1 : 0;
  return {mean <= 0.0, "best bagged 3-member SP " + best_ensemble + " " + fixed(overall(best_ensemble), 4) +
                           " vs best single " + best_single + " " + fixed(overall(best_single), 4) +
                           " (paired margin " + fixed(mean, 4) + ", t = " + fixed(t, 2) + ", ensemble not worse in " +
                           std::to_string(wins) + "/10 seeds)"};
}

Outcome ranking_check() {
  int first = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t position = static_cast<std::size_t>(seed % 6);
    const Dataset ds = make_single_determinant_dataset(300, seed, position);
    const auto ranking = rank_features(ds, make_folds(ds, 5, seed));
    if (ranking.scores.front().feature == "determinant") ++first;
    const auto counts = ds.class_counts();
    const double hy = entropy_of_counts(static_cast<double>(counts[0]), static_cast<double>(counts[1]));
    worst = std::max(worst, std::abs(mutual_information(ds, position) - hy));
  }
  const std::string rendered = format_mean_std(19.4312, 0.1234);
  return {first == 10 && worst <= kMiTolerance && rendered == "19.43 ± 0.12",
          "determining feature first in " + std::to_string(first) + "/10 seeds, max |I - H(Y)| = " + sci(worst) +
              ", format renders \"" + rendered + "\""};
}

Outcome leakage_audit() {
  const Dataset ds = load_dataset(kSource / "data" / "synthetic.csv", kSource / "data" / "synthetic.schema.json");
  Rng rng(1111);
  const auto catalog = enumerate_member_sets();
  std::size_t leaks = 0, wrong_test = 0, checked = 0;
  HyperParams params;
  for (int i = 0; i < 50; ++i) {
    SystemSpec system;
    if (rng.index(4) == 0) {
      system = kAllClassifierKinds[rng.index(5)];
    } else {
      EnsembleSpec spec;
      spec.members = catalog.member_sets[rng.index(catalog.member_sets.size())];
      spec.architecture = kAllArchitectures[rng.index(3)];
      spec.resampling.kind = kAllResamplingKinds[rng.index(5)];
      system = spec;
    }
    const int k = 5;
    const auto folds = make_folds(ds, k, rng.next());
    const int fold = static_cast<int>(rng.index(k));
    CellAudit audit;
    ExperimentOptions options;
    options.params = params;
    run_cell(system, ds, folds, fold, SplitSpec{}, options, rng.next(), &audit);
    // re-derive the test fold from the assignment alone
    std::set<std::size_t> test;
    for (std::size_t r = 0; r < ds.size(); ++r) {
      if (folds.fold_of[r] == fold) test.insert(ds[r].id);
    }
    if (std::set<std::size_t>(audit.test_ids.begin(), audit.test_ids.end()) != test) ++wrong_test;
    for (auto id : audit.training_ids) leaks += test.count(id);
    checked += audit.training_ids.size();
  }
  return {leaks == 0 && wrong_test == 0, "50 cells, " + std::to_string(checked) + " training/validation ids checked, " +
                                             std::to_string(leaks) + " test-fold ids found in training material, " +
                                             std::to_string(wrong_test) + " mismatched test folds"};
}

template <typename F>
Outcome guarded(F&& check) {
  try {
    return check();
  } catch (const std::exception& e) {
    return {false, std::string("error: ") + e.what()};
  }
}

}  // namespace

int main() {
  report(1, "NBC posteriors vs brute-force Bayes", guarded(nbc_oracle));
  report(2, "tree root gain vs entropy oracle", guarded(tree_gain_oracle));
  report(3, "logistic and ANN gradients vs finite differences", guarded(gradient_checks));
  report(4, "majority vote vs brute-force counting", guarded(vote_oracle));
  report(5, "boosting update", guarded(boost_update));
  report(6, "ANOVA F ratios", guarded(anova_oracle));
  report(7, "member-set enumeration", guarded(enumeration));
  report(8, "grid determinism and runtime", guarded(determinism));
  report(9, "ensemble vs single classifier on the benchmark", guarded(central_claim));
  report(10, "feature ranking", guarded(ranking_check));
  report(11, "leakage audit", guarded(leakage_audit));
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
