#include "mcls/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>
#include <tuple>

namespace mcls {

void SmoothedErrorConfig::validate() const {
  if (!(prior_alpha > 0.0) || !std::isfinite(prior_alpha)) throw Error("smoothing prior_alpha must be positive");
}

double smoothed_error(const Classifier& model, const Dataset& test, const SmoothedErrorConfig& cfg) {
  cfg.validate();
  if (test.empty()) throw Error("smoothed error of an empty test set");
  double total = 0.0;
  for (const auto& x : test.instances()) total += 1.0 - model.predict_proba(x)[x.label];
  return total / static_cast<double>(test.size());
}

double zero_one_error(const Classifier& model, const Dataset& test) {
  if (test.empty()) throw Error("zero-one error of an empty test set");
  std::size_t wrong = 0;
  for (const auto& x : test.instances()) wrong += model.predict(x) != x.label ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

HyperParams with_smoothing(HyperParams params, const SmoothedErrorConfig& cfg) {
  cfg.validate();
  params.tree.leaf_alpha = cfg.prior_alpha;
  params.nbc.alpha = cfg.prior_alpha;
  return params;
}

std::string system_members(const SystemSpec& system) {
  if (const auto* kind = std::get_if<ClassifierKind>(&system)) return std::string(to_string(*kind));
  return member_set_label(std::get<EnsembleSpec>(system).members);
}

std::size_t system_size(const SystemSpec& system) {
  if (std::holds_alternative<ClassifierKind>(system)) return 1;
  return std::get<EnsembleSpec>(system).members.size();
}

std::string system_architecture(const SystemSpec& system) {
  if (std::holds_alternative<ClassifierKind>(system)) return "single";
  return std::string(to_string(std::get<EnsembleSpec>(system).architecture));
}

std::string system_resampling(const SystemSpec& system) {
  if (std::holds_alternative<ClassifierKind>(system)) return "none";
  return std::string(to_string(std::get<EnsembleSpec>(system).resampling.kind));
}

bool cell_order(const ExperimentCell& a, const ExperimentCell& b) {
  return std::tie(a.size, a.members, a.architecture, a.resampling, a.replication, a.fold) <
         std::tie(b.size, b.members, b.architecture, b.resampling, b.replication, b.fold);
}

namespace {

ExperimentCell blank_cell(const SystemSpec& system, int replication, int fold) {
  ExperimentCell cell;
  cell.members = system_members(system);
  cell.size = system_size(system);
  cell.architecture = system_architecture(system);
  cell.resampling = system_resampling(system);
  cell.replication = replication;
  cell.fold = fold;
  return cell;
}

std::vector<std::size_t> merged_ids(const Dataset& a, const Dataset& b) {
  auto ids = a.ids();
  const auto more = b.ids();
  ids.insert(ids.end(), more.begin(), more.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

ExperimentCell run_cell(const SystemSpec& system, const Dataset& ds, const FoldAssignment& folds, int fold,
                        const SplitSpec& split, const ExperimentOptions& options, std::uint64_t seed,
                        CellAudit* audit) {
  if (fold < 0 || fold >= folds.k) throw Error("fold index " + std::to_string(fold) + " out of range");
  if (folds.fold_of.size() != ds.size()) throw Error("fold assignment does not cover the dataset");
  split.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto f = static_cast<std::uint64_t>(fold);

  const Dataset test = ds.subset(folds.rows_in(fold));
  if (!test.has_both_classes()) throw Error("fold " + std::to_string(fold) + " lacks a class");
  const Dataset rest = ds.subset(folds.rows_not_in(fold));
  const double train_share = split.train_fraction / (split.train_fraction + split.validation_fraction);
  const std::array<double, 2> fractions{train_share, 1.0 - train_share};
  const auto parts = partition_rows(rest, fractions, derive_seed(seed, {f, 1}), split.stratified);
  const Dataset train = rest.subset(parts[0]);
  const Dataset validation = rest.subset(parts[1]);
  if (!train.has_both_classes()) throw Error("training part of fold " + std::to_string(fold) + " lacks a class");

  HyperParams params = with_smoothing(options.params, options.smoothing);
  params.resample_seed = derive_seed(seed, {f, 3});
  ModelPtr model;
  std::vector<std::size_t> used;
  if (const auto* kind = std::get_if<ClassifierKind>(&system)) {
    model = train_member(*kind, train, validation, params);
    used = merged_ids(train, validation);
  } else {
    auto ensemble = train_ensemble(std::get<EnsembleSpec>(system), train, validation, params, derive_seed(seed, {f, 2}));
    used = ensemble->training_ids();
    model = std::move(ensemble);
  }

  ExperimentCell cell = blank_cell(system, options.replication, fold);
  cell.smoothed_error = smoothed_error(*model, test, options.smoothing);
  cell.zero_one_error = zero_one_error(*model, test);
  cell.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (audit) {
    audit->test_ids = test.ids();
    audit->training_ids = std::move(used);
  }
  return cell;
}

std::vector<ExperimentCell> run_experiment(const SystemSpec& system, const Dataset& ds, const FoldAssignment& folds,
                                           const SplitSpec& split, const ExperimentOptions& options,
                                           std::uint64_t seed) {
  if (const auto* spec = std::get_if<EnsembleSpec>(&system)) spec->validate();
  std::vector<ExperimentCell> cells;
  for (int f = 0; f < folds.k; ++f) cells.push_back(run_cell(system, ds, folds, f, split, options, seed));
  return cells;
}

void GridSpec::validate() const {
  if (member_sets.empty() && baselines.empty()) throw Error("grid has no systems to evaluate");
  if (!member_sets.empty() && (architectures.empty() || resamplings.empty())) {
    throw Error("grid needs at least one architecture and one resampling procedure");
  }
  if (replications < 1) throw Error("replications must be at least 1");
  if (folds < 2) throw Error("folds must be at least 2");
  if (workers < 1) throw Error("workers must be at least 1");
  if (locality_k < 1) throw Error("locality_k must be at least 1");
  resampling.validate();
  split.validate();
  smoothing.validate();
}

std::uint64_t cell_seed(std::uint64_t base_seed, const SystemSpec& system, int replication) {
  return derive_seed(base_seed, {hash_string(system_members(system)), hash_string(system_architecture(system)),
                                 hash_string(system_resampling(system)), static_cast<std::uint64_t>(replication)});
}

FoldAssignment replication_folds(const Dataset& ds, const GridSpec& grid, int replication) {
  return make_folds(ds, grid.folds, derive_seed(grid.base_seed, {hash_string("folds"), static_cast<std::uint64_t>(replication)}),
                    grid.split.stratified);
}

std::vector<SystemSpec> grid_systems(const GridSpec& grid) {
  std::vector<SystemSpec> systems(grid.baselines.begin(), grid.baselines.end());
  for (const auto& members : grid.member_sets) {
    for (auto architecture : grid.architectures) {
      for (auto kind : grid.resamplings) {
        EnsembleSpec spec;
        spec.members = members;
        spec.architecture = architecture;
        spec.resampling = grid.resampling;
        spec.resampling.kind = kind;
        spec.rule = grid.rule;
        spec.locality_k = grid.locality_k;
        spec.validate();
        systems.emplace_back(std::move(spec));
      }
    }
  }
  return systems;
}

std::vector<ExperimentCell> run_grid(const Dataset& ds, const GridSpec& grid, const GridProgress& progress) {
  grid.validate();
  const auto systems = grid_systems(grid);
  std::vector<FoldAssignment> folds;
  for (int r = 0; r < grid.replications; ++r) folds.push_back(replication_folds(ds, grid, r));

  const std::size_t per_system = static_cast<std::size_t>(grid.replications) * static_cast<std::size_t>(grid.folds);
  const std::size_t total = systems.size() * per_system;
  std::vector<ExperimentCell> cells(total);
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t t = next++; t < total; t = next++) {
      const auto& system = systems[t / per_system];
      const int rep = static_cast<int>((t % per_system) / static_cast<std::size_t>(grid.folds));
      const int fold = static_cast<int>(t % static_cast<std::size_t>(grid.folds));
      ExperimentOptions options{grid.params, grid.smoothing, rep};
      try {
        cells[t] = run_cell(system, ds, folds[static_cast<std::size_t>(rep)], fold, grid.split, options,
                            cell_seed(grid.base_seed, system, rep));
      } catch (const std::exception& e) {
        ExperimentCell failed = blank_cell(system, rep, fold);
        failed.smoothed_error = std::numeric_limits<double>::quiet_NaN();
        failed.zero_one_error = std::numeric_limits<double>::quiet_NaN();
        failed.status = std::string("failed: ") + e.what();
        cells[t] = std::move(failed);
      }
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(cells[t], ++done, total);
      }
    }
  };

  const auto count = std::min<std::size_t>(static_cast<std::size_t>(grid.workers), total);
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(cells.begin(), cells.end(), cell_order);
  return cells;
}

}  // namespace mcls
