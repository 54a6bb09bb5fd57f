#ifndef MCLS_EVALUATION_HPP
#define MCLS_EVALUATION_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "mcls/ensemble.hpp"

namespace mcls {

struct SmoothedErrorConfig {
  /// Dirichlet prior strength handed to the frequency-based learners
  /// (tree leaves and naive Bayes tables).
  double prior_alpha = 1.0;

  void validate() const;
};

/// Mean over `test` of 1 - p(true class | x).
double smoothed_error(const Classifier& model, const Dataset& test, const SmoothedErrorConfig& cfg = {});

/// Fraction misclassified by argmax (ties to class 0).
double zero_one_error(const Classifier& model, const Dataset& test);

/// Applies the smoothing prior to the learners that consume it.
HyperParams with_smoothing(HyperParams params, const SmoothedErrorConfig& cfg);

/// A single classifier or an ensemble specification.
using SystemSpec = std::variant<ClassifierKind, EnsembleSpec>;

std::string system_members(const SystemSpec& system);
std::size_t system_size(const SystemSpec& system);
std::string system_architecture(const SystemSpec& system);  // "single" for baselines
std::string system_resampling(const SystemSpec& system);    // "none" for baselines

struct ExperimentCell {
  std::string members;
  std::size_t size = 0;
  std::string architecture;
  std::string resampling;
  int replication = 0;
  int fold = 0;
  double smoothed_error = 0.0;
  double zero_one_error = 0.0;
  double wall_time_s = 0.0;
  std::string status = "ok";  // "ok" or "failed: <reason>"

  bool ok() const { return status == "ok"; }
};

/// Cell ordering used for every persisted table.
bool cell_order(const ExperimentCell& a, const ExperimentCell& b);

/// Instance ids seen by one cell, for the leakage audit.
struct CellAudit {
  std::vector<std::size_t> test_ids;
  std::vector<std::size_t> training_ids;  // sorted; fitting, tuning and refereeing material
};

struct ExperimentOptions {
  HyperParams params;
  SmoothedErrorConfig smoothing;
  int replication = 0;
};

/// Evaluates `system` on fold `fold`: the fold is the test set and the rest
/// is re-split into train and validation in the ratio of `split`.
ExperimentCell run_cell(const SystemSpec& system, const Dataset& ds, const FoldAssignment& folds, int fold,
                        const SplitSpec& split, const ExperimentOptions& options, std::uint64_t seed,
                        CellAudit* audit = nullptr);

/// One cell per fold.
std::vector<ExperimentCell> run_experiment(const SystemSpec& system, const Dataset& ds, const FoldAssignment& folds,
                                           const SplitSpec& split, const ExperimentOptions& options,
                                           std::uint64_t seed);

struct GridSpec {
  std::vector<MemberSet> member_sets;
  std::vector<Architecture> architectures;
  std::vector<ResamplingKind> resamplings;
  std::vector<ClassifierKind> baselines{kAllClassifierKinds.begin(), kAllClassifierKinds.end()};
  int replications = 1;
  int folds = 5;
  std::uint64_t base_seed = 0;
  ResamplingParams resampling;  // kind is overwritten per cell
  CombinationRule rule = CombinationRule::majority_vote;
  int locality_k = 5;
  SplitSpec split;
  HyperParams params;
  SmoothedErrorConfig smoothing;
  int workers = 1;

  void validate() const;
};

/// Seed of the system under `replication`; run_cell mixes in the fold.
std::uint64_t cell_seed(std::uint64_t base_seed, const SystemSpec& system, int replication);

/// Fold assignment of one replication.
FoldAssignment replication_folds(const Dataset& ds, const GridSpec& grid, int replication);

/// Every system of the grid: baselines first, then the factorial product.
std::vector<SystemSpec> grid_systems(const GridSpec& grid);

/// Called once per finished cell, serialized across workers.
using GridProgress = std::function<void(const ExperimentCell& cell, std::size_t done, std::size_t total)>;

/// Runs the whole factorial grid; failed cells are kept with their status.
/// The result is sorted by cell_order and independent of the worker count.
std::vector<ExperimentCell> run_grid(const Dataset& ds, const GridSpec& grid, const GridProgress& progress = {});

}  // namespace mcls

#endif  // MCLS_EVALUATION_HPP
