#ifndef MCLS_RESAMPLING_HPP
#define MCLS_RESAMPLING_HPP

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mcls/dataset.hpp"
#include "mcls/members.hpp"

namespace mcls {

enum class ResamplingKind { bagging, boosting, stacking, feature_subset, randomisation };

inline constexpr std::array<ResamplingKind, 5> kAllResamplingKinds = {
    ResamplingKind::bagging, ResamplingKind::boosting, ResamplingKind::stacking, ResamplingKind::feature_subset,
    ResamplingKind::randomisation};

std::string_view to_string(ResamplingKind kind);
ResamplingKind parse_resampling_kind(std::string_view name);

struct ResamplingParams {
  ResamplingKind kind = ResamplingKind::bagging;
  double subset_fraction = 0.5;  // feature_subset
  int boosting_rounds = 1;       // rounds per member
  ClassifierKind meta_learner = ClassifierKind::lgd;  // stacking
  int stacking_folds = 5;
  double strength = 0.5;  // randomisation

  void validate() const;
};

/// Same-size sample drawn uniformly with replacement. When the input holds
/// both classes the sample is redrawn (up to 10 attempts) until it does too.
Dataset bootstrap_sample(const Dataset& ds, std::uint64_t seed);

/// Same-size sample drawn with probability proportional to instance weight;
/// the result carries uniform weights.
Dataset weighted_resample(const Dataset& ds, std::uint64_t seed);

/// Epsilon used to cap alpha when a round makes no weighted error.
inline constexpr double kBoostErrorFloor = 1e-6;

/// AdaBoost.M1 member weight: 1/2 ln((1 - e) / e), 0 for e >= 0.5, capped at e = 1e-6.
double boost_alpha(double weighted_error);

struct BoostState {
  std::vector<double> weights;
  std::vector<double> alphas;
  std::vector<double> errors;

  static BoostState uniform(std::size_t n);
};

/// One AdaBoost.M1 update. Misclassified weights scale by exp(alpha),
/// correct ones by exp(-alpha), then renormalize; e >= 0.5 resets to uniform.
BoostState boost_round(BoostState state, std::span<const int> predictions, std::span<const int> truth);

/// ceil(fraction * n) distinct feature indices, sorted ascending.
std::vector<std::size_t> feature_subset(std::span<const FeatureSpec> features, double fraction, std::uint64_t seed);

/// Bookkeeping for the stacking leakage audit.
struct StackingAudit {
  /// Instance ids each fold model was trained on, indexed by fold.
  std::vector<std::vector<std::size_t>> fold_training_ids;
  /// Fold whose model scored each training row.
  std::vector<int> scored_by;
};

/// Meta dataset whose features are the out-of-fold class-1 posteriors of
/// each member kind, one numeric column per member, labels copied.
/// `validation` is handed to the learners that tune on it (k-NN, ANN).
Dataset stack_meta_dataset(std::span<const ClassifierKind> members, const Dataset& train, const FoldAssignment& folds,
                           const Dataset& validation, const HyperParams& params, StackingAudit* audit = nullptr);

/// Meta-feature column name for a member position.
std::string meta_feature_name(std::size_t position, ClassifierKind kind);

/// Training configuration with classifier-internal randomness injected.
HyperParams randomise_config(ClassifierKind kind, double strength, std::uint64_t seed, const HyperParams& base = {});

}  // namespace mcls

#endif  // MCLS_RESAMPLING_HPP
