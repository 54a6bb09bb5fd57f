#ifndef MCLS_ENSEMBLE_HPP
#define MCLS_ENSEMBLE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcls/classifier.hpp"
#include "mcls/encoding.hpp"
#include "mcls/members.hpp"
#include "mcls/resampling.hpp"

namespace mcls {

enum class Architecture { static_parallel, multi_stage, dynamic_selection };

inline constexpr std::array<Architecture, 3> kAllArchitectures = {
    Architecture::static_parallel, Architecture::multi_stage, Architecture::dynamic_selection};

std::string_view to_string(Architecture architecture);
Architecture parse_architecture(std::string_view name);

enum class CombinationRule { majority_vote, weighted_majority, sum, product, min, max };

std::string_view to_string(CombinationRule rule);
CombinationRule parse_combination_rule(std::string_view name);

using MemberSet = std::vector<ClassifierKind>;

/// "ANN+DT+kNN" style label.
std::string member_set_label(std::span<const ClassifierKind> members);
MemberSet parse_member_set(std::string_view label);

struct EnsembleSpec {
  MemberSet members;
  Architecture architecture = Architecture::static_parallel;
  ResamplingParams resampling;
  CombinationRule rule = CombinationRule::majority_vote;
  int locality_k = 5;

  /// Throws Error unless there are 2-5 distinct members and valid parameters.
  void validate() const;
};

/// Every member set of size 2-5 over the five kinds: 10 + 10 + 5 + 1 = 26.
struct EnsembleCatalog {
  std::vector<MemberSet> member_sets;

  std::size_t count_of_size(std::size_t size) const;
};

/// Ordered by size, then lexicographically by catalog position.
EnsembleCatalog enumerate_member_sets();

/// Static-parallel combination of member posteriors. `weights` must be given
/// exactly when the rule is weighted_majority. Vote ties fall back to the
/// summed posteriors, whose own tie resolves to class 0.
ClassDistribution combine_sp(std::span<const ClassDistribution> distributions, CombinationRule rule,
                             std::span<const double> weights = {});

struct EnsemblePrediction {
  ClassDistribution distribution;
  int selected_member = -1;  // dynamic selection only
};

class EnsembleModel final : public Classifier {
 public:
  /// Retained validation data for dynamic selection.
  struct Referee {
    Encoder encoder;
    Eigen::MatrixXd unit_rows;
    std::vector<std::vector<std::uint8_t>> correct;  // [member][validation row]
    std::vector<double> global_accuracy;
  };

  EnsembleModel(Schema features, EnsembleSpec spec, std::vector<ModelPtr> members, std::vector<double> weights,
                std::optional<Referee> referee, ModelPtr meta_learner, bool degenerate,
                std::vector<std::size_t> training_ids = {});

  std::string_view type() const override { return "ensemble"; }

  const EnsembleSpec& spec() const { return spec_; }
  const std::vector<ModelPtr>& members() const { return members_; }

  /// Multi-stage: alpha per stage. Weighted majority: validation accuracy per member.
  const std::vector<double>& weights() const { return weights_; }
  const std::optional<Referee>& referee() const { return referee_; }
  const ModelPtr& meta_learner() const { return meta_learner_; }

  /// Multi-stage with every alpha zero; prediction falls back to plain majority.
  bool degenerate() const { return degenerate_; }

  /// Sorted ids of every instance used for fitting, tuning or refereeing.
  const std::vector<std::size_t>& training_ids() const { return training_ids_; }

  std::vector<ClassDistribution> member_distributions(const Instance& x) const;
  EnsemblePrediction predict_detailed(const Instance& x) const;

  /// Member with the best accuracy over the `locality_k` cosine-nearest
  /// validation rows; ties go to global accuracy, then to the lowest index.
  int select_member(const Instance& x, int locality_k) const;

  nlohmann::json to_json() const override;
  static std::shared_ptr<const EnsembleModel> from_json(const nlohmann::json& doc);

 protected:
  ClassDistribution predict_checked(const Instance& x) const override;

 private:
  ClassDistribution combine(const std::vector<ClassDistribution>& dists, const Instance& x, int* selected) const;

  EnsembleSpec spec_;
  std::vector<ModelPtr> members_;
  std::vector<double> weights_;
  std::optional<Referee> referee_;
  ModelPtr meta_learner_;
  bool degenerate_;
  std::vector<std::size_t> training_ids_;
};

using EnsemblePtr = std::shared_ptr<const EnsembleModel>;

EnsemblePtr train_static_parallel(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                                  const HyperParams& params, std::uint64_t seed);
EnsemblePtr train_multi_stage(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                              const HyperParams& params, std::uint64_t seed);
EnsemblePtr train_dynamic_selection(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                                    const HyperParams& params, std::uint64_t seed);

/// Dispatches on spec.architecture.
EnsemblePtr train_ensemble(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                           const HyperParams& params, std::uint64_t seed);

inline int dcs_select(const EnsembleModel& model, const Instance& x, int locality_k) {
  return model.select_member(x, locality_k);
}

inline ClassDistribution predict_ensemble(const EnsembleModel& model, const Instance& x) {
  return model.predict_proba(x);
}

nlohmann::json spec_to_json(const EnsembleSpec& spec);
EnsembleSpec spec_from_json(const nlohmann::json& doc);

}  // namespace mcls

#endif  // MCLS_ENSEMBLE_HPP
