#include "mcls/resampling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace mcls {

std::string_view to_string(ResamplingKind kind) {
  switch (kind) {
    case ResamplingKind::bagging: return "bagging";
    case ResamplingKind::boosting: return "boosting";
    case ResamplingKind::stacking: return "stacking";
    case ResamplingKind::feature_subset: return "feature_subset";
    case ResamplingKind::randomisation: return "randomisation";
  }
  return "?";
}

ResamplingKind parse_resampling_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "randomization") lower = "randomisation";
  if (lower == "feature_selection" || lower == "feature-subset") lower = "feature_subset";
  for (auto kind : kAllResamplingKinds) {
    if (to_string(kind) == lower) return kind;
  }
  throw Error("unknown resampling procedure '" + std::string(name) + "'");
}

void ResamplingParams::validate() const {
  if (!(subset_fraction > 0.0 && subset_fraction <= 1.0)) throw Error("feature subset fraction must lie in (0, 1]");
  if (boosting_rounds < 1) throw Error("boosting rounds must be at least 1");
  if (stacking_folds < 2) throw Error("stacking needs at least 2 folds");
  if (!(strength > 0.0 && strength <= 1.0)) throw Error("randomisation strength must lie in (0, 1]");
}

Dataset bootstrap_sample(const Dataset& ds, std::uint64_t seed) {
  if (ds.empty()) throw Error("cannot bootstrap an empty dataset");
  const bool need_both = ds.has_both_classes();
  constexpr int kAttempts = 10;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(attempt)}));
    std::vector<std::size_t> rows(ds.size());
    for (auto& r : rows) r = rng.index(ds.size());
    auto sample = ds.subset(rows);
    if (!need_both || sample.has_both_classes()) return sample;
  }
  throw Error("bootstrap sample missed a class in 10 attempts");
}

Dataset weighted_resample(const Dataset& ds, std::uint64_t seed) {
  if (ds.empty()) throw Error("cannot resample an empty dataset");
  std::vector<double> cumulative(ds.size());
  double running = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    running += ds[i].weight;
    cumulative[i] = running;
  }
  const bool need_both = ds.has_both_classes();
  for (int attempt = 0; attempt < 10; ++attempt) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(attempt)}));
    std::vector<Instance> rows;
    rows.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double u = rng.uniform() * running;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const auto pick = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), ds.size() - 1);
      Instance x = ds[pick];
      x.weight = 1.0;
      rows.push_back(std::move(x));
    }
    auto sample = ds.with_instances(std::move(rows));
    if (!need_both || sample.has_both_classes()) return sample;
  }
  throw Error("weighted resample missed a class in 10 attempts");
}

double boost_alpha(double weighted_error) {
  if (weighted_error >= 0.5) return 0.0;
  const double e = std::max(weighted_error, kBoostErrorFloor);
  return 0.5 * std::log((1.0 - e) / e);
}

BoostState BoostState::uniform(std::size_t n) {
  BoostState s;
  s.weights.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  return s;
}

BoostState boost_round(BoostState state, std::span<const int> predictions, std::span<const int> truth) {
  const std::size_t n = state.weights.size();
  if (predictions.size() != truth.size() || truth.size() != n) {
    throw Error("boost round: predictions, truth and weights differ in length");
  }
  if (n == 0) throw Error("boost round on an empty weight vector");
  const double total = std::accumulate(state.weights.begin(), state.weights.end(), 0.0);
  if (!(total > 0.0)) throw Error("boost weights must sum to a positive value");
  for (auto& w : state.weights) w /= total;

  double error = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (predictions[i] != truth[i]) error += state.weights[i];
  }
  error = std::clamp(error, 0.0, 1.0);
  const double alpha = boost_alpha(error);
  if (error >= 0.5) {
    state.weights.assign(n, 1.0 / static_cast<double>(n));
  } else {
    const double up = std::exp(alpha);
    const double down = std::exp(-alpha);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      state.weights[i] *= predictions[i] != truth[i] ? up : down;
      sum += state.weights[i];
    }
    for (auto& w : state.weights) w /= sum;
  }
  state.alphas.push_back(alpha);
  state.errors.push_back(error);
  return state;
}

std::vector<std::size_t> feature_subset(std::span<const FeatureSpec> features, double fraction, std::uint64_t seed) {
  if (features.empty()) throw Error("cannot draw a subset of an empty feature list");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("feature subset fraction must lie in (0, 1]");
  const double exact = fraction * static_cast<double>(features.size());
  const auto count = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(exact - 1e-9)), 1, features.size());
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

std::string meta_feature_name(std::size_t position, ClassifierKind kind) {
  return "p1_" + std::to_string(position) + "_" + std::string(to_string(kind));
}

Dataset stack_meta_dataset(std::span<const ClassifierKind> members, const Dataset& train, const FoldAssignment& folds,
                           const Dataset& validation, const HyperParams& params, StackingAudit* audit) {
  if (members.size() < 2) throw Error("stacking needs at least 2 members");
  if (folds.fold_of.size() != train.size()) throw Error("fold assignment does not cover the training set");

  std::vector<std::vector<double>> meta(train.size(), std::vector<double>(members.size(), 0.0));
  if (audit) {
    audit->fold_training_ids.assign(static_cast<std::size_t>(folds.k), {});
    audit->scored_by.assign(train.size(), -1);
  }
  for (int f = 0; f < folds.k; ++f) {
    const auto held_out = folds.rows_in(f);
    if (held_out.empty()) continue;
    const auto fit_rows = folds.rows_not_in(f);
    const Dataset fit = train.subset(fit_rows);
    if (!fit.has_both_classes()) throw Error("stacking fold " + std::to_string(f) + " lacks a class in its training part");
    if (audit) audit->fold_training_ids[static_cast<std::size_t>(f)] = fit.ids();
    for (std::size_t m = 0; m < members.size(); ++m) {
      ModelPtr model;
      try {
        model = train_member(members[m], fit, validation, params);
      } catch (const Error& e) {
        throw Error("stacking member " + std::string(to_string(members[m])) + " failed on fold " +
                    std::to_string(f) + ": " + e.what());
      }
      for (auto r : held_out) meta[r][m] = model->predict_proba(train[r])[1];
    }
    if (audit) {
      for (auto r : held_out) audit->scored_by[r] = f;
    }
  }

  Schema features;
  for (std::size_t m = 0; m < members.size(); ++m) features.push_back(FeatureSpec::numeric(meta_feature_name(m, members[m])));
  std::vector<Instance> rows;
  rows.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) rows.push_back({meta[i], train[i].label, 1.0, train[i].id});
  return Dataset(std::move(features), train.label_name(), std::move(rows));
}

HyperParams randomise_config(ClassifierKind kind, double strength, std::uint64_t seed, const HyperParams& base) {
  if (!(strength > 0.0 && strength <= 1.0)) throw Error("randomisation strength must lie in (0, 1]");
  HyperParams out = base;
  Rng rng(seed);
  switch (kind) {
    case ClassifierKind::dt:
      out.tree.random_top = std::max(1, static_cast<int>(std::ceil(strength * 20.0 - 1e-9)));
      out.tree.seed = rng.next();
      break;
    case ClassifierKind::ann:
      out.ann.seed = rng.next();
      break;
    case ClassifierKind::knn: {
      static constexpr std::array<int, 3> kJitter{-2, 0, 2};
      out.knn.k_jitter = kJitter[rng.index(kJitter.size())];
      break;
    }
    case ClassifierKind::lgd:
      out.logistic.subsample = 0.8;
      out.logistic.seed = rng.next();
      break;
    case ClassifierKind::nbc:
      out.nbc.alpha = rng.uniform(0.5, 2.0);
      break;
    default:
      throw Error("unknown member kind");
  }
  out.resample_seed = derive_seed(seed, {0x5eedULL});
  return out;
}

}  // namespace mcls
