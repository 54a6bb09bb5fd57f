#include "mcls/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace mcls {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Stable tags mixed into per-member seeds.
enum SeedTag : std::uint64_t { kBagTag = 1, kSubsetTag, kRandomTag, kResampleTag, kStackTag };

struct FittedMember {
  ModelPtr model;
  std::vector<std::size_t> ids;
};

// Trains member `position` on the resampling view of `source`.
FittedMember fit_member(const EnsembleSpec& spec, std::size_t position, const Dataset& source,
                        const Dataset& validation, const HyperParams& base, std::uint64_t seed) {
  const ClassifierKind kind = spec.members[position];
  const auto pos = static_cast<std::uint64_t>(position);
  HyperParams params = base;
  params.resample_seed = derive_seed(seed, {kResampleTag, pos});
  Dataset data = source;
  Dataset tuning = validation;
  std::vector<std::size_t> subset;
  switch (spec.resampling.kind) {
    case ResamplingKind::bagging:
      data = bootstrap_sample(source, derive_seed(seed, {kBagTag, pos}));
      break;
    case ResamplingKind::feature_subset:
      subset = feature_subset(source.features(), spec.resampling.subset_fraction, derive_seed(seed, {kSubsetTag, pos}));
      data = source.project(subset);
      tuning = validation.project(subset);
      break;
    case ResamplingKind::randomisation:
      params = randomise_config(kind, spec.resampling.strength, derive_seed(seed, {kRandomTag, pos}), base);
      break;
    case ResamplingKind::boosting:
    case ResamplingKind::stacking:
      break;
  }
  ModelPtr model;
  try {
    model = train_member(kind, data, tuning, params);
  } catch (const Error& e) {
    throw Error("member " + std::to_string(position) + " (" + std::string(to_string(kind)) + "): " + e.what());
  }
  if (!subset.empty()) model = std::make_shared<ProjectedClassifier>(source.features(), subset, model);
  return {std::move(model), data.ids()};
}

struct MemberPool {
  std::vector<ModelPtr> models;
  std::vector<double> alphas;
  std::vector<std::size_t> ids;
};

MemberPool fit_independent(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                           const HyperParams& params, std::uint64_t seed) {
  MemberPool pool;
  for (std::size_t m = 0; m < spec.members.size(); ++m) {
    auto fitted = fit_member(spec, m, train, validation, params, seed);
    pool.models.push_back(std::move(fitted.model));
    pool.ids.insert(pool.ids.end(), fitted.ids.begin(), fitted.ids.end());
  }
  return pool;
}

// Members in listed order, each on the current boosting distribution.
MemberPool fit_sequential(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                          const HyperParams& params, std::uint64_t seed) {
  MemberPool pool;
  const auto truth = train.labels();
  BoostState state = BoostState::uniform(train.size());
  const double n = static_cast<double>(train.size());
  for (std::size_t m = 0; m < spec.members.size(); ++m) {
    ModelPtr model;
    for (int round = 0; round < spec.resampling.boosting_rounds; ++round) {
      std::vector<double> scaled(state.weights.size());
      for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = state.weights[i] * n;
      auto fitted = fit_member(spec, m, train.with_weights(scaled), validation, params,
                               derive_seed(seed, {static_cast<std::uint64_t>(round)}));
      std::vector<int> predictions(train.size());
      for (std::size_t i = 0; i < train.size(); ++i) predictions[i] = fitted.model->predict(train[i]);
      state = boost_round(std::move(state), predictions, truth);
      pool.ids.insert(pool.ids.end(), fitted.ids.begin(), fitted.ids.end());
      model = std::move(fitted.model);
    }
    pool.models.push_back(std::move(model));
  }
  // with several rounds per member, each member keeps its last-round alpha
  const auto rounds = static_cast<std::size_t>(spec.resampling.boosting_rounds);
  for (std::size_t m = 0; m < spec.members.size(); ++m) pool.alphas.push_back(state.alphas[(m + 1) * rounds - 1]);
  return pool;
}

ModelPtr fit_meta_learner(const EnsembleSpec& spec, const std::vector<ModelPtr>& members, const Dataset& train,
                          const Dataset& validation, const HyperParams& params, std::uint64_t seed,
                          std::vector<std::size_t>& ids) {
  const int k = std::min<int>(spec.resampling.stacking_folds, static_cast<int>(train.size()));
  const auto folds = make_folds(train, k, derive_seed(seed, {kStackTag}), true);
  StackingAudit audit;
  const Dataset meta = stack_meta_dataset(spec.members, train, folds, validation, params, &audit);
  for (const auto& fold_ids : audit.fold_training_ids) ids.insert(ids.end(), fold_ids.begin(), fold_ids.end());

  std::vector<Instance> meta_val;
  for (const auto& v : validation.instances()) {
    Instance row{{}, v.label, 1.0, v.id};
    for (const auto& m : members) row.values.push_back(m->predict_proba(v)[1]);
    meta_val.push_back(std::move(row));
  }
  const Dataset meta_validation = meta.with_instances(std::move(meta_val));
  try {
    return train_member(spec.resampling.meta_learner, meta, meta_validation, params);
  } catch (const Error& e) {
    throw Error(std::string("stacking meta-learner: ") + e.what());
  }
}

std::vector<std::size_t> finish_ids(std::vector<std::size_t> ids, const Dataset& validation) {
  for (const auto& v : validation.instances()) ids.push_back(v.id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void require_architecture(const EnsembleSpec& spec, Architecture expected) {
  spec.validate();
  if (spec.architecture != expected) {
    throw Error("ensemble spec architecture is " + std::string(to_string(spec.architecture)) + ", expected " +
                std::string(to_string(expected)));
  }
}

double accuracy_on(const Classifier& model, const Dataset& ds) {
  if (ds.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& x : ds.instances()) hits += model.predict(x) == x.label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

}  // namespace

std::string_view to_string(Architecture architecture) {
  switch (architecture) {
    case Architecture::static_parallel: return "static_parallel";
    case Architecture::multi_stage: return "multi_stage";
    case Architecture::dynamic_selection: return "dynamic_selection";
  }
  return "?";
}

Architecture parse_architecture(std::string_view name) {
  const auto lower = lowercase(name);
  if (lower == "sp") return Architecture::static_parallel;
  if (lower == "ms") return Architecture::multi_stage;
  if (lower == "dcs") return Architecture::dynamic_selection;
  for (auto a : kAllArchitectures) {
    if (to_string(a) == lower) return a;
  }
  throw Error("unknown architecture '" + std::string(name) + "'");
}

std::string_view to_string(CombinationRule rule) {
  switch (rule) {
    case CombinationRule::majority_vote: return "majority_vote";
    case CombinationRule::weighted_majority: return "weighted_majority";
    case CombinationRule::sum: return "sum";
    case CombinationRule::product: return "product";
    case CombinationRule::min: return "min";
    case CombinationRule::max: return "max";
  }
  return "?";
}

CombinationRule parse_combination_rule(std::string_view name) {
  const auto lower = lowercase(name);
  for (auto r : {CombinationRule::majority_vote, CombinationRule::weighted_majority, CombinationRule::sum,
                 CombinationRule::product, CombinationRule::min, CombinationRule::max}) {
    if (to_string(r) == lower) return r;
  }
  throw Error("unknown combination rule '" + std::string(name) + "'");
}

std::string member_set_label(std::span<const ClassifierKind> members) {
  std::string out;
  for (auto kind : members) {
    if (!out.empty()) out += '+';
    out += to_string(kind);
  }
  return out;
}

MemberSet parse_member_set(std::string_view label) {
  MemberSet out;
  std::size_t start = 0;
  while (start <= label.size()) {
    const auto end = std::min(label.find('+', start), label.size());
    out.push_back(parse_classifier_kind(label.substr(start, end - start)));
    start = end + 1;
  }
  if (std::set<ClassifierKind>(out.begin(), out.end()).size() != out.size()) {
    throw Error("member set '" + std::string(label) + "' lists a classifier twice");
  }
  return out;
}

void EnsembleSpec::validate() const {
  if (members.size() < 2 || members.size() > 5) throw Error("an ensemble needs 2 to 5 members");
  std::set<ClassifierKind> distinct(members.begin(), members.end());
  if (distinct.size() != members.size()) throw Error("ensemble members must be distinct classifier kinds");
  resampling.validate();
  if (locality_k < 1) throw Error("dynamic selection locality must be at least 1");
}

std::size_t EnsembleCatalog::count_of_size(std::size_t size) const {
  return static_cast<std::size_t>(
      std::count_if(member_sets.begin(), member_sets.end(), [&](const MemberSet& s) { return s.size() == size; }));
}

EnsembleCatalog enumerate_member_sets() {
  EnsembleCatalog catalog;
  constexpr std::size_t n = kAllClassifierKinds.size();
  for (std::size_t size = 2; size <= n; ++size) {
    std::vector<MemberSet> of_size;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
      MemberSet set;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) set.push_back(kAllClassifierKinds[i]);
      }
      of_size.push_back(std::move(set));
    }
    std::sort(of_size.begin(), of_size.end());
    catalog.member_sets.insert(catalog.member_sets.end(), of_size.begin(), of_size.end());
  }
  return catalog;
}

ClassDistribution combine_sp(std::span<const ClassDistribution> distributions, CombinationRule rule,
                             std::span<const double> weights) {
  if (distributions.empty()) throw Error("cannot combine an empty set of member outputs");
  if (rule == CombinationRule::weighted_majority) {
    if (weights.size() != distributions.size()) throw Error("weighted majority needs one weight per member");
  } else if (!weights.empty()) {
    throw Error("member weights are only used by weighted_majority");
  }

  std::array<double, 2> agg{0.0, 0.0};
  switch (rule) {
    case CombinationRule::majority_vote:
    case CombinationRule::weighted_majority: {
      double total = 0.0;
      for (std::size_t m = 0; m < distributions.size(); ++m) {
        const double w = rule == CombinationRule::weighted_majority ? weights[m] : 1.0;
        if (!(w >= 0.0)) throw Error("member weights must be non-negative");
        agg[static_cast<std::size_t>(distributions[m].argmax())] += w;
        total += w;
      }
      if (total <= 0.0) return combine_sp(distributions, CombinationRule::majority_vote);
      if (agg[0] == agg[1]) return combine_sp(distributions, CombinationRule::sum);
      return ClassDistribution::normalized(agg[0], agg[1]);
    }
    case CombinationRule::sum:
      for (const auto& d : distributions) {
        agg[0] += d.p[0];
        agg[1] += d.p[1];
      }
      break;
    case CombinationRule::product:
      agg = {1.0, 1.0};
      for (const auto& d : distributions) {
        agg[0] *= d.p[0];
        agg[1] *= d.p[1];
      }
      break;
    case CombinationRule::min:
      agg = {1.0, 1.0};
      for (const auto& d : distributions) {
        agg[0] = std::min(agg[0], d.p[0]);
        agg[1] = std::min(agg[1], d.p[1]);
      }
      break;
    case CombinationRule::max:
      for (const auto& d : distributions) {
        agg[0] = std::max(agg[0], d.p[0]);
        agg[1] = std::max(agg[1], d.p[1]);
      }
      break;
  }
  if (!(agg[0] + agg[1] > 0.0)) throw Error("zero-sum " + std::string(to_string(rule)) + " aggregate");
  return ClassDistribution::normalized(agg[0], agg[1]);
}

EnsembleModel::EnsembleModel(Schema features, EnsembleSpec spec, std::vector<ModelPtr> members,
                             std::vector<double> weights, std::optional<Referee> referee, ModelPtr meta_learner,
                             bool degenerate, std::vector<std::size_t> training_ids)
    : Classifier(std::move(features)),
      spec_(std::move(spec)),
      members_(std::move(members)),
      weights_(std::move(weights)),
      referee_(std::move(referee)),
      meta_learner_(std::move(meta_learner)),
      degenerate_(degenerate),
      training_ids_(std::move(training_ids)) {
  spec_.validate();
  if (members_.size() != spec_.members.size()) throw Error("member model count does not match the spec");
  for (const auto& m : members_) {
    if (!m || !(m->features() == this->features())) throw Error("ensemble member schema differs from the ensemble");
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw Error("ensemble weights must be finite");
  }
  if (spec_.architecture == Architecture::multi_stage && weights_.size() != members_.size()) {
    throw Error("multi-stage ensemble needs one stage weight per member");
  }
  if (spec_.architecture == Architecture::dynamic_selection) {
    if (!referee_ || referee_->unit_rows.rows() == 0) throw Error("dynamic selection needs a non-empty referee set");
    if (referee_->correct.size() != members_.size() || referee_->global_accuracy.size() != members_.size()) {
      throw Error("referee bookkeeping does not match the member count");
    }
  }
}

std::vector<ClassDistribution> EnsembleModel::member_distributions(const Instance& x) const {
  std::vector<ClassDistribution> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m->predict_proba(x));
  return out;
}

int EnsembleModel::select_member(const Instance& x, int locality_k) const {
  if (!referee_) throw Error("member selection needs a dynamic-selection ensemble");
  check_instance(features(), x);
  Eigen::VectorXd q = referee_->encoder.encode(x);
  const double norm = q.norm();
  if (!(norm > 0.0)) throw Error("undefined cosine: instance encodes to the zero vector");
  const Eigen::Index k = std::clamp<Eigen::Index>(locality_k, 1, referee_->unit_rows.rows());
  const auto nearest = top_k_by_similarity(referee_->unit_rows, q / norm, k);
  int best = 0;
  std::size_t best_local = 0;
  for (std::size_t m = 0; m < members_.size(); ++m) {
    std::size_t local = 0;
    for (auto r : nearest) local += referee_->correct[m][static_cast<std::size_t>(r)];
    const bool better = m == 0 || local > best_local ||
                        (local == best_local && referee_->global_accuracy[m] > referee_->global_accuracy[static_cast<std::size_t>(best)]);
    if (better) {
      best = static_cast<int>(m);
      best_local = local;
    }
  }
  return best;
}

ClassDistribution EnsembleModel::combine(const std::vector<ClassDistribution>& dists, const Instance& x,
                                         int* selected) const {
  if (meta_learner_) {
    Instance meta{{}, x.label, 1.0, x.id};
    for (const auto& d : dists) meta.values.push_back(d.p[1]);
    return meta_learner_->predict_proba(meta);
  }
  switch (spec_.architecture) {
    case Architecture::static_parallel:
      if (spec_.rule == CombinationRule::weighted_majority) return combine_sp(dists, spec_.rule, weights_);
      return combine_sp(dists, spec_.rule);
    case Architecture::multi_stage:
      if (degenerate_) return combine_sp(dists, CombinationRule::majority_vote);
      return combine_sp(dists, CombinationRule::weighted_majority, weights_);
    case Architecture::dynamic_selection: {
      const int m = select_member(x, spec_.locality_k);
      if (selected) *selected = m;
      return dists[static_cast<std::size_t>(m)];
    }
  }
  throw Error("unknown architecture");
}

EnsemblePrediction EnsembleModel::predict_detailed(const Instance& x) const {
  check_instance(features(), x);
  EnsemblePrediction out;
  out.distribution = combine(member_distributions(x), x, &out.selected_member);
  return out;
}

ClassDistribution EnsembleModel::predict_checked(const Instance& x) const {
  return combine(member_distributions(x), x, nullptr);
}

nlohmann::json spec_to_json(const EnsembleSpec& spec) {
  return {{"members", member_set_label(spec.members)},
          {"architecture", std::string(to_string(spec.architecture))},
          {"rule", std::string(to_string(spec.rule))},
          {"locality_k", spec.locality_k},
          {"resampling",
           {{"kind", std::string(to_string(spec.resampling.kind))},
            {"subset_fraction", spec.resampling.subset_fraction},
            {"boosting_rounds", spec.resampling.boosting_rounds},
            {"meta_learner", std::string(to_string(spec.resampling.meta_learner))},
            {"stacking_folds", spec.resampling.stacking_folds},
            {"strength", spec.resampling.strength}}}};
}

EnsembleSpec spec_from_json(const nlohmann::json& doc) {
  EnsembleSpec spec;
  spec.members = parse_member_set(doc.at("members").get<std::string>());
  spec.architecture = parse_architecture(doc.at("architecture").get<std::string>());
  spec.rule = parse_combination_rule(doc.at("rule").get<std::string>());
  spec.locality_k = doc.at("locality_k").get<int>();
  const auto& r = doc.at("resampling");
  spec.resampling.kind = parse_resampling_kind(r.at("kind").get<std::string>());
  spec.resampling.subset_fraction = r.at("subset_fraction").get<double>();
  spec.resampling.boosting_rounds = r.at("boosting_rounds").get<int>();
  spec.resampling.meta_learner = parse_classifier_kind(r.at("meta_learner").get<std::string>());
  spec.resampling.stacking_folds = r.at("stacking_folds").get<int>();
  spec.resampling.strength = r.at("strength").get<double>();
  return spec;
}

nlohmann::json EnsembleModel::to_json() const {
  auto doc = header_json();
  doc["spec"] = spec_to_json(spec_);
  doc["members"] = nlohmann::json::array();
  for (const auto& m : members_) doc["members"].push_back(m->to_json());
  doc["weights"] = weights_;
  doc["degenerate"] = degenerate_;
  doc["meta_learner"] = meta_learner_ ? meta_learner_->to_json() : nlohmann::json();
  if (referee_) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < referee_->unit_rows.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(referee_->unit_rows.cols()));
      for (Eigen::Index j = 0; j < referee_->unit_rows.cols(); ++j) row[static_cast<std::size_t>(j)] = referee_->unit_rows(i, j);
      rows.push_back(std::move(row));
    }
    doc["referee"] = {{"encoder", referee_->encoder.to_json()},
                      {"unit_rows", std::move(rows)},
                      {"correct", referee_->correct},
                      {"global_accuracy", referee_->global_accuracy}};
  } else {
    doc["referee"] = nullptr;
  }
  return doc;
}

std::shared_ptr<const EnsembleModel> EnsembleModel::from_json(const nlohmann::json& doc) {
  auto features = schema_from_json(doc.at("features"));
  std::vector<ModelPtr> members;
  for (const auto& m : doc.at("members")) members.push_back(model_from_json(m));
  std::optional<Referee> referee;
  if (!doc.at("referee").is_null()) {
    const auto& r = doc.at("referee");
    Referee ref;
    ref.encoder = Encoder::from_json(r.at("encoder"), features);
    const auto& rows = r.at("unit_rows");
    ref.unit_rows.resize(static_cast<Eigen::Index>(rows.size()), ref.encoder.width());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = rows[i].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != ref.encoder.width()) throw Error("referee row width mismatch");
      for (std::size_t j = 0; j < row.size(); ++j) ref.unit_rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    ref.correct = r.at("correct").get<std::vector<std::vector<std::uint8_t>>>();
    ref.global_accuracy = r.at("global_accuracy").get<std::vector<double>>();
    referee = std::move(ref);
  }
  ModelPtr meta = doc.at("meta_learner").is_null() ? nullptr : model_from_json(doc.at("meta_learner"));
  return std::make_shared<EnsembleModel>(std::move(features), spec_from_json(doc.at("spec")), std::move(members),
                                         doc.at("weights").get<std::vector<double>>(), std::move(referee),
                                         std::move(meta), doc.at("degenerate").get<bool>());
}

namespace {

bool uses_sequential_training(const EnsembleSpec& spec) {
  return spec.architecture == Architecture::multi_stage || spec.resampling.kind == ResamplingKind::boosting;
}

EnsemblePtr assemble(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                     const HyperParams& params, std::uint64_t seed) {
  if (!train.has_both_classes()) throw Error("ensemble training data needs both classes");
  MemberPool pool = uses_sequential_training(spec) ? fit_sequential(spec, train, validation, params, seed)
                                                   : fit_independent(spec, train, validation, params, seed);
  ModelPtr meta;
  if (spec.resampling.kind == ResamplingKind::stacking) {
    meta = fit_meta_learner(spec, pool.models, train, validation, params, seed, pool.ids);
  }

  std::vector<double> weights;
  bool degenerate = false;
  std::optional<EnsembleModel::Referee> referee;
  switch (spec.architecture) {
    case Architecture::static_parallel:
      if (spec.rule == CombinationRule::weighted_majority) {
        for (const auto& m : pool.models) weights.push_back(accuracy_on(*m, validation));
      }
      break;
    case Architecture::multi_stage:
      weights = pool.alphas;
      degenerate = std::all_of(weights.begin(), weights.end(), [](double a) { return a == 0.0; });
      break;
    case Architecture::dynamic_selection: {
      if (validation.empty()) throw Error("dynamic selection needs a non-empty validation set");
      EnsembleModel::Referee ref;
      ref.encoder = Encoder::fit(train);
      ref.unit_rows = normalize_rows(ref.encoder.encode(validation));
      for (const auto& m : pool.models) {
        std::vector<std::uint8_t> correct(validation.size());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < validation.size(); ++i) {
          correct[i] = m->predict(validation[i]) == validation[i].label ? 1 : 0;
          hits += correct[i];
        }
        ref.correct.push_back(std::move(correct));
        ref.global_accuracy.push_back(static_cast<double>(hits) / static_cast<double>(validation.size()));
      }
      referee = std::move(ref);
      break;
    }
  }
  return std::make_shared<EnsembleModel>(train.features(), spec, std::move(pool.models), std::move(weights),
                                         std::move(referee), std::move(meta), degenerate,
                                         finish_ids(std::move(pool.ids), validation));
}

}  // namespace

EnsemblePtr train_static_parallel(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                                  const HyperParams& params, std::uint64_t seed) {
  require_architecture(spec, Architecture::static_parallel);
  return assemble(spec, train, validation, params, seed);
}

EnsemblePtr train_multi_stage(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                              const HyperParams& params, std::uint64_t seed) {
  require_architecture(spec, Architecture::multi_stage);
  return assemble(spec, train, validation, params, seed);
}

EnsemblePtr train_dynamic_selection(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                                    const HyperParams& params, std::uint64_t seed) {
  require_architecture(spec, Architecture::dynamic_selection);
  return assemble(spec, train, validation, params, seed);
}

EnsemblePtr train_ensemble(const EnsembleSpec& spec, const Dataset& train, const Dataset& validation,
                           const HyperParams& params, std::uint64_t seed) {
  spec.validate();
  return assemble(spec, train, validation, params, seed);
}

}  // namespace mcls
