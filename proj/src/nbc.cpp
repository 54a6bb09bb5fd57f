#include "mcls/nbc.hpp"

#include <cmath>
#include <numbers>

namespace mcls {

NbcModel::NbcModel(Schema features, std::array<double, 2> priors, std::vector<Conditional> conditionals, double alpha)
    : Classifier(std::move(features)), priors_(priors), conditionals_(std::move(conditionals)), alpha_(alpha) {
  if (conditionals_.size() != this->features().size()) throw Error("NBC conditional count does not match the schema");
}

double NbcModel::likelihood(std::size_t feature, int cls, double value) const {
  const auto& cond = conditionals_.at(feature);
  const auto c = static_cast<std::size_t>(cls);
  if (features()[feature].is_categorical()) return cond.table[c].at(static_cast<std::size_t>(value));
  const double var = cond.variance[c];
  const double diff = value - cond.mean[c];
  return std::exp(-0.5 * diff * diff / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

ClassDistribution NbcModel::predict_checked(const Instance& x) const {
  std::array<double, 2> log_post{std::log(priors_[0]), std::log(priors_[1])};
  for (std::size_t j = 0; j < conditionals_.size(); ++j) {
    const auto& cond = conditionals_[j];
    for (std::size_t c = 0; c < 2; ++c) {
      if (features()[j].is_categorical()) {
        log_post[c] += std::log(cond.table[c][static_cast<std::size_t>(x.values[j])]);
      } else {
        const double var = cond.variance[c];
        const double diff = x.values[j] - cond.mean[c];
        log_post[c] += -0.5 * diff * diff / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
      }
    }
  }
  const double top = std::max(log_post[0], log_post[1]);
  return ClassDistribution::normalized(std::exp(log_post[0] - top), std::exp(log_post[1] - top));
}

nlohmann::json NbcModel::to_json() const {
  auto doc = header_json();
  doc["priors"] = priors_;
  doc["alpha"] = alpha_;
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : conditionals_) {
    conds.push_back({{"table", c.table}, {"mean", c.mean}, {"variance", c.variance}});
  }
  doc["conditionals"] = std::move(conds);
  return doc;
}

std::shared_ptr<const NbcModel> NbcModel::from_json(const nlohmann::json& doc) {
  auto features = schema_from_json(doc.at("features"));
  std::vector<Conditional> conds;
  for (const auto& c : doc.at("conditionals")) {
    Conditional cond;
    cond.table = c.at("table").get<std::array<std::vector<double>, 2>>();
    cond.mean = c.at("mean").get<std::array<double, 2>>();
    cond.variance = c.at("variance").get<std::array<double, 2>>();
    conds.push_back(std::move(cond));
  }
  return std::make_shared<NbcModel>(std::move(features), doc.at("priors").get<std::array<double, 2>>(),
                                    std::move(conds), doc.at("alpha").get<double>());
}

std::shared_ptr<const NbcModel> train_nbc(const Dataset& train, const NbcParams& params) {
  if (!(params.alpha > 0.0)) throw Error("NBC Dirichlet alpha must be positive");
  if (!train.has_both_classes()) throw Error("naive Bayes needs both classes in the training data");

  const double total = train.total_weight();
  const double scale = static_cast<double>(train.size()) / total;
  std::array<double, 2> class_mass{0.0, 0.0};
  for (const auto& x : train.instances()) class_mass[static_cast<std::size_t>(x.label)] += x.weight * scale;
  const double n = class_mass[0] + class_mass[1];
  const std::array<double, 2> priors{(class_mass[0] + 1.0) / (n + 2.0), (class_mass[1] + 1.0) / (n + 2.0)};

  std::vector<NbcModel::Conditional> conds(train.feature_count());
  for (std::size_t j = 0; j < train.feature_count(); ++j) {
    const auto& f = train.features()[j];
    auto& cond = conds[j];
    if (f.is_categorical()) {
      const std::size_t k = f.categories.size();
      for (std::size_t c = 0; c < 2; ++c) cond.table[c].assign(k, 0.0);
      for (const auto& x : train.instances()) {
        cond.table[static_cast<std::size_t>(x.label)][static_cast<std::size_t>(x.values[j])] += x.weight * scale;
      }
      for (std::size_t c = 0; c < 2; ++c) {
        const double denom = class_mass[c] + params.alpha * static_cast<double>(k);
        for (auto& v : cond.table[c]) v = (v + params.alpha) / denom;
      }
    } else {
      std::array<double, 2> sum{0.0, 0.0};
      for (const auto& x : train.instances()) sum[static_cast<std::size_t>(x.label)] += x.weight * scale * x.values[j];
      for (std::size_t c = 0; c < 2; ++c) cond.mean[c] = sum[c] / class_mass[c];
      std::array<double, 2> sq{0.0, 0.0};
      for (const auto& x : train.instances()) {
        const auto c = static_cast<std::size_t>(x.label);
        const double d = x.values[j] - cond.mean[c];
        sq[c] += x.weight * scale * d * d;
      }
      for (std::size_t c = 0; c < 2; ++c) cond.variance[c] = std::max(kNbcVarianceFloor, sq[c] / class_mass[c]);
    }
  }
  return std::make_shared<NbcModel>(train.features(), priors, std::move(conds), params.alpha);
}

}  // namespace mcls
