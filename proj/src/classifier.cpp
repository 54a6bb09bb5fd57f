#include "mcls/classifier.hpp"

#include <fstream>

#include "mcls/ensemble.hpp"
#include "mcls/members.hpp"
#include "mcls/resampling.hpp"

namespace mcls {

nlohmann::json Classifier::header_json() const {
  return {{"type", std::string(type())}, {"version", kModelFormatVersion}, {"features", schema_to_json(features_)}};
}

nlohmann::json schema_to_json(const Schema& features) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : features) {
    nlohmann::json entry{{"name", f.name}, {"kind", f.is_categorical() ? "categorical" : "numeric"}};
    if (f.is_categorical()) entry["categories"] = f.categories;
    out.push_back(std::move(entry));
  }
  return out;
}

Schema schema_from_json(const nlohmann::json& doc) {
  Schema features;
  for (const auto& entry : doc) {
    const auto kind = entry.at("kind").get<std::string>();
    if (kind == "categorical") {
      features.push_back(FeatureSpec::categorical(entry.at("name").get<std::string>(),
                                                  entry.at("categories").get<std::vector<std::string>>()));
    } else if (kind == "numeric") {
      features.push_back(FeatureSpec::numeric(entry.at("name").get<std::string>()));
    } else {
      throw Error("unknown feature kind '" + kind + "'");
    }
  }
  validate_schema(features);
  return features;
}

ModelPtr model_from_json(const nlohmann::json& doc) {
  try {
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error("unsupported model format version " + std::to_string(version));
    }
    const auto type = doc.at("type").get<std::string>();
    if (type == "logistic") return LogisticModel::from_json(doc);
    if (type == "knn") return KnnModel::from_json(doc);
    if (type == "ann") return AnnModel::from_json(doc);
    if (type == "tree") return TreeModel::from_json(doc);
    if (type == "nbc") return NbcModel::from_json(doc);
    if (type == "projected") return ProjectedClassifier::from_json(doc);
    if (type == "ensemble") return EnsembleModel::from_json(doc);
    throw Error("unknown model type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const Classifier& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file '" + path.string() + "'");
  out << model.to_json().dump() << '\n';
}

ModelPtr load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("model file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

ProjectedClassifier::ProjectedClassifier(Schema full_features, std::vector<std::size_t> indices, ModelPtr inner)
    : Classifier(std::move(full_features)), indices_(std::move(indices)), inner_(std::move(inner)) {
  if (!inner_) throw Error("projected classifier needs an inner model");
  if (indices_.size() != inner_->features().size()) throw Error("projection width does not match the inner model");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] >= features().size() || !(features()[indices_[i]] == inner_->features()[i])) {
      throw Error("projection does not map onto the inner model's schema");
    }
  }
}

Instance ProjectedClassifier::project(const Instance& x) const {
  Instance y = x;
  y.values.clear();
  for (auto j : indices_) y.values.push_back(x.values.at(j));
  return y;
}

ClassDistribution ProjectedClassifier::predict_checked(const Instance& x) const {
  return inner_->predict_proba(project(x));
}

nlohmann::json ProjectedClassifier::to_json() const {
  auto doc = header_json();
  doc["indices"] = indices_;
  doc["inner"] = inner_->to_json();
  return doc;
}

ModelPtr ProjectedClassifier::from_json(const nlohmann::json& doc) {
  return std::make_shared<ProjectedClassifier>(schema_from_json(doc.at("features")),
                                               doc.at("indices").get<std::vector<std::size_t>>(),
                                               model_from_json(doc.at("inner")));
}

ModelPtr train_member(ClassifierKind kind, const Dataset& train, const Dataset& validation, const HyperParams& params) {
  switch (kind) {
    case ClassifierKind::lgd: return train_logistic(train, params.logistic);
    case ClassifierKind::dt: return train_tree(train, params.tree);
    case ClassifierKind::nbc: return train_nbc(train, params.nbc);
    case ClassifierKind::knn:
    case ClassifierKind::ann: {
      const Dataset data = train.has_uniform_weights() ? train : weighted_resample(train, params.resample_seed);
      if (kind == ClassifierKind::knn) return train_knn(data, validation, params.knn);
      return train_ann(data, validation, params.ann);
    }
  }
  throw Error("unknown classifier kind");
}

}  // namespace mcls
