#ifndef MCLS_CLASSIFIER_HPP
#define MCLS_CLASSIFIER_HPP

#include <filesystem>
#include <memory>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcls/core.hpp"
#include "mcls/dataset.hpp"

namespace mcls {

/// Current version written into every serialized model document.
inline constexpr int kModelFormatVersion = 1;

/// Shared prediction contract of base classifiers and ensembles.
/// Fitted models are immutable.
class Classifier {
 public:
  explicit Classifier(Schema features) : features_(std::move(features)) {}
  virtual ~Classifier() = default;

  Classifier(const Classifier&) = delete;
  Classifier& operator=(const Classifier&) = delete;

  /// Serialization tag: logistic, knn, ann, tree, nbc, projected or ensemble.
  virtual std::string_view type() const = 0;

  /// Valid class posterior for any in-schema instance; throws Error on schema mismatch.
  ClassDistribution predict_proba(const Instance& x) const {
    check_instance(features_, x);
    return predict_checked(x);
  }

  int predict(const Instance& x) const { return predict_proba(x).argmax(); }

  const Schema& features() const { return features_; }

  /// Versioned JSON document sufficient for a bit-exact reload of predictions.
  virtual nlohmann::json to_json() const = 0;

 protected:
  virtual ClassDistribution predict_checked(const Instance& x) const = 0;

  /// Common header fields: type, version, features.
  nlohmann::json header_json() const;

 private:
  Schema features_;
};

using ModelPtr = std::shared_ptr<const Classifier>;

nlohmann::json schema_to_json(const Schema& features);
Schema schema_from_json(const nlohmann::json& doc);

/// Rebuilds any serialized model.
ModelPtr model_from_json(const nlohmann::json& doc);

void save_model(const Classifier& model, const std::filesystem::path& path);
ModelPtr load_model(const std::filesystem::path& path);

/// A model trained on a subset of the features, applied to full-schema instances.
class ProjectedClassifier final : public Classifier {
 public:
  ProjectedClassifier(Schema full_features, std::vector<std::size_t> indices, ModelPtr inner);

  std::string_view type() const override { return "projected"; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  const Classifier& inner() const { return *inner_; }

  Instance project(const Instance& x) const;

  nlohmann::json to_json() const override;
  static ModelPtr from_json(const nlohmann::json& doc);

 protected:
  ClassDistribution predict_checked(const Instance& x) const override;

 private:
  std::vector<std::size_t> indices_;
  ModelPtr inner_;
};

}  // namespace mcls

#endif  // MCLS_CLASSIFIER_HPP
