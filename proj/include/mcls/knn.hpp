#ifndef MCLS_KNN_HPP
#define MCLS_KNN_HPP

#include <memory>
#include <vector>

#include "mcls/classifier.hpp"
#include "mcls/encoding.hpp"

namespace mcls {

struct KnnParams {
  std::vector<int> k_candidates{1, 3, 5, 7, 9};
  /// Offset applied to the selected k, clamped to the candidate range.
  int k_jitter = 0;
};

/// Cosine similarity; throws Error when either vector has zero norm.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Indices of the k rows of `unit_rows` most similar to `unit_query`.
/// Equal similarities keep row order.
std::vector<Eigen::Index> top_k_by_similarity(const Eigen::MatrixXd& unit_rows, const Eigen::VectorXd& unit_query,
                                              Eigen::Index k);

class KnnModel final : public Classifier {
 public:
  KnnModel(Schema features, Encoder encoder, Eigen::MatrixXd unit_rows, std::vector<int> labels, int k,
           std::vector<std::pair<int, double>> validation_errors);

  std::string_view type() const override { return "knn"; }

  int k() const { return k_; }
  std::size_t stored_count() const { return labels_.size(); }

  /// Validation 0/1 error per evaluated candidate k.
  const std::vector<std::pair<int, double>>& validation_errors() const { return validation_errors_; }

  /// Training-row indices of the k nearest stored instances.
  std::vector<Eigen::Index> neighbours(const Instance& x) const;

  nlohmann::json to_json() const override;
  static std::shared_ptr<const KnnModel> from_json(const nlohmann::json& doc);

 protected:
  ClassDistribution predict_checked(const Instance& x) const override;

 private:
  Encoder encoder_;
  Eigen::MatrixXd unit_rows_;
  std::vector<int> labels_;
  int k_;
  std::vector<std::pair<int, double>> validation_errors_;
};

/// Picks k by validation 0/1 error; ties go to the smallest k.
std::shared_ptr<const KnnModel> train_knn(const Dataset& train, const Dataset& validation,
                                          const KnnParams& params = {});

/// p(c) = share of class c among the k cosine-nearest training instances.
inline ClassDistribution predict_knn(const KnnModel& model, const Instance& x) { return model.predict_proba(x); }

}  // namespace mcls

#endif  // MCLS_KNN_HPP
