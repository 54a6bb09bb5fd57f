#ifndef MCLS_ENCODING_HPP
#define MCLS_ENCODING_HPP

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mcls/dataset.hpp"

namespace mcls {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense design-matrix encoding shared by the vector-space learners.
/// Numeric features are z-scored with training statistics; categorical
/// features expand to one indicator per category.
class Encoder {
 public:
  Encoder() = default;

  static Encoder fit(const Dataset& train);

  Eigen::Index width() const { return width_; }
  const Schema& features() const { return features_; }

  Eigen::VectorXd encode(const Instance& x) const;

  /// One row per instance.
  Eigen::MatrixXd encode(const Dataset& ds) const;

  nlohmann::json to_json() const;
  static Encoder from_json(const nlohmann::json& doc, const Schema& features);

 private:
  Schema features_;
  std::vector<Eigen::Index> offsets_;
  std::vector<double> means_;
  std::vector<double> scales_;
  Eigen::Index width_ = 0;
};

/// Rows scaled to unit Euclidean norm; zero rows stay zero.
Eigen::MatrixXd normalize_rows(Eigen::MatrixXd rows);

}  // namespace mcls

#endif  // MCLS_ENCODING_HPP
