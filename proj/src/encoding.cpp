#include "mcls/encoding.hpp"

#include <cmath>

namespace mcls {

Encoder Encoder::fit(const Dataset& train) {
  Encoder enc;
  enc.features_ = train.features();
  const std::size_t p = train.feature_count();
  enc.offsets_.resize(p);
  enc.means_.assign(p, 0.0);
  enc.scales_.assign(p, 1.0);
  Eigen::Index offset = 0;
  for (std::size_t j = 0; j < p; ++j) {
    enc.offsets_[j] = offset;
    const auto& f = enc.features_[j];
    if (f.is_categorical()) {
      offset += static_cast<Eigen::Index>(f.categories.size());
      continue;
    }
    offset += 1;
    if (train.empty()) continue;
    double mean = 0.0;
    for (const auto& x : train.instances()) mean += x.values[j];
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (const auto& x : train.instances()) var += (x.values[j] - mean) * (x.values[j] - mean);
    var /= static_cast<double>(train.size());
    enc.means_[j] = mean;
    enc.scales_[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  enc.width_ = offset;
  return enc;
}

Eigen::VectorXd Encoder::encode(const Instance& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(width_);
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (features_[j].is_categorical()) {
      out[offsets_[j] + static_cast<Eigen::Index>(x.values[j])] = 1.0;
    } else {
      out[offsets_[j]] = (x.values[j] - means_[j]) / scales_[j];
    }
  }
  return out;
}

Eigen::MatrixXd Encoder::encode(const Dataset& ds) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ds.size()), width_);
  for (std::size_t i = 0; i < ds.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = encode(ds[i]).transpose();
  return out;
}

nlohmann::json Encoder::to_json() const {
  return {{"means", means_}, {"scales", scales_}};
}

Encoder Encoder::from_json(const nlohmann::json& doc, const Schema& features) {
  Encoder enc;
  enc.features_ = features;
  enc.means_ = doc.at("means").get<std::vector<double>>();
  enc.scales_ = doc.at("scales").get<std::vector<double>>();
  if (enc.means_.size() != features.size() || enc.scales_.size() != features.size()) {
    throw Error("encoder statistics do not match the schema");
  }
  Eigen::Index offset = 0;
  for (const auto& f : features) {
    enc.offsets_.push_back(offset);
    offset += f.is_categorical() ? static_cast<Eigen::Index>(f.categories.size()) : 1;
  }
  enc.width_ = offset;
  return enc;
}

Eigen::MatrixXd normalize_rows(Eigen::MatrixXd rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (norm > 0.0) rows.row(i) /= norm;
  }
  return rows;
}

}  // namespace mcls
