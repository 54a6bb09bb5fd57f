#include "mcls/knn.hpp"

#include <algorithm>
#include <numeric>

namespace mcls {

namespace {

Eigen::VectorXd unit_query(const Encoder& encoder, const Instance& x) {
  Eigen::VectorXd q = encoder.encode(x);
  const double norm = q.norm();
  if (!(norm > 0.0)) throw Error("undefined cosine: instance encodes to the zero vector");
  return q / norm;
}

}  // namespace

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw Error("undefined cosine: zero-norm vector");
  return a.dot(b) / (na * nb);
}

std::vector<Eigen::Index> top_k_by_similarity(const Eigen::MatrixXd& unit_rows, const Eigen::VectorXd& unit_query,
                                              Eigen::Index k) {
  const Eigen::VectorXd sims = unit_rows * unit_query;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(sims.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  k = std::min<Eigen::Index>(k, sims.size());
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return sims[a] > sims[b] || (sims[a] == sims[b] && a < b);
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

KnnModel::KnnModel(Schema features, Encoder encoder, Eigen::MatrixXd unit_rows, std::vector<int> labels, int k,
                   std::vector<std::pair<int, double>> validation_errors)
    : Classifier(std::move(features)),
      encoder_(std::move(encoder)),
      unit_rows_(std::move(unit_rows)),
      labels_(std::move(labels)),
      k_(k),
      validation_errors_(std::move(validation_errors)) {
  if (k_ < 1 || static_cast<std::size_t>(k_) > labels_.size()) throw Error("k must lie in [1, stored instance count]");
  if (static_cast<std::size_t>(unit_rows_.rows()) != labels_.size()) throw Error("k-NN rows and labels differ in count");
}

std::vector<Eigen::Index> KnnModel::neighbours(const Instance& x) const {
  check_instance(features(), x);
  return top_k_by_similarity(unit_rows_, unit_query(encoder_, x), k_);
}

ClassDistribution KnnModel::predict_checked(const Instance& x) const {
  const auto nearest = top_k_by_similarity(unit_rows_, unit_query(encoder_, x), k_);
  double ones = 0.0;
  for (auto i : nearest) ones += labels_[static_cast<std::size_t>(i)];
  const double p1 = ones / static_cast<double>(nearest.size());
  return ClassDistribution::from_p1(p1);
}

nlohmann::json KnnModel::to_json() const {
  auto doc = header_json();
  doc["encoder"] = encoder_.to_json();
  doc["k"] = k_;
  doc["labels"] = labels_;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < unit_rows_.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(unit_rows_.cols()));
    for (Eigen::Index j = 0; j < unit_rows_.cols(); ++j) row[static_cast<std::size_t>(j)] = unit_rows_(i, j);
    rows.push_back(row);
  }
  doc["unit_rows"] = std::move(rows);
  doc["validation_errors"] = validation_errors_;
  return doc;
}

std::shared_ptr<const KnnModel> KnnModel::from_json(const nlohmann::json& doc) {
  auto features = schema_from_json(doc.at("features"));
  auto encoder = Encoder::from_json(doc.at("encoder"), features);
  const auto& rows = doc.at("unit_rows");
  Eigen::MatrixXd unit_rows(static_cast<Eigen::Index>(rows.size()), encoder.width());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = rows[i].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != encoder.width()) throw Error("k-NN row width mismatch");
    for (std::size_t j = 0; j < row.size(); ++j) unit_rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return std::make_shared<KnnModel>(std::move(features), std::move(encoder), std::move(unit_rows),
                                    doc.at("labels").get<std::vector<int>>(), doc.at("k").get<int>(),
                                    doc.at("validation_errors").get<std::vector<std::pair<int, double>>>());
}

std::shared_ptr<const KnnModel> train_knn(const Dataset& train, const Dataset& validation, const KnnParams& params) {
  if (params.k_candidates.empty()) throw Error("k-NN needs at least one candidate k");
  if (train.empty()) throw Error("k-NN needs a non-empty training set");
  if (validation.empty()) throw Error("k-NN needs a non-empty validation set");

  std::vector<int> candidates;
  for (int k : params.k_candidates) {
    if (k < 1) throw Error("k-NN candidates must be positive");
    if (static_cast<std::size_t>(k) <= train.size()) candidates.push_back(k);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) candidates.push_back(1);

  const Encoder encoder = Encoder::fit(train);
  Eigen::MatrixXd unit_rows = normalize_rows(encoder.encode(train));
  const auto labels = train.labels();

  // One neighbour ranking per validation row serves every candidate.
  const Eigen::Index k_max = candidates.back();
  std::vector<std::size_t> mistakes(candidates.size(), 0);
  std::size_t scored = 0;
  for (const auto& v : validation.instances()) {
    Eigen::VectorXd q = encoder.encode(v);
    const double norm = q.norm();
    if (!(norm > 0.0)) continue;
    const auto nearest = top_k_by_similarity(unit_rows, q / norm, k_max);
    ++scored;
    std::size_t ones = 0;
    std::size_t taken = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      while (taken < static_cast<std::size_t>(candidates[c])) ones += static_cast<std::size_t>(labels[static_cast<std::size_t>(nearest[taken++])]);
      const int predicted = 2 * ones > taken ? 1 : 0;
      if (predicted != v.label) ++mistakes[c];
    }
  }
  std::vector<std::pair<int, double>> errors;
  std::size_t best = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double err = scored ? static_cast<double>(mistakes[c]) / static_cast<double>(scored) : 0.0;
    errors.emplace_back(candidates[c], err);
    if (err < errors[best].second) best = c;
  }
  int k = candidates[best];
  if (params.k_jitter != 0) {
    k = std::clamp(k + params.k_jitter, candidates.front(), candidates.back());
  }
  return std::make_shared<KnnModel>(train.features(), encoder, std::move(unit_rows), labels, k, std::move(errors));
}

}  // namespace mcls
