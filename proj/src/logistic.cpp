#include "mcls/logistic.hpp"

#include <algorithm>
#include <numeric>

namespace mcls {

LogisticModel::LogisticModel(Schema features, Encoder encoder, Eigen::VectorXd weights, double bias, double cutoff,
                             bool separated, int iterations, double gradient_norm)
    : Classifier(std::move(features)),
      encoder_(std::move(encoder)),
      weights_(std::move(weights)),
      bias_(bias),
      cutoff_(cutoff),
      separated_(separated),
      iterations_(iterations),
      gradient_norm_(gradient_norm) {
  if (!(cutoff_ > 0.0 && cutoff_ < 1.0)) throw Error("logistic cutoff must lie in (0, 1)");
  if (weights_.size() != encoder_.width()) throw Error("logistic weight count does not match the encoding");
}

double LogisticModel::probability(const Instance& x) const {
  check_instance(features(), x);
  return logistic_sigmoid(encoder_.encode(x).dot(weights_) + bias_);
}

int LogisticModel::classify(const Instance& x) const { return probability(x) >= cutoff_ ? 1 : 0; }

ClassDistribution LogisticModel::predict_checked(const Instance& x) const {
  return ClassDistribution::from_p1(logistic_sigmoid(encoder_.encode(x).dot(weights_) + bias_));
}

nlohmann::json LogisticModel::to_json() const {
  auto doc = header_json();
  doc["encoder"] = encoder_.to_json();
  doc["weights"] = std::vector<double>(weights_.data(), weights_.data() + weights_.size());
  doc["bias"] = bias_;
  doc["cutoff"] = cutoff_;
  doc["separated"] = separated_;
  doc["iterations"] = iterations_;
  doc["gradient_norm"] = gradient_norm_;
  return doc;
}

std::shared_ptr<const LogisticModel> LogisticModel::from_json(const nlohmann::json& doc) {
  auto features = schema_from_json(doc.at("features"));
  auto encoder = Encoder::from_json(doc.at("encoder"), features);
  auto w = doc.at("weights").get<std::vector<double>>();
  return std::make_shared<LogisticModel>(std::move(features), std::move(encoder),
                                         Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                                         doc.at("bias").get<double>(), doc.at("cutoff").get<double>(),
                                         doc.at("separated").get<bool>(), doc.at("iterations").get<int>(),
                                         doc.at("gradient_norm").get<double>());
}

std::shared_ptr<const LogisticModel> train_logistic(const Dataset& train, const LogisticParams& params) {
  if (!train.has_both_classes()) throw Error("logistic discrimination needs both classes in the training data");
  if (!(params.subsample > 0.0 && params.subsample <= 1.0)) throw Error("logistic subsample must lie in (0, 1]");

  Dataset fit_data = train;
  if (params.subsample < 1.0) {
    std::vector<std::size_t> rows(train.size());
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(params.seed);
    rng.shuffle(rows);
    const auto keep = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(params.subsample * static_cast<double>(train.size()))));
    rows.resize(std::min(keep, rows.size()));
    std::sort(rows.begin(), rows.end());
    auto candidate = train.subset(rows);
    if (candidate.has_both_classes()) fit_data = std::move(candidate);
  }

  const Encoder encoder = Encoder::fit(fit_data);
  const Eigen::MatrixXd X = encoder.encode(fit_data);
  Eigen::VectorXd y(X.rows());
  Eigen::VectorXd w(X.rows());
  for (std::size_t i = 0; i < fit_data.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = fit_data[i].label;
    w[static_cast<Eigen::Index>(i)] = fit_data[i].weight;
  }
  const Eigen::Index d = X.cols();

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  double loss = logistic_loss(X, y, w, theta);
  double step = 1.0;
  double grad_norm = 0.0;
  int iter = 0;
  for (; iter < params.max_iters; ++iter) {
    const Eigen::VectorXd grad = logistic_gradient(X, y, w, theta);
    grad_norm = grad.norm();
    if (grad_norm <= params.tolerance) break;
    // Armijo backtracking: halve until sufficient decrease
    bool accepted = false;
    while (step > 1e-14) {
      Eigen::VectorXd candidate = theta - step * grad;
      const double norm = candidate.head(d).norm();
      if (norm > kLogisticWeightNormCap) candidate.head(d) *= kLogisticWeightNormCap / norm;
      const double candidate_loss = logistic_loss(X, y, w, candidate);
      if (candidate_loss <= loss - 1e-4 * step * grad_norm * grad_norm) {
        theta = std::move(candidate);
        loss = candidate_loss;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step *= 2.0;
  }

  const Eigen::VectorXd z = (X * theta.head(d)).array() + theta[d];
  bool separated = true;
  for (Eigen::Index i = 0; i < z.size() && separated; ++i) {
    if (w[i] <= 0.0) continue;
    if ((y[i] > 0.5) ? !(z[i] > 0.0) : !(z[i] < 0.0)) separated = false;
  }
  return std::make_shared<LogisticModel>(train.features(), encoder, theta.head(d), theta[d], params.cutoff,
                                         separated, iter, grad_norm);
}

}  // namespace mcls
