#include "mcls/ann.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace mcls {

AnnModel::AnnModel(Schema features, Encoder encoder, AnnLayout layout, Eigen::VectorXd params,
                   std::vector<AnnCandidateReport> report)
    : Classifier(std::move(features)),
      encoder_(std::move(encoder)),
      layout_(layout),
      params_(std::move(params)),
      report_(std::move(report)) {
  if (layout_.inputs != encoder_.width()) throw Error("network input width does not match the encoding");
  if (params_.size() != layout_.size()) throw Error("network parameter count does not match its layout");
}

double AnnModel::output(const Instance& x) const {
  check_instance(features(), x);
  return predict_checked(x)[1];
}

ClassDistribution AnnModel::predict_checked(const Instance& x) const {
  const Eigen::MatrixXd row = encoder_.encode(x).transpose();
  const auto [H, out] = ann_forward<double>(row, params_, layout_);
  return ClassDistribution::from_p1(out[0]);
}

nlohmann::json AnnModel::to_json() const {
  auto doc = header_json();
  doc["encoder"] = encoder_.to_json();
  doc["hidden"] = layout_.hidden;
  doc["parameters"] = std::vector<double>(params_.data(), params_.data() + params_.size());
  nlohmann::json report = nlohmann::json::array();
  for (const auto& r : report_) {
    report.push_back({{"hidden", r.hidden}, {"validation_sse", r.diverged ? nlohmann::json() : nlohmann::json(r.validation_sse)},
                      {"diverged", r.diverged}});
  }
  doc["report"] = std::move(report);
  return doc;
}

std::shared_ptr<const AnnModel> AnnModel::from_json(const nlohmann::json& doc) {
  auto features = schema_from_json(doc.at("features"));
  auto encoder = Encoder::from_json(doc.at("encoder"), features);
  const AnnLayout layout{encoder.width(), doc.at("hidden").get<Eigen::Index>()};
  auto p = doc.at("parameters").get<std::vector<double>>();
  std::vector<AnnCandidateReport> report;
  for (const auto& r : doc.at("report")) {
    const bool diverged = r.at("diverged").get<bool>();
    report.push_back({r.at("hidden").get<int>(),
                      diverged ? std::numeric_limits<double>::quiet_NaN() : r.at("validation_sse").get<double>(),
                      diverged});
  }
  return std::make_shared<AnnModel>(std::move(features), std::move(encoder), layout,
                                    Eigen::Map<Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())),
                                    std::move(report));
}

std::shared_ptr<const AnnModel> train_ann(const Dataset& train, const Dataset& validation, const AnnParams& params) {
  if (params.hidden_candidates.empty()) throw Error("ANN needs at least one hidden-node candidate");
  if (train.empty()) throw Error("ANN needs a non-empty training set");
  if (validation.empty()) throw Error("ANN needs a non-empty validation set");
  if (params.epochs < 0 || !(params.learning_rate > 0.0)) throw Error("ANN epochs must be >= 0 and learning rate > 0");

  const Encoder encoder = Encoder::fit(train);
  const Eigen::MatrixXd X = encoder.encode(train);
  const Eigen::MatrixXd Xv = encoder.encode(validation);
  Eigen::VectorXd y(X.rows()), w(X.rows()), yv(Xv.rows());
  for (std::size_t i = 0; i < train.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = train[i].label;
    w[static_cast<Eigen::Index>(i)] = train[i].weight;
  }
  for (std::size_t i = 0; i < validation.size(); ++i) yv[static_cast<Eigen::Index>(i)] = validation[i].label;

  std::vector<AnnCandidateReport> report;
  std::optional<std::size_t> best;
  Eigen::VectorXd best_params;
  AnnLayout best_layout;
  for (std::size_t c = 0; c < params.hidden_candidates.size(); ++c) {
    const int hidden = params.hidden_candidates[c];
    if (hidden < 1) throw Error("hidden-node candidates must be positive");
    const AnnLayout layout{X.cols(), hidden};
    Rng rng(derive_seed(params.seed, {static_cast<std::uint64_t>(hidden)}));
    Eigen::VectorXd theta(layout.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-0.5, 0.5);

    bool diverged = false;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      const Eigen::VectorXd grad = ann_gradient(X, y, w, theta, layout);
      if (!grad.allFinite()) {
        diverged = true;
        break;
      }
      theta -= params.learning_rate * grad;
    }
    double sse = std::numeric_limits<double>::quiet_NaN();
    if (!diverged) {
      const auto [H, out] = ann_forward<double>(Xv, theta, layout);
      sse = (out - yv).squaredNorm();
      if (!std::isfinite(sse) || !theta.allFinite()) diverged = true;
    }
    report.push_back({hidden, sse, diverged});
    if (diverged) continue;
    const auto& incumbent = best ? report[*best] : report.back();
    if (!best || sse < incumbent.validation_sse ||
        (sse == incumbent.validation_sse && hidden < incumbent.hidden)) {
      best = report.size() - 1;
      best_params = theta;
      best_layout = layout;
    }
  }
  if (!best) throw Error("ANN training diverged for every hidden-node candidate");
  return std::make_shared<AnnModel>(train.features(), encoder, best_layout, std::move(best_params),
                                    std::move(report));
}

}  // namespace mcls
