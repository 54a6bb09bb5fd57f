#ifndef MCLS_ANN_HPP
#define MCLS_ANN_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "mcls/classifier.hpp"
#include "mcls/encoding.hpp"
#include "mcls/logistic.hpp"

namespace mcls {

struct AnnParams {
  std::vector<int> hidden_candidates{1, 2, 4, 8};
  int epochs = 1000;
  double learning_rate = 2.0;
  std::uint64_t seed = 0;
};

/// Parameter layout of a one-hidden-layer network with a single output unit:
/// W1 (hidden x inputs, column-major), b1 (hidden), w2 (hidden), b2.
struct AnnLayout {
  Eigen::Index inputs = 0;
  Eigen::Index hidden = 0;

  Eigen::Index size() const { return hidden * inputs + 2 * hidden + 1; }
};

/// Hidden activations (rows x hidden) and outputs for packed parameters.
template <typename Scalar>
std::pair<MatrixX<Scalar>, VectorX<Scalar>> ann_forward(const MatrixX<Scalar>& X, const VectorX<Scalar>& params,
                                                        const AnnLayout& layout) {
  const Eigen::Index h = layout.hidden;
  const Eigen::Index d = layout.inputs;
  const Eigen::Map<const MatrixX<Scalar>> W1(params.data(), h, d);
  const auto b1 = params.segment(h * d, h);
  const auto w2 = params.segment(h * d + h, h);
  const Scalar b2 = params[h * d + 2 * h];
  MatrixX<Scalar> H = (X * W1.transpose()).rowwise() + b1.transpose();
  H = (Scalar(1) + (-H.array()).exp()).inverse().matrix();
  VectorX<Scalar> out = (Scalar(1) + (-((H * w2).array() + b2)).exp()).inverse().matrix();
  return {std::move(H), std::move(out)};
}

/// Weighted half sum-of-squares error divided by the total weight.
template <typename Scalar>
Scalar ann_loss(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& w,
                const VectorX<Scalar>& params, const AnnLayout& layout) {
  const auto [H, out] = ann_forward(X, params, layout);
  return Scalar(0.5) * (w.array() * (out - y).array().square()).sum() / w.sum();
}

/// Backpropagated gradient of ann_loss.
template <typename Scalar>
VectorX<Scalar> ann_gradient(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& w,
                             const VectorX<Scalar>& params, const AnnLayout& layout) {
  const Eigen::Index h = layout.hidden;
  const Eigen::Index d = layout.inputs;
  const auto [H, out] = ann_forward(X, params, layout);
  const auto w2 = params.segment(h * d + h, h);
  const VectorX<Scalar> delta_out =
      (w.array() * (out - y).array() * out.array() * (Scalar(1) - out.array())).matrix() / w.sum();
  const MatrixX<Scalar> delta_hidden =
      ((delta_out * w2.transpose()).array() * H.array() * (Scalar(1) - H.array())).matrix();
  VectorX<Scalar> grad(layout.size());
  Eigen::Map<MatrixX<Scalar>>(grad.data(), h, d) = delta_hidden.transpose() * X;
  grad.segment(h * d, h) = delta_hidden.colwise().sum().transpose();
  grad.segment(h * d + h, h) = H.transpose() * delta_out;
  grad[h * d + 2 * h] = delta_out.sum();
  return grad;
}

struct AnnCandidateReport {
  int hidden = 0;
  double validation_sse = 0.0;
  bool diverged = false;
};

class AnnModel final : public Classifier {
 public:
  AnnModel(Schema features, Encoder encoder, AnnLayout layout, Eigen::VectorXd params,
           std::vector<AnnCandidateReport> report);

  std::string_view type() const override { return "ann"; }

  int hidden_count() const { return static_cast<int>(layout_.hidden); }
  const AnnLayout& layout() const { return layout_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  const std::vector<AnnCandidateReport>& report() const { return report_; }

  /// Output-unit activation, the class-1 probability.
  double output(const Instance& x) const;

  nlohmann::json to_json() const override;
  static std::shared_ptr<const AnnModel> from_json(const nlohmann::json& doc);

 protected:
  ClassDistribution predict_checked(const Instance& x) const override;

 private:
  Encoder encoder_;
  AnnLayout layout_;
  Eigen::VectorXd params_;
  std::vector<AnnCandidateReport> report_;
};

/// Trains one network per hidden-node candidate by full-batch gradient
/// descent and keeps the one with the lowest validation SSE (ties: fewer nodes).
std::shared_ptr<const AnnModel> train_ann(const Dataset& train, const Dataset& validation,
                                          const AnnParams& params = {});

}  // namespace mcls

#endif  // MCLS_ANN_HPP
