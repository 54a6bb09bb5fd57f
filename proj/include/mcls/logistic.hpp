#ifndef MCLS_LOGISTIC_HPP
#define MCLS_LOGISTIC_HPP

#include <cmath>
#include <cstdint>
#include <memory>

#include "mcls/classifier.hpp"
#include "mcls/encoding.hpp"

namespace mcls {

struct LogisticParams {
  int max_iters = 500;
  double tolerance = 1e-6;
  double cutoff = 0.5;
  /// Fraction of rows used for fitting; values below 1 draw a seeded subsample.
  double subsample = 1.0;
  std::uint64_t seed = 0;
};

inline constexpr double kLogisticWeightNormCap = 1e3;

template <typename Scalar>
Scalar logistic_sigmoid(Scalar z) {
  using std::exp;
  return z >= Scalar(0) ? Scalar(1) / (Scalar(1) + exp(-z)) : exp(z) / (Scalar(1) + exp(z));
}

// log(1 + exp(z)) without overflow
template <typename Scalar>
Scalar softplus(Scalar z) {
  using std::exp;
  using std::log1p;
  return z > Scalar(0) ? z + log1p(exp(-z)) : log1p(exp(z));
}

/// Weighted mean negative log-likelihood. `theta` holds the feature weights
/// followed by the bias.
template <typename Scalar>
Scalar logistic_loss(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& w,
                     const VectorX<Scalar>& theta) {
  const Eigen::Index d = X.cols();
  const VectorX<Scalar> z = (X * theta.head(d)).array() + theta[d];
  Scalar total(0);
  for (Eigen::Index i = 0; i < X.rows(); ++i) total += w[i] * (softplus(z[i]) - y[i] * z[i]);
  return total / w.sum();
}

template <typename Scalar>
VectorX<Scalar> logistic_gradient(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& w,
                                  const VectorX<Scalar>& theta) {
  const Eigen::Index d = X.cols();
  const VectorX<Scalar> z = (X * theta.head(d)).array() + theta[d];
  VectorX<Scalar> residual(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) residual[i] = w[i] * (logistic_sigmoid(z[i]) - y[i]);
  VectorX<Scalar> grad(d + 1);
  grad.head(d) = X.transpose() * residual;
  grad[d] = residual.sum();
  return grad / w.sum();
}

class LogisticModel final : public Classifier {
 public:
  LogisticModel(Schema features, Encoder encoder, Eigen::VectorXd weights, double bias, double cutoff,
                bool separated, int iterations, double gradient_norm);

  std::string_view type() const override { return "logistic"; }

  /// pi = logistic(w . x + b), the class-1 probability.
  double probability(const Instance& x) const;

  /// Class decision at the configured cutoff.
  int classify(const Instance& x) const;

  const Eigen::VectorXd& weights() const { return weights_; }
  double bias() const { return bias_; }
  double cutoff() const { return cutoff_; }
  const Encoder& encoder() const { return encoder_; }

  /// True when the fitted hyperplane separates the training data perfectly.
  bool separated() const { return separated_; }
  int iterations() const { return iterations_; }
  double gradient_norm() const { return gradient_norm_; }

  nlohmann::json to_json() const override;
  static std::shared_ptr<const LogisticModel> from_json(const nlohmann::json& doc);

 protected:
  ClassDistribution predict_checked(const Instance& x) const override;

 private:
  Encoder encoder_;
  Eigen::VectorXd weights_;
  double bias_;
  double cutoff_;
  bool separated_;
  int iterations_;
  double gradient_norm_;
};

/// Gradient descent with backtracking step halving on the weighted
/// log-likelihood. Requires both classes.
std::shared_ptr<const LogisticModel> train_logistic(const Dataset& train, const LogisticParams& params = {});

}  // namespace mcls

#endif  // MCLS_LOGISTIC_HPP
