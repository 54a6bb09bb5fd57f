#ifndef MCLS_NBC_HPP
#define MCLS_NBC_HPP

#include <array>
#include <memory>
#include <vector>

#include "mcls/classifier.hpp"

namespace mcls {

struct NbcParams {
  double alpha = 1.0;
};

inline constexpr double kNbcVarianceFloor = 1e-9;

class NbcModel final : public Classifier {
 public:
  /// Per-feature conditional model. Categorical features use `table[class][category]`;
  /// numeric features use a Gaussian with `mean[class]` and `variance[class]`.
  struct Conditional {
    std::array<std::vector<double>, 2> table;
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> variance{1.0, 1.0};
  };

  NbcModel(Schema features, std::array<double, 2> priors, std::vector<Conditional> conditionals, double alpha);

  std::string_view type() const override { return "nbc"; }

  const std::array<double, 2>& priors() const { return priors_; }
  const std::vector<Conditional>& conditionals() const { return conditionals_; }
  double alpha() const { return alpha_; }

  /// P(feature = value | class), or the Gaussian density for numeric features.
  double likelihood(std::size_t feature, int cls, double value) const;

  nlohmann::json to_json() const override;
  static std::shared_ptr<const NbcModel> from_json(const nlohmann::json& doc);

 protected:
  ClassDistribution predict_checked(const Instance& x) const override;

 private:
  std::array<double, 2> priors_;
  std::vector<Conditional> conditionals_;
  double alpha_;
};

/// Dirichlet-smoothed frequency tables for categorical features, Gaussian
/// conditionals for numeric ones, Laplace-smoothed priors.
std::shared_ptr<const NbcModel> train_nbc(const Dataset& train, const NbcParams& params = {});

}  // namespace mcls

#endif  // MCLS_NBC_HPP
