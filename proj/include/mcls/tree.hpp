#ifndef MCLS_TREE_HPP
#define MCLS_TREE_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "mcls/classifier.hpp"

namespace mcls {

struct TreeParams {
  int min_leaf = 2;
  int max_depth = 25;
  /// Dirichlet pseudo-count added to each class at the leaves (1 = Laplace).
  double leaf_alpha = 1.0;
  /// Split chosen uniformly among the `random_top` best candidates; 1 is deterministic.
  int random_top = 1;
  std::uint64_t seed = 0;
};

/// Gains at or below this are treated as zero.
inline constexpr double kMinInformationGain = 1e-12;

class TreeModel final : public Classifier {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    bool categorical = false;
    double threshold = 0.0;  // numeric: left branch takes x <= threshold
    std::array<double, 2> counts{0.0, 0.0};
    std::vector<int> children;  // categorical: one per category, -1 when no training row reached it
    double gain = 0.0;

    bool is_leaf() const { return feature < 0; }
  };

  TreeModel(Schema features, std::vector<Node> nodes, double leaf_alpha);

  std::string_view type() const override { return "tree"; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  double root_gain() const { return root().is_leaf() ? 0.0 : root().gain; }
  double leaf_alpha() const { return leaf_alpha_; }
  int depth() const;
  std::size_t leaf_count() const;

  /// Smoothed class distribution from a node's (weighted) class counts.
  ClassDistribution distribution(const Node& node) const;

  /// Node reached by `x`: a leaf, or an internal node whose branch is empty.
  const Node& route(const Instance& x) const;

  nlohmann::json to_json() const override;
  static std::shared_ptr<const TreeModel> from_json(const nlohmann::json& doc);

 protected:
  ClassDistribution predict_checked(const Instance& x) const override;

 private:
  std::vector<Node> nodes_;
  double leaf_alpha_;
};

/// Recursive information-gain tree. Numeric tests are binary thresholds at
/// midpoints between distinct values; categorical tests split one way per
/// category. Instance weights act as fractional counts.
std::shared_ptr<const TreeModel> train_tree(const Dataset& train, const TreeParams& params = {});

}  // namespace mcls

#endif  // MCLS_TREE_HPP
