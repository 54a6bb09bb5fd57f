#include "mcls/tree.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace mcls {

namespace {

struct SplitCandidate {
  int feature = -1;
  bool categorical = false;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params) : data_(data), params_(params), rng_(params.seed) {
    // fractional counts on the scale of the row count
    const double total = data.total_weight();
    weights_.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      weights_[i] = total > 0.0 ? data[i].weight * static_cast<double>(data.size()) / total : 1.0;
    }
  }

  std::vector<TreeModel::Node> build() {
    std::vector<std::size_t> rows(data_.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  std::array<double, 2> counts_of(const std::vector<std::size_t>& rows) const {
    std::array<double, 2> c{0.0, 0.0};
    for (auto r : rows) c[static_cast<std::size_t>(data_[r].label)] += weights_[r];
    return c;
  }

  std::vector<SplitCandidate> candidates(const std::vector<std::size_t>& rows, const std::array<double, 2>& counts) const {
    std::vector<SplitCandidate> out;
    const double parent_h = entropy_bits(counts);
    const double total = counts[0] + counts[1];
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf));
    for (std::size_t j = 0; j < data_.feature_count(); ++j) {
      const auto& f = data_.features()[j];
      if (f.is_categorical()) {
        const std::size_t k = f.categories.size();
        std::vector<std::array<double, 2>> branch(k, {0.0, 0.0});
        std::vector<std::size_t> branch_rows(k, 0);
        for (auto r : rows) {
          const auto c = static_cast<std::size_t>(data_[r].values[j]);
          branch[c][static_cast<std::size_t>(data_[r].label)] += weights_[r];
          ++branch_rows[c];
        }
        std::size_t non_empty = 0;
        bool too_small = false;
        double child_h = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
          if (branch_rows[c] == 0) continue;
          ++non_empty;
          if (branch_rows[c] < min_leaf) too_small = true;
          child_h += (branch[c][0] + branch[c][1]) / total * entropy_bits(branch[c]);
        }
        if (non_empty < 2 || too_small) continue;
        const double gain = parent_h - child_h;
        if (gain > kMinInformationGain) out.push_back({static_cast<int>(j), true, 0.0, gain});
      } else {
        std::vector<std::size_t> sorted = rows;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [&](std::size_t a, std::size_t b) { return data_[a].values[j] < data_[b].values[j]; });
        std::array<double, 2> left{0.0, 0.0};
        for (std::size_t i = 1; i < sorted.size(); ++i) {
          const auto& prev = data_[sorted[i - 1]];
          left[static_cast<std::size_t>(prev.label)] += weights_[sorted[i - 1]];
          const double lo = prev.values[j];
          const double hi = data_[sorted[i]].values[j];
          if (!(lo < hi)) continue;
          if (i < min_leaf || sorted.size() - i < min_leaf) continue;
          const std::array<double, 2> right{counts[0] - left[0], counts[1] - left[1]};
          const double wl = left[0] + left[1];
          const double gain = parent_h - (wl / total) * entropy_bits(left) - ((total - wl) / total) * entropy_bits(right);
          if (gain <= kMinInformationGain) continue;
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          out.push_back({static_cast<int>(j), false, threshold, gain});
        }
      }
    }
    return out;
  }

  std::optional<SplitCandidate> choose(std::vector<SplitCandidate> cands) {
    if (cands.empty()) return std::nullopt;
    const auto better = [](const SplitCandidate& a, const SplitCandidate& b) {
      if (a.gain > b.gain + kMinInformationGain) return true;
      if (b.gain > a.gain + kMinInformationGain) return false;
      if (a.feature != b.feature) return a.feature < b.feature;
      return a.threshold < b.threshold;
    };
    if (params_.random_top <= 1) {
      // candidates arrive ordered by feature, then threshold
      SplitCandidate best = cands.front();
      for (const auto& c : cands) {
        if (c.gain > best.gain + kMinInformationGain) best = c;
      }
      return best;
    }
    std::stable_sort(cands.begin(), cands.end(), better);
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(params_.random_top), cands.size());
    return cands[rng_.index(top)];
  }

  int grow(const std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(id)].counts = counts_of(rows);
    const auto counts = nodes_[static_cast<std::size_t>(id)].counts;
    if (depth >= params_.max_depth || counts[0] <= 0.0 || counts[1] <= 0.0) return id;

    auto split = choose(candidates(rows, counts));
    if (!split) return id;

    std::vector<int> children;
    if (split->categorical) {
      const auto k = data_.features()[static_cast<std::size_t>(split->feature)].categories.size();
      std::vector<std::vector<std::size_t>> parts(k);
      for (auto r : rows) parts[static_cast<std::size_t>(data_[r].values[static_cast<std::size_t>(split->feature)])].push_back(r);
      for (const auto& part : parts) children.push_back(part.empty() ? -1 : grow(part, depth + 1));
    } else {
      std::vector<std::size_t> left, right;
      for (auto r : rows) {
        (data_[r].values[static_cast<std::size_t>(split->feature)] <= split->threshold ? left : right).push_back(r);
      }
      children.push_back(grow(left, depth + 1));
      children.push_back(grow(right, depth + 1));
    }
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split->feature;
    node.categorical = split->categorical;
    node.threshold = split->threshold;
    node.gain = split->gain;
    node.children = std::move(children);
    return id;
  }

  const Dataset& data_;
  TreeParams params_;
  Rng rng_;
  std::vector<double> weights_;
  std::vector<TreeModel::Node> nodes_;
};

}  // namespace

TreeModel::TreeModel(Schema features, std::vector<Node> nodes, double leaf_alpha)
    : Classifier(std::move(features)), nodes_(std::move(nodes)), leaf_alpha_(leaf_alpha) {
  if (nodes_.empty()) throw Error("tree has no nodes");
  if (!(leaf_alpha_ > 0.0)) throw Error("leaf smoothing alpha must be positive");
}

int TreeModel::depth() const {
  std::vector<int> depth_of(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (int c : nodes_[i].children) {
      if (c < 0) continue;
      depth_of[static_cast<std::size_t>(c)] = depth_of[i] + 1;
      deepest = std::max(deepest, depth_of[static_cast<std::size_t>(c)]);
    }
  }
  return deepest;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

ClassDistribution TreeModel::distribution(const Node& node) const {
  return ClassDistribution::normalized(node.counts[0] + leaf_alpha_, node.counts[1] + leaf_alpha_);
}

const TreeModel::Node& TreeModel::route(const Instance& x) const {
  const Node* node = &nodes_.front();
  while (!node->is_leaf()) {
    const double v = x.values[static_cast<std::size_t>(node->feature)];
    const int next = node->categorical ? node->children[static_cast<std::size_t>(v)] : node->children[v <= node->threshold ? 0 : 1];
    if (next < 0) break;
    node = &nodes_[static_cast<std::size_t>(next)];
  }
  return *node;
}

ClassDistribution TreeModel::predict_checked(const Instance& x) const { return distribution(route(x)); }

nlohmann::json TreeModel::to_json() const {
  auto doc = header_json();
  doc["leaf_alpha"] = leaf_alpha_;
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({{"feature", n.feature}, {"categorical", n.categorical}, {"threshold", n.threshold},
                     {"counts", n.counts}, {"children", n.children}, {"gain", n.gain}});
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

std::shared_ptr<const TreeModel> TreeModel::from_json(const nlohmann::json& doc) {
  auto features = schema_from_json(doc.at("features"));
  std::vector<Node> nodes;
  for (const auto& n : doc.at("nodes")) {
    Node node;
    node.feature = n.at("feature").get<int>();
    node.categorical = n.at("categorical").get<bool>();
    node.threshold = n.at("threshold").get<double>();
    node.counts = n.at("counts").get<std::array<double, 2>>();
    node.children = n.at("children").get<std::vector<int>>();
    node.gain = n.at("gain").get<double>();
    nodes.push_back(std::move(node));
  }
  for (const auto& n : nodes) {
    for (int c : n.children) {
      if (c >= static_cast<int>(nodes.size())) throw Error("tree child index out of range");
    }
    if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= features.size()) throw Error("tree feature index out of range");
  }
  return std::make_shared<TreeModel>(std::move(features), std::move(nodes), doc.at("leaf_alpha").get<double>());
}

std::shared_ptr<const TreeModel> train_tree(const Dataset& train, const TreeParams& params) {
  if (train.empty()) throw Error("decision tree needs a non-empty training set");
  TreeBuilder builder(train, params);
  return std::make_shared<TreeModel>(train.features(), builder.build(), params.leaf_alpha);
}

}  // namespace mcls
