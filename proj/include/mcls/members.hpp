#ifndef MCLS_MEMBERS_HPP
#define MCLS_MEMBERS_HPP

#include <cstdint>

#include "mcls/ann.hpp"
#include "mcls/classifier.hpp"
#include "mcls/knn.hpp"
#include "mcls/logistic.hpp"
#include "mcls/nbc.hpp"
#include "mcls/tree.hpp"

namespace mcls {

/// Training configuration for every base classifier kind.
struct HyperParams {
  LogisticParams logistic;
  KnnParams knn;
  AnnParams ann;
  TreeParams tree;
  NbcParams nbc;
  /// Seed for the weighted resampling that stands in for instance weights
  /// in k-NN and ANN training.
  std::uint64_t resample_seed = 0;
};

/// Trains one base classifier. Logistic, tree and NBC consume instance
/// weights directly; k-NN and ANN train on a weighted bootstrap when the
/// weights are not uniform. `validation` is used by k-NN and ANN only.
ModelPtr train_member(ClassifierKind kind, const Dataset& train, const Dataset& validation, const HyperParams& params);

}  // namespace mcls

#endif  // MCLS_MEMBERS_HPP
