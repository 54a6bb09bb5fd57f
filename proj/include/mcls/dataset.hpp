#ifndef MCLS_DATASET_HPP
#define MCLS_DATASET_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcls/core.hpp"

namespace mcls {

enum class FeatureKind { numeric, categorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::vector<std::string> categories;  // categorical only, >= 2 labels

  static FeatureSpec numeric(std::string name) { return {std::move(name), FeatureKind::numeric, {}}; }
  static FeatureSpec categorical(std::string name, std::vector<std::string> categories) {
    return {std::move(name), FeatureKind::categorical, std::move(categories)};
  }

  bool is_categorical() const { return kind == FeatureKind::categorical; }

  bool operator==(const FeatureSpec&) const = default;
};

using Schema = std::vector<FeatureSpec>;

/// Validates names, category lists and uniqueness. Throws Error.
void validate_schema(std::span<const FeatureSpec> features);

/// One row. Categorical values hold the category index as an integral double.
/// `id` identifies the source row and survives subsetting and resampling.
struct Instance {
  std::vector<double> values;
  int label = 0;
  double weight = 1.0;
  std::size_t id = 0;

  bool operator==(const Instance&) const = default;
};

/// Throws Error naming the offending feature when `x` does not fit `features`.
void check_instance(std::span<const FeatureSpec> features, const Instance& x);

/// Immutable typed table with a binary label.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema features, std::string label_name, std::vector<Instance> instances);

  const Schema& features() const { return features_; }
  const std::string& label_name() const { return label_name_; }
  const std::vector<Instance>& instances() const { return instances_; }
  const Instance& operator[](std::size_t i) const { return instances_[i]; }

  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  std::size_t feature_count() const { return features_.size(); }

  /// Instance counts per class.
  std::array<std::size_t, 2> class_counts() const;
  bool has_both_classes() const;
  double total_weight() const;
  bool has_uniform_weights() const;

  std::vector<int> labels() const;
  std::vector<std::size_t> ids() const;

  /// Rows in the given order (duplicates allowed).
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Keeps only the listed features, in the listed order.
  Dataset project(std::span<const std::size_t> feature_indices) const;

  /// Same rows with weights replaced; `weights` must match size().
  Dataset with_weights(std::span<const double> weights) const;

  /// Replaces the rows, keeping the schema.
  Dataset with_instances(std::vector<Instance> instances) const;

  bool operator==(const Dataset&) const = default;

 private:
  Schema features_;
  std::string label_name_ = "label";
  std::vector<Instance> instances_;
};

struct LoadOptions {
  /// When false the label column may be absent; labels default to 0.
  bool require_label = true;
  /// Accept a header-only file.
  bool allow_empty = false;
  /// Skip columns the schema does not declare instead of rejecting them.
  bool ignore_extra_columns = false;
};

/// Schema sidecar: {"label": name, "features": [{"name", "kind", "categories"}]}.
struct DatasetSchema {
  Schema features;
  std::string label_name;
};

DatasetSchema load_schema(const std::filesystem::path& schema_path);
void save_schema(const DatasetSchema& schema, const std::filesystem::path& schema_path);

/// Reads a header-row CSV typed by the schema sidecar.
Dataset load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path,
                     const LoadOptions& options = {});
Dataset load_dataset(const std::filesystem::path& csv_path, const DatasetSchema& schema,
                     const LoadOptions& options = {});

/// Writes CSV and schema such that load_dataset reproduces `ds` exactly
/// (weights and ids are not persisted; reloaded rows get weight 1 and id = row).
void save_dataset(const Dataset& ds, const std::filesystem::path& csv_path,
                  const std::filesystem::path& schema_path);

struct SplitSpec {
  double train_fraction = 0.6;
  double validation_fraction = 0.3;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  bool stratified = true;

  void validate() const;
};

struct SplitParts {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Largest-remainder sizes for `fractions` of `n`; ties go to the earlier part.
std::vector<std::size_t> largest_remainder_sizes(std::size_t n, std::span<const double> fractions);

/// Random partition into parts with the given fractions (summing to 1).
/// Stratified partitions keep per-class proportions within one instance.
/// Row order inside a part follows the source order.
std::vector<std::vector<std::size_t>> partition_rows(const Dataset& ds, std::span<const double> fractions,
                                                     std::uint64_t seed, bool stratified);

SplitParts split_train_val_test(const Dataset& ds, const SplitSpec& spec);

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of;

  std::vector<std::size_t> rows_in(int fold) const;
  std::vector<std::size_t> rows_not_in(int fold) const;
  std::vector<std::size_t> sizes() const;
};

FoldAssignment make_folds(const Dataset& ds, int k, std::uint64_t seed, bool stratified = true);

}  // namespace mcls

#endif  // MCLS_DATASET_HPP
