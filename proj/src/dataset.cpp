#include "mcls/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace mcls {

namespace {

std::string feature_kind_name(FeatureKind kind) {
  return kind == FeatureKind::numeric ? "numeric" : "categorical";
}

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

}  // namespace

void validate_schema(std::span<const FeatureSpec> features) {
  std::set<std::string> names;
  for (const auto& f : features) {
    if (f.name.empty()) throw Error("feature with empty name");
    if (!names.insert(f.name).second) throw Error("duplicate feature name '" + f.name + "'");
    if (f.is_categorical()) {
      if (f.categories.size() < 2) {
        throw Error("categorical feature '" + f.name + "' must list at least 2 categories");
      }
      std::set<std::string> cats(f.categories.begin(), f.categories.end());
      if (cats.size() != f.categories.size()) {
        throw Error("categorical feature '" + f.name + "' lists a category twice");
      }
    } else if (!f.categories.empty()) {
      throw Error("numeric feature '" + f.name + "' must not list categories");
    }
  }
}

void check_instance(std::span<const FeatureSpec> features, const Instance& x) {
  if (x.values.size() != features.size()) {
    throw Error("schema mismatch: instance has " + std::to_string(x.values.size()) +
                " values, schema has " + std::to_string(features.size()) + " features");
  }
  for (std::size_t j = 0; j < features.size(); ++j) {
    const double v = x.values[j];
    if (features[j].is_categorical()) {
      const double n = static_cast<double>(features[j].categories.size());
      if (!(v >= 0.0 && v < n) || v != std::floor(v)) {
        throw Error("schema mismatch: feature '" + features[j].name + "' has category index out of range");
      }
    } else if (!std::isfinite(v)) {
      throw Error("schema mismatch: feature '" + features[j].name + "' is not finite");
    }
  }
}

Dataset::Dataset(Schema features, std::string label_name, std::vector<Instance> instances)
    : features_(std::move(features)), label_name_(std::move(label_name)), instances_(std::move(instances)) {
  validate_schema(features_);
  for (const auto& f : features_) {
    if (f.name == label_name_) throw Error("label column '" + label_name_ + "' is also declared as a feature");
  }
  double total = 0.0;
  for (const auto& x : instances_) {
    check_instance(features_, x);
    if (x.label != 0 && x.label != 1) throw Error("label must be 0 or 1");
    if (!(x.weight >= 0.0) || !std::isfinite(x.weight)) throw Error("instance weight must be finite and >= 0");
    total += x.weight;
  }
  if (!instances_.empty() && !(total > 0.0)) throw Error("instance weights must sum to a positive value");
}

std::array<std::size_t, 2> Dataset::class_counts() const {
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& x : instances_) ++counts[static_cast<std::size_t>(x.label)];
  return counts;
}

bool Dataset::has_both_classes() const {
  const auto c = class_counts();
  return c[0] > 0 && c[1] > 0;
}

double Dataset::total_weight() const {
  double total = 0.0;
  for (const auto& x : instances_) total += x.weight;
  return total;
}

bool Dataset::has_uniform_weights() const {
  return std::all_of(instances_.begin(), instances_.end(),
                     [&](const Instance& x) { return x.weight == instances_.front().weight; });
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(instances_.size());
  for (const auto& x : instances_) out.push_back(x.label);
  return out;
}

std::vector<std::size_t> Dataset::ids() const {
  std::vector<std::size_t> out;
  out.reserve(instances_.size());
  for (const auto& x : instances_) out.push_back(x.id);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Instance> out;
  out.reserve(rows.size());
  for (auto r : rows) {
    if (r >= instances_.size()) throw Error("subset row out of range");
    out.push_back(instances_[r]);
  }
  return with_instances(std::move(out));
}

Dataset Dataset::project(std::span<const std::size_t> feature_indices) const {
  Schema features;
  for (auto j : feature_indices) {
    if (j >= features_.size()) throw Error("projected feature index out of range");
    features.push_back(features_[j]);
  }
  std::vector<Instance> out;
  out.reserve(instances_.size());
  for (const auto& x : instances_) {
    Instance y = x;
    y.values.clear();
    for (auto j : feature_indices) y.values.push_back(x.values[j]);
    out.push_back(std::move(y));
  }
  return Dataset(std::move(features), label_name_, std::move(out));
}

Dataset Dataset::with_weights(std::span<const double> weights) const {
  if (weights.size() != instances_.size()) throw Error("weight vector length mismatch");
  auto out = instances_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].weight = weights[i];
  return with_instances(std::move(out));
}

Dataset Dataset::with_instances(std::vector<Instance> instances) const {
  Dataset out;
  out.features_ = features_;
  out.label_name_ = label_name_;
  out.instances_ = std::move(instances);
  // schema is already validated; only the rows need checking
  double total = 0.0;
  for (const auto& x : out.instances_) {
    check_instance(out.features_, x);
    if (x.label != 0 && x.label != 1) throw Error("label must be 0 or 1");
    if (!(x.weight >= 0.0) || !std::isfinite(x.weight)) throw Error("instance weight must be finite and >= 0");
    total += x.weight;
  }
  if (!out.instances_.empty() && !(total > 0.0)) throw Error("instance weights must sum to a positive value");
  return out;
}

DatasetSchema load_schema(const std::filesystem::path& schema_path) {
  std::ifstream in(schema_path);
  if (!in) throw Error("cannot open schema file '" + schema_path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("schema '" + schema_path.string() + "' is not valid JSON: " + e.what());
  }
  DatasetSchema schema;
  if (!doc.contains("label") || !doc["label"].is_string()) throw Error("schema does not name the label column");
  schema.label_name = doc["label"].get<std::string>();
  if (!doc.contains("features") || !doc["features"].is_array()) throw Error("schema has no features array");
  for (const auto& f : doc["features"]) {
    FeatureSpec spec;
    spec.name = f.at("name").get<std::string>();
    const auto kind = f.at("kind").get<std::string>();
    if (kind == "numeric") {
      spec.kind = FeatureKind::numeric;
    } else if (kind == "categorical") {
      spec.kind = FeatureKind::categorical;
      spec.categories = f.at("categories").get<std::vector<std::string>>();
    } else {
      throw Error("feature '" + spec.name + "' has unknown kind '" + kind + "'");
    }
    schema.features.push_back(std::move(spec));
  }
  validate_schema(schema.features);
  return schema;
}

void save_schema(const DatasetSchema& schema, const std::filesystem::path& schema_path) {
  nlohmann::json doc;
  doc["label"] = schema.label_name;
  doc["features"] = nlohmann::json::array();
  for (const auto& f : schema.features) {
    nlohmann::json entry{{"name", f.name}, {"kind", feature_kind_name(f.kind)}};
    if (f.is_categorical()) entry["categories"] = f.categories;
    doc["features"].push_back(entry);
  }
  std::ofstream out(schema_path);
  if (!out) throw Error("cannot write schema file '" + schema_path.string() + "'");
  out << doc.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path,
                     const LoadOptions& options) {
  return load_dataset(csv_path, load_schema(schema_path), options);
}

Dataset load_dataset(const std::filesystem::path& csv_path, const DatasetSchema& schema,
                     const LoadOptions& options) {
  validate_schema(schema.features);
  std::ifstream in(csv_path);
  if (!in) throw Error("cannot open dataset file '" + csv_path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw Error("empty file '" + csv_path.string() + "'");

  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!column_of.emplace(header[c], c).second) throw Error("duplicate column '" + header[c] + "' in CSV header");
  }
  std::vector<std::size_t> feature_column;
  for (const auto& f : schema.features) {
    auto it = column_of.find(f.name);
    if (it == column_of.end()) throw Error("CSV is missing feature column '" + f.name + "'");
    feature_column.push_back(it->second);
  }
  std::optional<std::size_t> label_column;
  if (auto it = column_of.find(schema.label_name); it != column_of.end()) {
    label_column = it->second;
  } else if (options.require_label) {
    throw Error("CSV is missing label column '" + schema.label_name + "'");
  }
  for (const auto& h : header) {
    const bool known = h == schema.label_name ||
                       std::any_of(schema.features.begin(), schema.features.end(),
                                   [&](const FeatureSpec& f) { return f.name == h; });
    if (!known && !options.ignore_extra_columns) throw Error("CSV column '" + h + "' is not declared in the schema");
  }

  std::vector<std::unordered_map<std::string, std::size_t>> category_index(schema.features.size());
  for (std::size_t j = 0; j < schema.features.size(); ++j) {
    for (std::size_t c = 0; c < schema.features[j].categories.size(); ++c) {
      category_index[j].emplace(schema.features[j].categories[c], c);
    }
  }

  std::vector<Instance> instances;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    const std::string where = "row " + std::to_string(row);
    if (cells.size() != header.size()) {
      throw Error(where + ": expected " + std::to_string(header.size()) + " cells, found " +
                  std::to_string(cells.size()));
    }
    Instance x;
    x.id = instances.size();
    x.values.resize(schema.features.size());
    for (std::size_t j = 0; j < schema.features.size(); ++j) {
      const auto& f = schema.features[j];
      const std::string cell = trim(cells[feature_column[j]]);
      if (cell.empty()) throw Error(where + ", column '" + f.name + "': missing value");
      if (f.is_categorical()) {
        auto it = category_index[j].find(cell);
        if (it == category_index[j].end()) {
          throw Error(where + ", column '" + f.name + "': unknown category '" + cell + "'");
        }
        x.values[j] = static_cast<double>(it->second);
      } else {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
          throw Error(where + ", column '" + f.name + "': cannot parse '" + cell + "' as a number");
        }
        x.values[j] = v;
      }
    }
    if (label_column) {
      const std::string cell = trim(cells[*label_column]);
      if (cell == "0") x.label = 0;
      else if (cell == "1") x.label = 1;
      else throw Error(where + ", column '" + schema.label_name + "': label must be 0 or 1, found '" + cell + "'");
    }
    instances.push_back(std::move(x));
  }
  if (instances.empty() && !options.allow_empty) throw Error("empty dataset '" + csv_path.string() + "'");
  return Dataset(schema.features, schema.label_name, std::move(instances));
}

void save_dataset(const Dataset& ds, const std::filesystem::path& csv_path,
                  const std::filesystem::path& schema_path) {
  save_schema({ds.features(), ds.label_name()}, schema_path);
  std::ofstream out(csv_path);
  if (!out) throw Error("cannot write dataset file '" + csv_path.string() + "'");
  for (const auto& f : ds.features()) out << quote_if_needed(f.name) << ',';
  out << quote_if_needed(ds.label_name()) << '\n';
  for (const auto& x : ds.instances()) {
    for (std::size_t j = 0; j < ds.feature_count(); ++j) {
      const auto& f = ds.features()[j];
      if (f.is_categorical()) out << quote_if_needed(f.categories[static_cast<std::size_t>(x.values[j])]);
      else out << format_double(x.values[j]);
      out << ',';
    }
    out << x.label << '\n';
  }
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, validation_fraction, test_fraction}) {
    if (!(f > 0.0)) throw Error("split fractions must be positive");
  }
  if (std::abs(train_fraction + validation_fraction + test_fraction - 1.0) > 1e-9) {
    throw Error("split fractions must sum to 1");
  }
}

std::vector<std::size_t> largest_remainder_sizes(std::size_t n, std::span<const double> fractions) {
  std::vector<std::size_t> sizes(fractions.size());
  std::vector<double> remainders(fractions.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    // guard against 0.6 * 10 evaluating to 5.999...
    const double floored = std::floor(exact + 1e-9);
    sizes[i] = static_cast<std::size_t>(floored);
    remainders[i] = exact - floored;
    assigned += sizes[i];
  }
  std::vector<std::size_t> order(fractions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b] + 1e-12; });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % order.size()) {
    ++sizes[order[i]];
    ++assigned;
  }
  return sizes;
}

namespace {

// Per-class part sizes whose column sums equal `totals` and whose entries stay
// within one instance of the exact per-class quota.
std::vector<std::array<std::size_t, 2>> stratified_sizes(std::array<std::size_t, 2> class_sizes,
                                                         std::span<const double> fractions,
                                                         std::span<const std::size_t> totals) {
  const std::size_t parts = fractions.size();
  std::vector<std::array<double, 2>> quota(parts);
  for (std::size_t j = 0; j < parts; ++j) {
    for (int c = 0; c < 2; ++c) quota[j][c] = fractions[j] * static_cast<double>(class_sizes[c]);
  }
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::array<std::size_t, 2>> best;
  // Each class-0 entry is the floor or ceiling of its quota; class 1 takes the rest.
  for (std::uint32_t mask = 0; mask < (1u << parts); ++mask) {
    std::vector<std::array<std::size_t, 2>> candidate(parts);
    std::size_t sum0 = 0;
    bool feasible = true;
    double cost = 0.0;
    for (std::size_t j = 0; j < parts && feasible; ++j) {
      const double q0 = quota[j][0];
      const double lo = std::floor(q0 + 1e-9);
      const double v0 = (mask >> j) & 1u ? std::ceil(q0 - 1e-9) : lo;
      if (v0 < 0.0 || v0 > static_cast<double>(totals[j])) {
        feasible = false;
        break;
      }
      const double v1 = static_cast<double>(totals[j]) - v0;
      if (v1 < 0.0 || std::abs(v1 - quota[j][1]) > 1.0 - 1e-9) feasible = false;
      candidate[j] = {static_cast<std::size_t>(v0), static_cast<std::size_t>(v1)};
      sum0 += candidate[j][0];
      cost += std::abs(v0 - q0) + std::abs(v1 - quota[j][1]);
    }
    if (!feasible || sum0 != class_sizes[0]) continue;
    if (cost < best_cost - 1e-12) {
      best_cost = cost;
      best = candidate;
    }
  }
  if (best.empty()) {
    // Fall back to independent rounding per class; totals may then shift by one.
    best.resize(parts);
    for (int c = 0; c < 2; ++c) {
      auto sizes = largest_remainder_sizes(class_sizes[c], fractions);
      for (std::size_t j = 0; j < parts; ++j) best[j][c] = sizes[j];
    }
  }
  return best;
}

}  // namespace

std::vector<std::vector<std::size_t>> partition_rows(const Dataset& ds, std::span<const double> fractions,
                                                     std::uint64_t seed, bool stratified) {
  const std::size_t parts = fractions.size();
  if (parts == 0) throw Error("partition needs at least one part");
  const auto totals = largest_remainder_sizes(ds.size(), fractions);
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> out(parts);
  if (!stratified) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::size_t pos = 0;
    for (std::size_t j = 0; j < parts; ++j) {
      out[j].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + totals[j]));
      pos += totals[j];
    }
  } else {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds[i].label)].push_back(i);
    const auto sizes = stratified_sizes({by_class[0].size(), by_class[1].size()}, fractions, totals);
    for (int c = 0; c < 2; ++c) {
      rng.shuffle(by_class[c]);
      std::size_t pos = 0;
      for (std::size_t j = 0; j < parts; ++j) {
        for (std::size_t t = 0; t < sizes[j][c]; ++t) out[j].push_back(by_class[c][pos++]);
      }
    }
  }
  for (auto& part : out) std::sort(part.begin(), part.end());
  return out;
}

SplitParts split_train_val_test(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  const std::array<double, 3> fractions{spec.train_fraction, spec.validation_fraction, spec.test_fraction};
  auto rows = partition_rows(ds, fractions, spec.seed, spec.stratified);
  static constexpr std::array<const char*, 3> kNames{"training", "validation", "test"};
  for (std::size_t j = 0; j < 3; ++j) {
    if (rows[j].empty()) throw Error(std::string("split produced an empty ") + kNames[j] + " part");
  }
  SplitParts parts{ds.subset(rows[0]), ds.subset(rows[1]), ds.subset(rows[2])};
  if (spec.stratified && !parts.train.has_both_classes()) {
    throw Error("stratified split left a class absent from the training part");
  }
  return parts;
}

std::vector<std::size_t> FoldAssignment::rows_in(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldAssignment::rows_not_in(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldAssignment::sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(k), 0);
  for (int f : fold_of) ++out[static_cast<std::size_t>(f)];
  return out;
}

FoldAssignment make_folds(const Dataset& ds, int k, std::uint64_t seed, bool stratified) {
  if (k < 2) throw Error("fold count must be at least 2");
  if (static_cast<std::size_t>(k) > ds.size()) {
    throw Error("fold count " + std::to_string(k) + " exceeds instance count " + std::to_string(ds.size()));
  }
  Rng rng(seed);
  std::vector<std::size_t> order;
  if (stratified) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds[i].label)].push_back(i);
    for (auto& rows : by_class) {
      rng.shuffle(rows);
      order.insert(order.end(), rows.begin(), rows.end());
    }
  } else {
    order.resize(ds.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
  }
  // Round-robin over the concatenated class lists balances both fold sizes and
  // per-class counts within one.
  FoldAssignment folds{k, std::vector<int>(ds.size(), 0)};
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    folds.fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return folds;
}

}  // namespace mcls
