#include "mcls/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mcls {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

// Parses one scalar starting at `pos`; advances `pos` past it.
bool parse_scalar(std::string_view s, std::size_t& pos, ConfigValue& out, std::string& error) {
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  if (pos >= s.size()) {
    error = "missing value";
    return false;
  }
  if (s[pos] == '"') {
    std::string text;
    for (++pos; pos < s.size(); ++pos) {
      if (s[pos] == '\\' && pos + 1 < s.size()) {
        text += s[++pos];
      } else if (s[pos] == '"') {
        ++pos;
        out.kind = ConfigValue::Kind::string;
        out.text = std::move(text);
        return true;
      } else {
        text += s[pos];
      }
    }
    error = "unterminated string";
    return false;
  }
  const auto end = s.find_first_of(",]", pos);
  const auto token = trim(s.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
  pos = end == std::string_view::npos ? s.size() : end;
  if (token == "true" || token == "false") {
    out.kind = ConfigValue::Kind::boolean;
    out.flag = token == "true";
    return true;
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    error = "cannot parse value '" + std::string(token) + "' (strings need double quotes)";
    return false;
  }
  out.kind = ConfigValue::Kind::number;
  out.number = v;
  out.text = std::string(token);
  return true;
}

bool parse_value(std::string_view s, ConfigValue& out, std::string& error) {
  std::size_t pos = 0;
  if (!s.empty() && s[0] == '[') {
    out.kind = ConfigValue::Kind::list;
    pos = 1;
    while (true) {
      while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
      if (pos < s.size() && s[pos] == ']' && out.items.empty()) {
        ++pos;
        break;
      }
      ConfigValue item;
      item.line = out.line;
      if (!parse_scalar(s, pos, item, error)) return false;
      out.items.push_back(std::move(item));
      while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
      if (pos < s.size() && s[pos] == ',') {
        ++pos;
        continue;
      }
      if (pos < s.size() && s[pos] == ']') {
        ++pos;
        break;
      }
      error = "unterminated list";
      return false;
    }
  } else if (!parse_scalar(s, pos, out, error)) {
    return false;
  }
  if (!trim(s.substr(pos)).empty()) {
    error = "unexpected text after value";
    return false;
  }
  return true;
}

class Reader {
 public:
  Reader(std::map<std::string, ConfigValue> values, std::vector<std::string>& diagnostics)
      : values_(std::move(values)), diagnostics_(diagnostics) {}

  const ConfigValue* find(const std::string& key) {
    seen_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  void problem(const std::string& key, const ConfigValue* v, const std::string& message) {
    diagnostics_.push_back(key + (v ? " (line " + std::to_string(v->line) + ")" : "") + ": " + message);
  }

  void string(const std::string& key, std::string& out, bool required = false) {
    const auto* v = find(key);
    if (!v) {
      if (required) problem(key, nullptr, "required setting is missing");
      return;
    }
    if (v->kind != ConfigValue::Kind::string) return problem(key, v, "expected a quoted string");
    out = v->text;
  }

  void number(const std::string& key, double& out) {
    const auto* v = find(key);
    if (!v) return;
    if (v->kind != ConfigValue::Kind::number) return problem(key, v, "expected a number");
    out = v->number;
  }

  void integer(const std::string& key, int& out) {
    const auto* v = find(key);
    if (!v) return;
    if (v->kind != ConfigValue::Kind::number || v->number != std::floor(v->number) || std::abs(v->number) > 1e9) {
      return problem(key, v, "expected an integer");
    }
    out = static_cast<int>(v->number);
  }

  void seed(const std::string& key, std::uint64_t& out) {
    const auto* v = find(key);
    if (!v) return;
    std::uint64_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(v->text.data(), v->text.data() + v->text.size(), parsed);
    if (v->kind != ConfigValue::Kind::number || ec != std::errc() || ptr != v->text.data() + v->text.size()) {
      return problem(key, v, "expected a non-negative 64-bit integer");
    }
    out = parsed;
  }

  void boolean(const std::string& key, bool& out) {
    const auto* v = find(key);
    if (!v) return;
    if (v->kind != ConfigValue::Kind::boolean) return problem(key, v, "expected true or false");
    out = v->flag;
  }

  void integers(const std::string& key, std::vector<int>& out) {
    const auto* v = find(key);
    if (!v) return;
    if (v->kind != ConfigValue::Kind::list || v->items.empty()) return problem(key, v, "expected a non-empty list of integers");
    std::vector<int> parsed;
    for (const auto& item : v->items) {
      if (item.kind != ConfigValue::Kind::number || item.number != std::floor(item.number) || item.number < 1 ||
          item.number > 1e6) {
        return problem(key, v, "expected positive integers");
      }
      parsed.push_back(static_cast<int>(item.number));
    }
    out = std::move(parsed);
  }

  // A quoted string or a list of quoted strings, returned as a comma list.
  bool names(const std::string& key, std::string& out) {
    const auto* v = find(key);
    if (!v) return false;
    if (v->kind == ConfigValue::Kind::string) {
      out = v->text;
      return true;
    }
    if (v->kind != ConfigValue::Kind::list) {
      problem(key, v, "expected a string or a list of strings");
      return false;
    }
    std::string joined;
    for (const auto& item : v->items) {
      if (item.kind != ConfigValue::Kind::string) {
        problem(key, v, "expected a list of strings");
        return false;
      }
      joined += (joined.empty() ? "" : ",") + item.text;
    }
    out = joined;
    return true;
  }

  void report_unknown() {
    for (const auto& [key, v] : values_) {
      if (!seen_.count(key)) problem(key, &v, "unknown setting");
    }
  }

 private:
  std::map<std::string, ConfigValue> values_;
  std::set<std::string> seen_;
  std::vector<std::string>& diagnostics_;
};

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto item = trim(text.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

template <typename T, typename Parse, std::size_t N>
std::vector<T> parse_names(std::string_view text, const std::array<T, N>& all, Parse parse) {
  if (trim(text) == "all") return {all.begin(), all.end()};
  if (trim(text) == "none") return {};
  std::vector<T> out;
  for (const auto& name : split_list(text)) out.push_back(parse(name));
  return out;
}

}  // namespace

std::map<std::string, ConfigValue> parse_config_text(std::string_view text, std::vector<std::string>& diagnostics) {
  std::map<std::string, ConfigValue> values;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string stripped = strip_comment(raw);
    const auto line = trim(stripped);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || !is_identifier(trim(line.substr(1, line.size() - 2)))) {
        diagnostics.push_back(where + "malformed section header");
      } else {
        section = std::string(trim(line.substr(1, line.size() - 2)));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      diagnostics.push_back(where + "expected key = value");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    if (!is_identifier(key)) {
      diagnostics.push_back(where + "invalid key '" + std::string(key) + "'");
      continue;
    }
    ConfigValue value;
    value.line = line_no;
    std::string error;
    if (!parse_value(trim(line.substr(eq + 1)), value, error)) {
      diagnostics.push_back(where + error);
      continue;
    }
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (!values.emplace(full, std::move(value)).second) diagnostics.push_back(where + "duplicate setting '" + full + "'");
  }
  return values;
}

std::vector<MemberSet> parse_member_sets(std::string_view text) {
  if (trim(text) == "all") return enumerate_member_sets().member_sets;
  std::vector<MemberSet> out;
  for (const auto& label : split_list(text)) out.push_back(parse_member_set(label));
  return out;
}

ExperimentConfig config_from_text(std::string_view text, const std::filesystem::path& base_dir,
                                  std::vector<std::string>& diagnostics) {
  Reader r(parse_config_text(text, diagnostics), diagnostics);
  ExperimentConfig cfg;
  GridSpec& g = cfg.grid;

  std::string dataset, schema, output = cfg.output_dir.string();
  r.string("data.dataset", dataset, true);
  r.string("data.schema", schema, true);
  r.string("output.dir", output);
  if (!dataset.empty()) cfg.dataset = base_dir / dataset;
  if (!schema.empty()) cfg.schema = base_dir / schema;
  cfg.output_dir = base_dir / output;

  auto guarded = [&](const std::string& key, auto&& parse) {
    std::string text_value;
    if (!r.names(key, text_value)) return;
    try {
      parse(text_value);
    } catch (const Error& e) {
      diagnostics.push_back(key + ": " + e.what());
    }
  };
  g.member_sets = enumerate_member_sets().member_sets;
  g.architectures.assign(kAllArchitectures.begin(), kAllArchitectures.end());
  g.resamplings.assign(kAllResamplingKinds.begin(), kAllResamplingKinds.end());
  guarded("design.members", [&](const std::string& v) { g.member_sets = parse_member_sets(v); });
  guarded("design.architectures",
          [&](const std::string& v) { g.architectures = parse_names(v, kAllArchitectures, parse_architecture); });
  guarded("design.resamplings",
          [&](const std::string& v) { g.resamplings = parse_names(v, kAllResamplingKinds, parse_resampling_kind); });
  guarded("design.baselines",
          [&](const std::string& v) { g.baselines = parse_names(v, kAllClassifierKinds, parse_classifier_kind); });
  guarded("design.rule", [&](const std::string& v) { g.rule = parse_combination_rule(v); });
  r.integer("design.locality_k", g.locality_k);
  r.integer("design.folds", g.folds);
  r.integer("design.replications", g.replications);
  r.seed("design.seed", g.base_seed);
  r.integer("design.workers", g.workers);

  r.number("split.train", g.split.train_fraction);
  r.number("split.validation", g.split.validation_fraction);
  r.number("split.test", g.split.test_fraction);
  r.boolean("split.stratified", g.split.stratified);
  r.number("smoothing.prior_alpha", g.smoothing.prior_alpha);

  r.number("resampling.subset_fraction", g.resampling.subset_fraction);
  r.integer("resampling.boosting_rounds", g.resampling.boosting_rounds);
  guarded("resampling.meta_learner", [&](const std::string& v) { g.resampling.meta_learner = parse_classifier_kind(v); });
  r.integer("resampling.stacking_folds", g.resampling.stacking_folds);
  r.number("resampling.strength", g.resampling.strength);

  r.integers("ann.hidden", g.params.ann.hidden_candidates);
  r.integer("ann.epochs", g.params.ann.epochs);
  r.number("ann.learning_rate", g.params.ann.learning_rate);
  r.seed("ann.seed", g.params.ann.seed);
  r.integers("knn.k", g.params.knn.k_candidates);
  r.integer("tree.min_leaf", g.params.tree.min_leaf);
  r.integer("tree.max_depth", g.params.tree.max_depth);
  r.integer("logistic.max_iters", g.params.logistic.max_iters);
  r.number("logistic.tolerance", g.params.logistic.tolerance);
  r.number("logistic.cutoff", g.params.logistic.cutoff);
  r.report_unknown();

  const auto& s = g.split;
  for (auto [name, value] : {std::pair{"split.train", s.train_fraction}, std::pair{"split.validation", s.validation_fraction},
                             std::pair{"split.test", s.test_fraction}}) {
    if (!(value > 0.0 && value < 1.0)) diagnostics.push_back(std::string(name) + ": fraction must lie in (0, 1)");
  }
  const double sum = s.train_fraction + s.validation_fraction + s.test_fraction;
  if (std::abs(sum - 1.0) > 1e-9) {
    diagnostics.push_back("split.train + split.validation + split.test: fractions sum to " + format_double(sum) +
                          ", expected 1");
  }
  auto check = [&](bool ok, const std::string& message) {
    if (!ok) diagnostics.push_back(message);
  };
  check(g.folds >= 2, "design.folds: must be at least 2");
  check(g.replications >= 1, "design.replications: must be at least 1");
  check(g.workers >= 1, "design.workers: must be at least 1");
  check(g.locality_k >= 1, "design.locality_k: must be at least 1");
  check(!g.member_sets.empty() || !g.baselines.empty(), "design: no systems selected");
  check(g.member_sets.empty() || (!g.architectures.empty() && !g.resamplings.empty()),
        "design: member sets need at least one architecture and one resampling procedure");
  for (const auto& m : g.member_sets) {
    try {
      EnsembleSpec spec;
      spec.members = m;
      spec.validate();
    } catch (const Error& e) {
      diagnostics.push_back("design.members: " + member_set_label(m) + ": " + e.what());
    }
  }
  check(g.smoothing.prior_alpha > 0.0, "smoothing.prior_alpha: must be positive");
  check(g.resampling.subset_fraction > 0.0 && g.resampling.subset_fraction <= 1.0,
        "resampling.subset_fraction: must lie in (0, 1]");
  check(g.resampling.boosting_rounds >= 1, "resampling.boosting_rounds: must be at least 1");
  check(g.resampling.stacking_folds >= 2, "resampling.stacking_folds: must be at least 2");
  check(g.resampling.strength > 0.0 && g.resampling.strength <= 1.0, "resampling.strength: must lie in (0, 1]");
  check(g.params.ann.epochs >= 1, "ann.epochs: must be at least 1");
  check(g.params.ann.learning_rate > 0.0, "ann.learning_rate: must be positive");
  check(g.params.tree.min_leaf >= 1, "tree.min_leaf: must be at least 1");
  check(g.params.tree.max_depth >= 0, "tree.max_depth: must be non-negative");
  check(g.params.logistic.max_iters >= 1, "logistic.max_iters: must be at least 1");
  check(g.params.logistic.tolerance > 0.0, "logistic.tolerance: must be positive");
  check(g.params.logistic.cutoff > 0.0 && g.params.logistic.cutoff < 1.0, "logistic.cutoff: must lie in (0, 1)");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  std::vector<std::string> diagnostics;
  auto cfg = config_from_text(text.str(), path.parent_path(), diagnostics);
  if (!diagnostics.empty()) {
    std::string message = "invalid config '" + path.string() + "':";
    for (const auto& d : diagnostics) message += "\n  " + d;
    throw Error(message);
  }
  return cfg;
}

std::vector<std::string> check_config_inputs(const ExperimentConfig& config) {
  std::vector<std::string> diagnostics;
  if (!config.schema.empty() && !std::filesystem::exists(config.schema)) {
    diagnostics.push_back("data.schema: file not found: " + config.schema.string());
  }
  if (!config.dataset.empty() && !std::filesystem::exists(config.dataset)) {
    diagnostics.push_back("data.dataset: file not found: " + config.dataset.string());
  }
  if (!diagnostics.empty() || config.schema.empty() || config.dataset.empty()) return diagnostics;
  try {
    const auto ds = load_dataset(config.dataset, config.schema);
    if (!ds.has_both_classes()) diagnostics.push_back("data.dataset: both classes must be present");
    if (static_cast<std::size_t>(config.grid.folds) > ds.size()) {
      diagnostics.push_back("design.folds: exceeds the instance count " + std::to_string(ds.size()));
    }
  } catch (const Error& e) {
    diagnostics.push_back(std::string("data: ") + e.what());
  }
  return diagnostics;
}

}  // namespace mcls
