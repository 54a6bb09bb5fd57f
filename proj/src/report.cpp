#include "mcls/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mcls {

namespace {

constexpr const char* kResultsHeader =
    "members,size,architecture,resampling,replication,fold,smoothed_error,zero_one_error,wall_time_s,status";

std::string sanitize_status(std::string status) {
  for (auto& c : status) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return status;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(',', start);
    out.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

template <typename T>
T parse_field(const std::string& text, const std::string& column, int line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error("line " + std::to_string(line) + ": cannot parse " + column + " '" + text + "'");
  }
  return value;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void write_groups(const std::filesystem::path& path, const std::vector<std::string>& key_columns,
                  const std::vector<GroupSummary>& groups) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (const auto& c : key_columns) out << c << ',';
  out << "mean_smoothed_error,std_smoothed_error,mean_zero_one_error,accuracy,cells\n";
  for (const auto& g : groups) {
    for (const auto& k : g.key) out << k << ',';
    out << format_double(g.mean_smoothed_error) << ',' << format_double(g.std_smoothed_error) << ','
        << format_double(g.mean_zero_one_error) << ',' << format_double(1.0 - g.mean_smoothed_error) << ','
        << g.cells << '\n';
  }
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : sep) + p;
  return out;
}

void section(std::ostringstream& out, const std::string& title, const std::vector<GroupSummary>& groups,
             const std::string& prefix = "") {
  out << title << " (lowest smoothed error first):\n";
  for (const auto& g : groups) {
    char line[256];
    std::snprintf(line, sizeof(line), "  %-28s smoothed error %7s  accuracy %7s  (%zu cells)\n",
                  (prefix + join(g.key, " / ")).c_str(), pct(g.mean_smoothed_error).c_str(),
                  pct(1.0 - g.mean_smoothed_error).c_str(), g.cells);
    out << line;
  }
}

}  // namespace

std::string results_csv(std::span<const ExperimentCell> cells, bool include_wall_time) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const auto& c : cells) {
    out << c.members << ',' << c.size << ',' << c.architecture << ',' << c.resampling << ',' << c.replication << ','
        << c.fold << ',' << format_double(c.smoothed_error) << ',' << format_double(c.zero_one_error) << ','
        << (include_wall_time ? format_double(c.wall_time_s) : "") << ',' << sanitize_status(c.status) << '\n';
  }
  return out.str();
}

void write_results_csv(std::span<const ExperimentCell> cells, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write results file '" + path.string() + "'");
  out << results_csv(cells);
}

std::vector<ExperimentCell> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open results file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error("results file '" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw Error("results file '" + path.string() + "' has an unexpected header");
  std::vector<ExperimentCell> cells;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 10) throw Error("line " + std::to_string(line_no) + ": expected 10 fields, found " + std::to_string(f.size()));
    ExperimentCell c;
    c.members = f[0];
    c.size = parse_field<std::size_t>(f[1], "size", line_no);
    c.architecture = f[2];
    c.resampling = f[3];
    c.replication = parse_field<int>(f[4], "replication", line_no);
    c.fold = parse_field<int>(f[5], "fold", line_no);
    c.status = f[9];
    if (c.ok()) {
      c.smoothed_error = parse_field<double>(f[6], "smoothed_error", line_no);
      c.zero_one_error = parse_field<double>(f[7], "zero_one_error", line_no);
      if (!(c.smoothed_error >= 0.0 && c.smoothed_error <= 1.0)) {
        throw Error("line " + std::to_string(line_no) + ": smoothed_error outside [0, 1]");
      }
    } else {
      c.smoothed_error = std::nan("");
      c.zero_one_error = std::nan("");
    }
    c.wall_time_s = f[8].empty() ? 0.0 : parse_field<double>(f[8], "wall_time_s", line_no);
    cells.push_back(std::move(c));
  }
  if (cells.empty()) throw Error("results file '" + path.string() + "' holds no cells");
  return cells;
}

nlohmann::json grid_manifest(const ExperimentConfig& config, std::string_view config_text,
                             std::span<const ExperimentCell> cells) {
  const auto& g = config.grid;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(hash_string(config_text)));
  nlohmann::json archs = nlohmann::json::array(), res = nlohmann::json::array(), base = nlohmann::json::array();
  for (auto a : g.architectures) archs.push_back(std::string(to_string(a)));
  for (auto r : g.resamplings) res.push_back(std::string(to_string(r)));
  for (auto b : g.baselines) base.push_back(std::string(to_string(b)));
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& m : g.member_sets) sets.push_back(member_set_label(m));
  const auto failed = std::count_if(cells.begin(), cells.end(), [](const ExperimentCell& c) { return !c.ok(); });
  return {{"artifact", "mcls"},
          {"version", kArtifactVersion},
          {"config_hash_fnv1a64", hash},
          {"dataset", config.dataset.filename().string()},
          {"base_seed", g.base_seed},
          {"seed_rule",
           "system seed = derive_seed(base_seed, [fnv1a(members), fnv1a(architecture), fnv1a(resampling), replication]); "
           "cell randomness = derive_seed(system seed, [fold, stream]); folds of replication r = "
           "make_folds(k, derive_seed(base_seed, [fnv1a(\"folds\"), r])); derive_seed chains splitmix64"},
          {"factors",
           {{"member_sets", sets},
            {"architectures", archs},
            {"resamplings", res},
            {"baselines", base},
            {"replications", g.replications},
            {"folds", g.folds}}},
          {"cells", cells.size()},
          {"failed_cells", failed}};
}

FeatureRanking read_ranking_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ranking file '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  FeatureRanking ranking;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 5) throw Error("ranking line " + std::to_string(line_no) + ": expected 5 fields");
    ranking.scores.push_back({f[1], parse_field<double>(f[2], "cv_error_mean_pct", line_no) / 100.0,
                              parse_field<double>(f[3], "cv_error_std_pct", line_no) / 100.0,
                              parse_field<double>(f[4], "mutual_information_bits", line_no)});
  }
  return ranking;
}

std::vector<GroupSummary> summarize(std::span<const ExperimentCell> cells, const GroupKey& key_of, bool by_key) {
  std::map<std::vector<std::string>, std::vector<const ExperimentCell*>> groups;
  for (const auto& c : cells) {
    if (c.ok()) groups[key_of(c)].push_back(&c);
  }
  std::vector<GroupSummary> out;
  for (const auto& [key, members] : groups) {
    GroupSummary g;
    g.key = key;
    g.cells = members.size();
    for (const auto* c : members) {
      g.mean_smoothed_error += c->smoothed_error;
      g.mean_zero_one_error += c->zero_one_error;
    }
    const double n = static_cast<double>(members.size());
    g.mean_smoothed_error /= n;
    g.mean_zero_one_error /= n;
    if (members.size() > 1) {
      double ss = 0.0;
      for (const auto* c : members) ss += (c->smoothed_error - g.mean_smoothed_error) * (c->smoothed_error - g.mean_smoothed_error);
      g.std_smoothed_error = std::sqrt(ss / (n - 1.0));
    }
    out.push_back(std::move(g));
  }
  if (!by_key) {
    std::stable_sort(out.begin(), out.end(), [](const GroupSummary& a, const GroupSummary& b) {
      return a.mean_smoothed_error < b.mean_smoothed_error;
    });
  }
  return out;
}

std::string write_report(std::span<const ExperimentCell> cells, const std::filesystem::path& out_dir,
                         const std::optional<FeatureRanking>& ranking) {
  std::vector<ExperimentCell> singles, ensembles;
  std::size_t failed = 0;
  for (const auto& c : cells) {
    if (!c.ok()) {
      ++failed;
      continue;
    }
    (c.architecture == "single" ? singles : ensembles).push_back(c);
  }
  if (singles.empty() && ensembles.empty()) throw Error("results contain no successful cells");

  std::filesystem::create_directories(out_dir);
  const auto fig1 = summarize(singles, [](const ExperimentCell& c) { return std::vector<std::string>{c.members}; });
  const auto fig2 = summarize(ensembles, [](const ExperimentCell& c) { return std::vector<std::string>{std::to_string(c.size)}; });
  const auto fig3 = summarize(ensembles, [](const ExperimentCell& c) { return std::vector<std::string>{c.resampling}; });
  const auto fig4 = summarize(ensembles, [](const ExperimentCell& c) { return std::vector<std::string>{c.architecture}; });
  const auto fig5 = summarize(
      ensembles,
      [](const ExperimentCell& c) { return std::vector<std::string>{std::to_string(c.size), c.architecture, c.resampling}; },
      true);
  write_groups(out_dir / "fig1_single.csv", {"classifier"}, fig1);
  write_groups(out_dir / "fig2_size.csv", {"ensemble_size"}, fig2);
  write_groups(out_dir / "fig3_resampling.csv", {"resampling"}, fig3);
  write_groups(out_dir / "fig4_architecture.csv", {"architecture"}, fig4);
  write_groups(out_dir / "fig5_size_architecture_resampling.csv", {"ensemble_size", "architecture", "resampling"}, fig5);
  for (std::size_t size = 2; size <= 5; ++size) {
    std::vector<ExperimentCell> of_size;
    std::copy_if(ensembles.begin(), ensembles.end(), std::back_inserter(of_size),
                 [&](const ExperimentCell& c) { return c.size == size; });
    const auto table = summarize(
        of_size, [](const ExperimentCell& c) { return std::vector<std::string>{c.members, c.architecture, c.resampling}; },
        true);
    write_groups(out_dir / ("fig" + std::to_string(size + 4) + "_size" + std::to_string(size) + ".csv"),
                 {"members", "architecture", "resampling"}, table);
  }

  std::ostringstream s;
  s << "Experiment report\n=================\n\n";
  s << "Cells: " << cells.size() << " (" << failed << " failed, excluded from every summary)\n\n";
  if (!fig1.empty()) {
    section(s, "Single classifiers", fig1);
    s << "Best single classifier: " << fig1.front().key[0] << " (smoothed error " << pct(fig1.front().mean_smoothed_error)
      << ")\n\n";
  }
  if (!fig2.empty()) {
    section(s, "Ensemble size", fig2, "MCL ");
    s << "Best ensemble size: MCL " << fig2.front().key[0] << " (smoothed error " << pct(fig2.front().mean_smoothed_error)
      << ")\n\n";
    section(s, "Resampling procedures", fig3);
    s << "Best resampling: " << fig3.front().key[0] << "\n\n";
    section(s, "Architectures", fig4);
    s << "Best architecture: " << fig4.front().key[0] << "\n\n";
  }

  std::ofstream anova_out(out_dir / "anova.csv");
  if (!anova_out) throw Error("cannot write anova.csv");
  anova_out << "term,ss,df,ms,f,p\n";
  s << "Fixed-effects ANOVA on ensemble smoothed error:\n";
  std::vector<std::string> factors;
  for (const char* factor : {"members", "architecture", "resampling"}) {
    std::set<std::string> levels;
    for (const auto& c : ensembles) {
      levels.insert(std::string(factor) == "members" ? c.members
                                                     : std::string(factor) == "architecture" ? c.architecture : c.resampling);
    }
    if (levels.size() >= 2) factors.emplace_back(factor);
  }
  if (factors.empty()) {
    s << "  not computed: no factor has two or more levels\n";
  } else {
    try {
      const auto table = anova_main_effects(ensembles, factors);
      for (const auto& t : table.terms) {
        anova_out << t.name << ',' << format_double(t.ss) << ',' << format_double(t.df) << ',' << format_double(t.ms)
                  << ',' << format_double(t.f) << ',' << format_double(t.p) << '\n';
        s << "  " << t.name << ": F(" << t.df << ", " << table.residual.df << ") = " << fixed(t.f, 2)
          << ", p = " << (t.p < 1e-4 ? "< 0.0001" : fixed(t.p, 4)) << '\n';
      }
      anova_out << "residual," << format_double(table.residual.ss) << ',' << format_double(table.residual.df) << ','
                << format_double(table.residual.ms) << ",,\n";
      anova_out << "total," << format_double(table.total_ss) << ',' << table.observations - 1 << ",,,\n";
      if (table.degenerate) s << "  residual mean square is zero; F ratios are degenerate\n";
    } catch (const Error& e) {
      s << "  not computed: " << e.what() << '\n';
    }
  }
  s << '\n';

  if (ranking) {
    s << "Feature ranking (cross-validation error, percent):\n" << ranking_table(*ranking) << '\n';
  }

  s << "Notes:\n"
    << "  - Member-set catalog: the reference design speaks of \"twenty-three multiple classifier systems\",\n"
    << "    but every set of 2 to 5 distinct kinds drawn from five classifiers gives 26 (10/10/5/1).\n"
    << "    All 26 are enumerated here.\n"
    << "  - Feature table ordering: the reference relevance table is captioned as sorted but its rows are\n"
    << "    not in relevance order. Rankings here are sorted by ascending cross-validation error.\n\n";
  s << "Reference orderings (documented targets from the restricted-access study data, not reproduced):\n"
    << "  Single classifiers: DT 35.7% < ANN 36.2% < kNN 38.5% < LgD 41.7% < NBC 43.3%\n"
    << "  Ensemble size: MCL 3 21.4% < MCL 2 30.7% < MCL 4 < MCL 5 36.5%\n"
    << "  Resampling: bagging 0.233 < boosting 0.259 < feature selection 0.314 < randomisation 0.347 < stacking 0.372\n"
    << "  Features: Social Communication 7.51 < Social Interaction 13.33 < Play 16.07 < Communication 19.43\n"
    << "            < Module 22.86 < Stereotype 24.52\n";

  const std::string summary = s.str();
  std::ofstream out(out_dir / "summary.txt");
  if (!out) throw Error("cannot write summary.txt");
  out << summary;
  return summary;
}

}  // namespace mcls
