#include "mcls/anova.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace mcls {

namespace {

struct LevelStats {
  double sum = 0.0;
  std::size_t count = 0;
};

using LevelTable = std::map<std::vector<std::string>, LevelStats>;

LevelTable group(std::span<const AnovaObservation> data, std::span<const std::size_t> factor_indices) {
  LevelTable table;
  for (const auto& obs : data) {
    std::vector<std::string> key;
    for (auto i : factor_indices) key.push_back(obs.levels[i]);
    auto& s = table[key];
    s.sum += obs.response;
    ++s.count;
  }
  return table;
}

void require_balanced(const LevelTable& table, const std::string& name) {
  const auto expected = table.begin()->second.count;
  for (const auto& [key, s] : table) {
    if (s.count != expected) throw Error("unbalanced design: term '" + name + "' has unequal cell counts");
  }
}

double between_ss(const LevelTable& table, double grand_mean) {
  double ss = 0.0;
  for (const auto& [key, s] : table) {
    const double d = s.sum / static_cast<double>(s.count) - grand_mean;
    ss += static_cast<double>(s.count) * d * d;
  }
  return ss;
}

}  // namespace

AnovaTable anova(std::span<const AnovaObservation> data, std::span<const std::string> factors,
                 std::span<const std::pair<std::size_t, std::size_t>> interactions) {
  if (factors.empty()) throw Error("ANOVA needs at least one factor");
  if (data.empty()) throw Error("ANOVA needs observations");
  for (const auto& obs : data) {
    if (obs.levels.size() != factors.size()) throw Error("observation level count does not match the factor list");
    if (!std::isfinite(obs.response)) throw Error("ANOVA responses must be finite");
  }

  AnovaTable table;
  table.observations = data.size();
  const double n = static_cast<double>(data.size());
  double sum = 0.0;
  for (const auto& obs : data) sum += obs.response;
  table.grand_mean = sum / n;
  double scale = 0.0;
  for (const auto& obs : data) {
    const double d = obs.response - table.grand_mean;
    table.total_ss += d * d;
    scale += obs.response * obs.response;
  }

  std::vector<std::size_t> level_counts;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const std::array<std::size_t, 1> idx{i};
    const auto levels = group(data, idx);
    if (levels.size() < 2) throw Error("factor '" + factors[i] + "' has a single level");
    require_balanced(levels, factors[i]);
    level_counts.push_back(levels.size());
    AnovaTerm term;
    term.name = factors[i];
    term.ss = between_ss(levels, table.grand_mean);
    term.df = static_cast<double>(levels.size() - 1);
    table.terms.push_back(term);
  }
  for (const auto& [a, b] : interactions) {
    if (a >= factors.size() || b >= factors.size() || a == b) throw Error("invalid interaction term");
    const std::array<std::size_t, 2> idx{a, b};
    const auto cells = group(data, idx);
    const std::string name = factors[a] + ":" + factors[b];
    if (cells.size() != level_counts[a] * level_counts[b]) throw Error("unbalanced design: term '" + name + "' has empty cells");
    require_balanced(cells, name);
    AnovaTerm term;
    term.name = name;
    term.ss = std::max(0.0, between_ss(cells, table.grand_mean) - table.terms[a].ss - table.terms[b].ss);
    term.df = static_cast<double>((level_counts[a] - 1) * (level_counts[b] - 1));
    table.terms.push_back(term);
  }

  double explained_ss = 0.0;
  double explained_df = 0.0;
  for (const auto& t : table.terms) {
    explained_ss += t.ss;
    explained_df += t.df;
  }
  table.residual.name = "residual";
  table.residual.df = n - 1.0 - explained_df;
  if (table.residual.df <= 0.0) throw Error("no residual degrees of freedom");
  table.residual.ss = table.total_ss - explained_ss;
  if (table.residual.ss <= 1e-13 * scale) table.residual.ss = 0.0;
  table.residual.ms = table.residual.ss / table.residual.df;
  table.degenerate = table.residual.ss == 0.0;

  for (auto& t : table.terms) {
    t.ms = t.ss / t.df;
    if (table.degenerate) {
      t.f = t.ss > 0.0 ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
      t.p = t.ss > 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    } else {
      t.f = t.ss * table.residual.df / (t.df * table.residual.ss);
      t.p = f_survival(t.f, t.df, table.residual.df);
    }
  }
  return table;
}

AnovaTable anova_main_effects(std::span<const ExperimentCell> cells, std::span<const std::string> factors,
                              std::span<const std::pair<std::size_t, std::size_t>> interactions) {
  std::vector<AnovaObservation> data;
  for (const auto& cell : cells) {
    if (!cell.ok()) continue;
    AnovaObservation obs;
    for (const auto& factor : factors) {
      if (factor == "members") obs.levels.push_back(cell.members);
      else if (factor == "size") obs.levels.push_back(std::to_string(cell.size));
      else if (factor == "architecture") obs.levels.push_back(cell.architecture);
      else if (factor == "resampling") obs.levels.push_back(cell.resampling);
      else throw Error("unknown ANOVA factor '" + factor + "'");
    }
    obs.response = cell.smoothed_error;
    data.push_back(std::move(obs));
  }
  return anova(data, factors, interactions);
}

namespace {

// Continued fraction for the incomplete beta, modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("incomplete beta needs positive shape parameters");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete beta argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_survival(double f, double d1, double d2) {
  if (std::isnan(f)) return f;
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

}  // namespace mcls
