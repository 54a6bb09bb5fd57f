#include "mcls/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace mcls {

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::ann: return "ANN";
    case ClassifierKind::dt: return "DT";
    case ClassifierKind::knn: return "kNN";
    case ClassifierKind::lgd: return "LgD";
    case ClassifierKind::nbc: return "NBC";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto kind : kAllClassifierKinds) {
    std::string candidate(to_string(kind));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (candidate == lower) return kind;
  }
  throw Error("unknown classifier kind '" + std::string(name) + "'");
}

bool ClassDistribution::valid(double tolerance) const {
  return p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0 &&
         std::abs(p[0] + p[1] - 1.0) <= tolerance;
}

ClassDistribution ClassDistribution::normalized(double m0, double m1) {
  const double total = m0 + m1;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error("cannot normalize a zero-sum class aggregate");
  }
  return {{m0 / total, m1 / total}};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coordinates) {
  std::uint64_t h = splitmix64(base);
  for (auto c : coordinates) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t hash_string(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw Error("Rng::index requires n > 0");
  // rejection sampling keeps the draw unbiased
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r = next();
  while (r >= limit) r = next();
  return static_cast<std::size_t>(r % bound);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double entropy_bits(std::span<const double> masses) {
  double total = 0.0;
  for (double m : masses) total += m;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double m : masses) {
    if (m > 0.0) {
      const double q = m / total;
      h -= q * std::log2(q);
    }
  }
  return h;
}

}  // namespace mcls
