#ifndef MCLS_CORE_HPP
#define MCLS_CORE_HPP

#include <array>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcls {

/// Error raised for invalid input, violated preconditions and failed training.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The five single classifier learning systems, in catalog order.
enum class ClassifierKind { ann, dt, knn, lgd, nbc };

inline constexpr std::array<ClassifierKind, 5> kAllClassifierKinds = {
    ClassifierKind::ann, ClassifierKind::dt, ClassifierKind::knn,
    ClassifierKind::lgd, ClassifierKind::nbc};

/// Short display name: ANN, DT, kNN, LgD, NBC.
std::string_view to_string(ClassifierKind kind);

/// Case-insensitive inverse of to_string.
ClassifierKind parse_classifier_kind(std::string_view name);

/// Posterior probability over the two classes {0, 1}.
struct ClassDistribution {
  std::array<double, 2> p{0.5, 0.5};

  double operator[](int c) const { return p[static_cast<std::size_t>(c)]; }

  /// Predicted class; ties go to class 0.
  int argmax() const { return p[1] > p[0] ? 1 : 0; }

  bool valid(double tolerance = 1e-9) const;

  static ClassDistribution from_p1(double p1) { return {{1.0 - p1, p1}}; }

  /// Normalizes two non-negative masses; throws when both are zero.
  static ClassDistribution normalized(double m0, double m1);
};

/// 64-bit mixing used for every seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic seed for a coordinate tuple under a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coordinates);

/// FNV-1a hash of a string.
std::uint64_t hash_string(std::string_view text);

/// Portable pseudo-random source. Only the raw engine output is used so
/// that draws are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Shortest text that parses back to `v` exactly.
std::string format_double(double v);

/// Shannon entropy in bits of an unnormalized mass vector.
double entropy_bits(std::span<const double> masses);

}  // namespace mcls

#endif  // MCLS_CORE_HPP
