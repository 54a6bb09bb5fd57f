#ifndef MCLS_SYNTHETIC_HPP
#define MCLS_SYNTHETIC_HPP

#include <cstdint>

#include "mcls/dataset.hpp"

namespace mcls {

/// Names of the six behavioural features of the benchmark, in column order.
inline constexpr std::array<const char*, 6> kBehaviouralFeatures = {
    "Communication", "Social Interaction", "Module", "Play", "Social Communication", "Stereotype"};

/// Benchmark table: five numeric features and a categorical Module. The
/// label is 1 when SocialCommunication + 0.8 * SocialInteraction + N(0, 0.5^2) > 0.
Dataset make_behavioural_dataset(std::size_t rows = 600, std::uint64_t seed = 2024);

/// Five standard-normal noise features plus one categorical feature equal to
/// the label, placed at column `position`.
Dataset make_single_determinant_dataset(std::size_t rows, std::uint64_t seed, std::size_t position);

}  // namespace mcls

#endif  // MCLS_SYNTHETIC_HPP
