#include "mcls/synthetic.hpp"

#include <cmath>

namespace mcls {

namespace {

double rounded(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace

Dataset make_behavioural_dataset(std::size_t rows, std::uint64_t seed) {
  Schema features;
  for (const char* name : kBehaviouralFeatures) {
    if (std::string_view(name) == "Module") {
      features.push_back(FeatureSpec::categorical(name, {"imitation", "joint_attention", "turn_taking"}));
    } else {
      features.push_back(FeatureSpec::numeric(name));
    }
  }
  Rng rng(seed);
  std::vector<Instance> instances;
  for (std::size_t i = 0; i < rows; ++i) {
    Instance x;
    x.id = i;
    const double communication = rounded(rng.normal());
    const double interaction = rounded(rng.normal());
    const double module = static_cast<double>(rng.index(3));
    const double play = rounded(0.5 * communication + std::sqrt(0.75) * rng.normal());
    const double social = rounded(rng.normal());
    const double stereotype = rounded(rng.normal());
    x.values = {communication, interaction, module, play, social, stereotype};
    x.label = social + 0.8 * interaction + 0.5 * rng.normal() > 0.0 ? 1 : 0;
    instances.push_back(std::move(x));
  }
  return Dataset(std::move(features), "asd", std::move(instances));
}

Dataset make_single_determinant_dataset(std::size_t rows, std::uint64_t seed, std::size_t position) {
  if (position > 5) throw Error("determinant position must lie in [0, 5]");
  Schema features;
  for (std::size_t j = 0, noise = 0; j < 6; ++j) {
    if (j == position) {
      features.push_back(FeatureSpec::categorical("determinant", {"no", "yes"}));
    } else {
      features.push_back(FeatureSpec::numeric("noise_" + std::to_string(noise++)));
    }
  }
  Rng rng(seed);
  std::vector<Instance> instances;
  for (std::size_t i = 0; i < rows; ++i) {
    Instance x;
    x.id = i;
    x.label = rng.uniform() < 0.5 ? 1 : 0;
    for (std::size_t j = 0; j < 6; ++j) {
      x.values.push_back(j == position ? static_cast<double>(x.label) : rounded(rng.normal()));
    }
    instances.push_back(std::move(x));
  }
  return Dataset(std::move(features), "label", std::move(instances));
}

}  // namespace mcls
