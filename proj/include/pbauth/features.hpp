#pragma once

// Quantized behavior features: length-t vectors of small non-negative
// integers. `bound` is exclusive; enrollment and the rounds check
// t * (bound-1)^2 < n so the protocol's inner product never wraps.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pbauth/errors.hpp"
#include "pbauth/modmath.hpp"

namespace pbauth::protocol {

inline constexpr std::uint64_t kDefaultFeatureBound = 1u << 16;
inline constexpr std::size_t kDefaultVectorLength = 8;

struct FeatureVector {
  std::vector<std::uint64_t> elements;
  std::uint64_t bound = kDefaultFeatureBound;

  std::size_t size() const { return elements.size(); }
  bool operator==(const FeatureVector&) const = default;

  static FeatureVector checked(std::vector<std::uint64_t> elements,
                               std::uint64_t bound = kDefaultFeatureBound) {
    if (elements.empty()) throw ParameterError("feature vector must have t >= 1");
    if (bound < 1) throw ParameterError("feature bound must be >= 1");
    for (std::uint64_t v : elements)
      if (v >= bound)
        throw ParameterError("feature " + std::to_string(v) + " out of bound " +
                             std::to_string(bound));
    return FeatureVector{std::move(elements), bound};
  }

  /// t features drawn uniformly from [min_value, bound).
  static FeatureVector sample(std::size_t t, std::uint64_t bound,
                              std::uint64_t min_value,
                              modmath::RandomSource& rng) {
    if (t == 0) throw ParameterError("feature vector must have t >= 1");
    if (min_value >= bound) throw ParameterError("feature range is empty");
    std::vector<std::uint64_t> elements(t);
    for (auto& v : elements)
      v = min_value +
          rng.draw_below(Bigint(static_cast<unsigned long>(bound - min_value)))
              .get_ui();
    return FeatureVector{std::move(elements), bound};
  }
};

}  // namespace pbauth::protocol
