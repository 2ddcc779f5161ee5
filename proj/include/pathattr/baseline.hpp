#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathattr/feature_vector.hpp"

namespace pathattr {

// Where an attribution path starts. black/white are the all-min / all-max
// corners of the feature box; random draws uniform baselines from the seeded
// stream. Multi-baseline kinds (black+white, random:n with n > 1) average the
// per-baseline attribution maps downstream.
struct BaselineSpec {
  enum class Kind { black, white, black_white, random };

  Kind kind = Kind::black;
  std::size_t count = 1;  // number of random baselines
  double lo = 0.0;        // feature-space bounds used for synthesis
  double hi = 1.0;

  std::string describe() const;
};

// Accepts "black", "white", "black+white", "random:N" (N >= 1).
BaselineSpec parse_baseline_spec(const std::string& text);

// Concrete baseline vectors for the given feature shape. Random baselines
// come from substreams (seed, baseline, i) so baseline i never depends on how
// many baselines are requested.
std::vector<FeatureVector> resolve_baselines(const BaselineSpec& spec,
                                             const Shape& shape,
                                             std::uint64_t seed);

}  // namespace pathattr
