#pragma once

#include <cstdint>
#include <vector>

namespace pathattr {

// Every random quantity in the library flows from a single user seed through
// this substream scheme:
//
//   StreamRng(seed, purpose, index)
//
// The purpose salt keeps unrelated consumers decorrelated, and the index
// selects a trial / sample / baseline, so adding trials or samples never
// perturbs earlier ones. Streams are SplitMix64 counters whose start state is
// derived by two finalizer applications; normals use the Box-Muller transform
// with exactly two uniforms per draw, so draw counts are data independent.
enum class RngPurpose : std::uint64_t {
  baseline = 1,
  smoothgrad = 2,
  closed_path = 3,
  fixture = 4,
  test_points = 5,
};

class StreamRng {
 public:
  StreamRng(std::uint64_t seed, RngPurpose purpose, std::uint64_t index);

  std::uint64_t next_u64();
  double uniform01();  // in [0, 1)
  double uniform(double lo, double hi);
  double normal();     // standard normal
  std::vector<double> uniform_vector(std::size_t n, double lo, double hi);
  std::vector<double> normal_vector(std::size_t n);

 private:
  std::uint64_t state_;
};

}  // namespace pathattr
