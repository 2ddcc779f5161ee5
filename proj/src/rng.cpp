#include "pathattr/rng.hpp"

#include <cmath>
#include <numbers>

namespace pathattr {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, RngPurpose purpose,
                     std::uint64_t index) {
  std::uint64_t s = mix(seed + kGamma * (1 + static_cast<std::uint64_t>(purpose)));
  state_ = mix(s + kGamma * (1 + index));
}

std::uint64_t StreamRng::next_u64() {
  state_ += kGamma;
  return mix(state_);
}

double StreamRng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double StreamRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double StreamRng::normal() {
  // u1 is shifted into (0, 1] so the log is always finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> StreamRng::uniform_vector(std::size_t n, double lo,
                                              double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(lo, hi);
  return v;
}

std::vector<double> StreamRng::normal_vector(std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = normal();
  return v;
}

}  // namespace pathattr
