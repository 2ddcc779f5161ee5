#include "pathattr/baseline.hpp"

#include <charconv>

#include "pathattr/errors.hpp"
#include "pathattr/rng.hpp"

namespace pathattr {

std::string BaselineSpec::describe() const {
  switch (kind) {
    case Kind::black: return "black";
    case Kind::white: return "white";
    case Kind::black_white: return "black+white";
    case Kind::random: return "random:" + std::to_string(count);
  }
  return "black";
}

BaselineSpec parse_baseline_spec(const std::string& text) {
  BaselineSpec spec;
  if (text == "black") {
    spec.kind = BaselineSpec::Kind::black;
    return spec;
  }
  if (text == "white") {
    spec.kind = BaselineSpec::Kind::white;
    return spec;
  }
  if (text == "black+white") {
    spec.kind = BaselineSpec::Kind::black_white;
    spec.count = 2;
    return spec;
  }
  if (text.starts_with("random:")) {
    const std::string_view num = std::string_view(text).substr(7);
    std::size_t n = 0;
    const auto res = std::from_chars(num.data(), num.data() + num.size(), n);
    if (res.ec == std::errc{} && res.ptr == num.data() + num.size() && n >= 1) {
      spec.kind = BaselineSpec::Kind::random;
      spec.count = n;
      return spec;
    }
  }
  throw InputError("bad baseline '" + text +
                   "' (want black|white|black+white|random:N)");
}

std::vector<FeatureVector> resolve_baselines(const BaselineSpec& spec,
                                             const Shape& shape,
                                             std::uint64_t seed) {
  const std::size_t n = shape.size();
  if (n == 0) throw InputError("empty feature shape for baseline synthesis");
  std::vector<FeatureVector> out;
  switch (spec.kind) {
    case BaselineSpec::Kind::black:
      out.emplace_back(std::vector<double>(n, spec.lo), shape);
      break;
    case BaselineSpec::Kind::white:
      out.emplace_back(std::vector<double>(n, spec.hi), shape);
      break;
    case BaselineSpec::Kind::black_white:
      out.emplace_back(std::vector<double>(n, spec.lo), shape);
      out.emplace_back(std::vector<double>(n, spec.hi), shape);
      break;
    case BaselineSpec::Kind::random:
      for (std::size_t i = 0; i < spec.count; ++i) {
        StreamRng rng(seed, RngPurpose::baseline, i);
        out.emplace_back(rng.uniform_vector(n, spec.lo, spec.hi), shape);
      }
      break;
  }
  return out;
}

}  // namespace pathattr
