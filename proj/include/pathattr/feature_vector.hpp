#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pathattr {

// Shape metadata for a flat feature vector: either {n} or
// {height, width, channels}. Feature order for images is row-major with the
// channel index minor, i.e. value index = (y * width + x) * channels + ch.
struct Shape {
  std::vector<std::size_t> dims;

  static Shape flat(std::size_t n) { return Shape{{n}}; }
  static Shape image(std::size_t h, std::size_t w, std::size_t c) {
    return Shape{{h, w, c}};
  }

  std::size_t size() const;
  bool is_image() const { return dims.size() == 3; }
  std::size_t height() const { return dims.at(0); }
  std::size_t width() const { return dims.at(1); }
  std::size_t channels() const { return dims.at(2); }
  std::string describe() const;

  bool operator==(const Shape&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  Shape shape;

  FeatureVector() = default;
  FeatureVector(std::vector<double> v, Shape s)
      : values(std::move(v)), shape(std::move(s)) {}

  static FeatureVector flat(std::vector<double> v);

  std::size_t size() const { return values.size(); }

  // Length must equal the shape product and every entry must be finite.
  // Throws InputError otherwise.
  void validate() const;
};

// Throws InputError when any entry of v is NaN or infinite.
void require_finite(const std::vector<double>& v, const std::string& what);

}  // namespace pathattr
