#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pathattr/feature_vector.hpp"

namespace pathattr {

// 8-bit Netpbm image: PGM (1 channel) or PPM (3 channels), maxval 255.
// Samples are row-major with the channel index minor.
struct ImageBuffer {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> samples;
};

// Per-pixel binary ground-truth labels (1 = object, 0 = background).
struct MaskBuffer {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> labels;
};

// Accepts P2/P5 (PGM) and P3/P6 (PPM) with maxval 255; '#' comments allowed
// between header tokens. Malformed headers, truncated payloads, and other
// maxvals raise IoError without producing a partial buffer.
ImageBuffer parse_image(std::string_view bytes, const std::string& origin);
ImageBuffer read_image(const std::string& path);

// Canonical binary encoding (P5/P6, "P5\n<w> <h>\n255\n" + payload); reading
// it back yields the identical buffer and re-encoding is byte-identical.
std::string image_bytes(const ImageBuffer& image);
void write_image(const ImageBuffer& image, const std::string& path);

// Feature scaling: sample s becomes s / 255 and the shape is (h, w, c).
FeatureVector to_features(const ImageBuffer& image);

// Grayscale PGM thresholded at 128: sample >= 128 reads as object.
MaskBuffer read_mask(const std::string& path);

// Per-pixel saliency of a feature-sized attribution vector: channel sum.
std::vector<double> pixel_saliency(const std::vector<double>& attributions,
                                   const Shape& shape);

struct HeatmapNorm {
  enum class Kind { abs_max, percentile };
  Kind kind = Kind::abs_max;
  double q = 99.0;  // percentile rank, only read by Kind::percentile
};

// Grayscale heatmap of |saliency| per pixel. abs-max maps the largest
// magnitude to 255; percentile(q) clips magnitudes at the q-th percentile
// (nearest-rank) before scaling, saturating everything above it.
ImageBuffer render_heatmap(const std::vector<double>& attributions,
                           const Shape& shape, const HeatmapNorm& norm);

}  // namespace pathattr
