#include "pathattr/imageio.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pathattr/errors.hpp"
#include "pathattr/serialization.hpp"

namespace pathattr {
namespace {

// Netpbm header tokenizer: whitespace separates tokens, '#' starts a comment
// that runs to end of line.
struct TokenReader {
  std::string_view bytes;
  std::size_t pos = 0;
  const std::string& origin;

  void skip_filler() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::string next_token() {
    skip_filler();
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
           bytes[pos] != '#') {
      ++pos;
    }
    if (pos == start) {
      throw IoError(origin + ": malformed header (unexpected end of file)");
    }
    return std::string(bytes.substr(start, pos - start));
  }

  std::size_t next_int(const char* what) {
    const std::string tok = next_token();
    std::size_t value = 0;
    for (char c : tok) {
      if (c < '0' || c > '9') {
        throw IoError(origin + ": malformed header (" + std::string(what) +
                      " is not a number)");
      }
      value = value * 10 + static_cast<std::size_t>(c - '0');
      if (value > 1000000000) {
        throw IoError(origin + ": malformed header (" + std::string(what) +
                      " out of range)");
      }
    }
    return value;
  }
};

}  // namespace

ImageBuffer parse_image(std::string_view bytes, const std::string& origin) {
  TokenReader r{bytes, 0, origin};
  const std::string magic = r.next_token();
  bool binary;
  std::size_t channels;
  if (magic == "P2") { binary = false; channels = 1; }
  else if (magic == "P3") { binary = false; channels = 3; }
  else if (magic == "P5") { binary = true; channels = 1; }
  else if (magic == "P6") { binary = true; channels = 3; }
  else {
    throw IoError(origin + ": malformed header (magic '" + magic +
                  "' is not P2/P3/P5/P6)");
  }

  ImageBuffer img;
  img.channels = channels;
  img.width = r.next_int("width");
  img.height = r.next_int("height");
  const std::size_t maxval = r.next_int("maxval");
  if (img.width == 0 || img.height == 0) {
    throw IoError(origin + ": malformed header (zero dimension)");
  }
  if (maxval != 255) {
    throw IoError(origin + ": unsupported maxval " + std::to_string(maxval) +
                  " (only 255)");
  }

  const std::size_t count = img.width * img.height * channels;
  img.samples.reserve(count);
  if (binary) {
    // Exactly one whitespace byte separates the maxval from the payload.
    if (r.pos >= bytes.size() ||
        !std::isspace(static_cast<unsigned char>(bytes[r.pos]))) {
      throw IoError(origin + ": malformed header (missing payload separator)");
    }
    ++r.pos;
    if (bytes.size() - r.pos < count) {
      throw IoError(origin + ": truncated payload (need " +
                    std::to_string(count) + " bytes, have " +
                    std::to_string(bytes.size() - r.pos) + ")");
    }
    img.samples.assign(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
                       bytes.begin() + static_cast<std::ptrdiff_t>(r.pos + count));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      r.skip_filler();
      if (r.pos >= bytes.size()) {
        throw IoError(origin + ": truncated payload (need " +
                      std::to_string(count) + " samples, have " +
                      std::to_string(i) + ")");
      }
      const std::size_t v = r.next_int("sample");
      if (v > 255) {
        throw IoError(origin + ": sample value " + std::to_string(v) +
                      " exceeds maxval");
      }
      img.samples.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return img;
}

ImageBuffer read_image(const std::string& path) {
  return parse_image(read_file(path), path);
}

std::string image_bytes(const ImageBuffer& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw InputError("image must have 1 or 3 channels");
  }
  if (image.samples.size() != image.width * image.height * image.channels) {
    throw InputError("image sample count does not match dimensions");
  }
  std::ostringstream os;
  os << (image.channels == 1 ? "P5" : "P6") << "\n"
     << image.width << " " << image.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(image.samples.data()),
           static_cast<std::streamsize>(image.samples.size()));
  return os.str();
}

void write_image(const ImageBuffer& image, const std::string& path) {
  write_file_atomic(path, image_bytes(image));
}

FeatureVector to_features(const ImageBuffer& image) {
  std::vector<double> v(image.samples.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = image.samples[i] / 255.0;
  return FeatureVector(std::move(v),
                       Shape::image(image.height, image.width, image.channels));
}

MaskBuffer read_mask(const std::string& path) {
  const ImageBuffer img = read_image(path);
  if (img.channels != 1) {
    throw InputError("mask '" + path + "' must be a grayscale PGM");
  }
  MaskBuffer mask;
  mask.width = img.width;
  mask.height = img.height;
  mask.labels.resize(img.samples.size());
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    mask.labels[i] = img.samples[i] >= 128 ? 1 : 0;
  }
  return mask;
}

std::vector<double> pixel_saliency(const std::vector<double>& attributions,
                                   const Shape& shape) {
  if (!shape.is_image()) {
    throw InputError("pixel saliency needs an image shape, got " +
                     shape.describe());
  }
  if (attributions.size() != shape.size()) {
    throw InputError("attribution length does not match shape " +
                     shape.describe());
  }
  const std::size_t pixels = shape.height() * shape.width();
  const std::size_t c = shape.channels();
  std::vector<double> out(pixels, 0.0);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t ch = 0; ch < c; ++ch) out[p] += attributions[p * c + ch];
  }
  return out;
}

ImageBuffer render_heatmap(const std::vector<double>& attributions,
                           const Shape& shape, const HeatmapNorm& norm) {
  std::vector<double> mag = pixel_saliency(attributions, shape);
  for (double& v : mag) v = std::abs(v);

  double clip = 0.0;
  if (norm.kind == HeatmapNorm::Kind::abs_max) {
    clip = *std::max_element(mag.begin(), mag.end());
  } else {
    if (!(norm.q > 0.0) || norm.q > 100.0) {
      throw InputError("percentile rank must lie in (0, 100]");
    }
    // Nearest-rank percentile: the ceil(q/100 * n)-th smallest magnitude.
    std::vector<double> sorted = mag;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(norm.q / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    clip = sorted[rank - 1];
  }

  ImageBuffer img;
  img.width = shape.width();
  img.height = shape.height();
  img.channels = 1;
  img.samples.resize(mag.size(), 0);
  if (clip > 0.0) {
    for (std::size_t i = 0; i < mag.size(); ++i) {
      const double scaled = std::min(mag[i], clip) / clip * 255.0;
      img.samples[i] = static_cast<std::uint8_t>(std::lround(scaled));
    }
  }
  return img;
}

}  // namespace pathattr
