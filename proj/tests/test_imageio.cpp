#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include "pathattr/errors.hpp"
#include "pathattr/imageio.hpp"
#include "pathattr/serialization.hpp"

using namespace pathattr;

namespace {

std::filesystem::path temp_dir() {
  const auto dir =
      std::filesystem::temp_directory_path() / "pathattr_imageio_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string p5_2x2() {
  std::string bytes = "P5\n2 2\n255\n";
  const unsigned char payload[] = {0, 64, 128, 255};
  bytes.append(reinterpret_cast<const char*>(payload), 4);
  return bytes;
}

}  // namespace

TEST_CASE("P5 2x2 parses and round-trips byte-identically") {
  const ImageBuffer img = parse_image(p5_2x2(), "inline");
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  CHECK(img.channels == 1);
  CHECK(img.samples == std::vector<std::uint8_t>{0, 64, 128, 255});
  CHECK(image_bytes(img) == p5_2x2());
}

TEST_CASE("P2 and P5 encodings of the same image parse identically") {
  const std::string ascii = "P2\n# a comment\n2 2\n255\n0 64\n128 255\n";
  const ImageBuffer a = parse_image(ascii, "inline");
  const ImageBuffer b = parse_image(p5_2x2(), "inline");
  CHECK(a.samples == b.samples);
  CHECK(a.width == b.width);
  CHECK(a.height == b.height);
}

TEST_CASE("P3 and P6 parse color images") {
  std::string p6 = "P6\n1 2\n255\n";
  const unsigned char payload[] = {255, 0, 0, 0, 0, 255};
  p6.append(reinterpret_cast<const char*>(payload), 6);
  const ImageBuffer a = parse_image(p6, "inline");
  CHECK(a.channels == 3);
  const ImageBuffer b =
      parse_image("P3\n1 2\n255\n255 0 0 0 0 255\n", "inline");
  CHECK(a.samples == b.samples);
  CHECK(image_bytes(a) == p6);
}

TEST_CASE("malformed inputs raise IoError without partial buffers") {
  CHECK_THROWS_AS(parse_image("P7\n2 2\n255\n", "inline"), IoError);
  CHECK_THROWS_AS(parse_image("P5\n2 2\n65535\n", "inline"), IoError);
  CHECK_THROWS_AS(parse_image("P5\n2 2\n", "inline"), IoError);
  // One byte short of the declared payload.
  std::string truncated = "P5\n2 2\n255\n";
  truncated.append("\0\0\0", 3);
  CHECK_THROWS_AS(parse_image(truncated, "inline"), IoError);
  CHECK_THROWS_AS(parse_image("P2\n2 2\n255\n0 1 2\n", "inline"), IoError);
  CHECK_THROWS_AS(parse_image("P2\n2 2\n255\n0 1 2 999\n", "inline"), IoError);
}

TEST_CASE("to_features scales samples by 1/255") {
  const ImageBuffer img = parse_image(p5_2x2(), "inline");
  const FeatureVector f = to_features(img);
  CHECK(f.shape == Shape::image(2, 2, 1));
  CHECK(f.values[0] == 0.0);
  CHECK(f.values[1] == 64.0 / 255.0);
  CHECK(f.values[2] == 128.0 / 255.0);
  CHECK(f.values[3] == 1.0);
}

TEST_CASE("file round-trip through write_image and read_image") {
  const auto dir = temp_dir();
  const std::string path = (dir / "rt.pgm").string();
  const ImageBuffer img = parse_image(p5_2x2(), "inline");
  write_image(img, path);
  CHECK(read_file(path) == p5_2x2());
  const ImageBuffer back = read_image(path);
  CHECK(back.samples == img.samples);
}

TEST_CASE("mask loading thresholds at 128") {
  const auto dir = temp_dir();
  const std::string path = (dir / "mask.pgm").string();
  write_file_atomic(path, "P2\n2 2\n255\n0 127 128 255\n");
  const MaskBuffer mask = read_mask(path);
  CHECK(mask.labels == std::vector<std::uint8_t>{0, 0, 1, 1});

  std::string color = "P6\n1 1\n255\n";
  color.append("\xff\xff\xff", 3);
  const std::string cpath = (dir / "mask.ppm").string();
  write_file_atomic(cpath, color);
  CHECK_THROWS_AS(read_mask(cpath), InputError);
}

TEST_CASE("pixel saliency sums channels") {
  const Shape shape = Shape::image(1, 2, 3);
  const std::vector<double> attr = {0.1, 0.2, 0.3, -1.0, 0.5, 0.25};
  const std::vector<double> s = pixel_saliency(attr, shape);
  REQUIRE(s.size() == 2);
  CHECK(s[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK_THROWS_AS(pixel_saliency(attr, Shape::flat(6)), InputError);
  CHECK_THROWS_AS(pixel_saliency(attr, Shape::image(1, 2, 1)), InputError);
}

TEST_CASE("zero attributions render an all-black heatmap") {
  const ImageBuffer h = render_heatmap(std::vector<double>(4, 0.0),
                                       Shape::image(2, 2, 1), HeatmapNorm{});
  CHECK(h.samples == std::vector<std::uint8_t>(4, 0));
}

TEST_CASE("abs-max maps the single nonzero attribution to 255") {
  std::vector<double> attr(4, 0.0);
  attr[2] = -0.125;
  const ImageBuffer h =
      render_heatmap(attr, Shape::image(2, 2, 1), HeatmapNorm{});
  CHECK(h.samples == std::vector<std::uint8_t>{0, 0, 255, 0});
}

TEST_CASE("abs-max heatmap is invariant to positive rescaling") {
  std::vector<double> attr = {0.05, -0.4, 0.2, 0.0, 0.33, -0.1};
  const ImageBuffer a =
      render_heatmap(attr, Shape::image(2, 3, 1), HeatmapNorm{});
  for (double& v : attr) v *= 37.5;
  const ImageBuffer b =
      render_heatmap(attr, Shape::image(2, 3, 1), HeatmapNorm{});
  CHECK(a.samples == b.samples);
}

TEST_CASE("percentile clip reproduces the pinned byte output") {
  // 8 magnitudes; 50th percentile by nearest rank is the 4th smallest (0.4).
  // Everything at or above 0.4 saturates to 255; below scales by /0.4.
  const std::vector<double> attr = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 8.0};
  const ImageBuffer h = render_heatmap(
      attr, Shape::image(2, 4, 1),
      HeatmapNorm{HeatmapNorm::Kind::percentile, 50.0});
  CHECK(h.samples ==
        std::vector<std::uint8_t>{64, 128, 191, 255, 255, 255, 255, 255});
}
