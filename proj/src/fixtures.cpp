#include "pathattr/fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "pathattr/errors.hpp"
#include "pathattr/model_io.hpp"
#include "pathattr/rng.hpp"
#include "pathattr/serialization.hpp"

namespace pathattr {

namespace {

// Substream indices under RngPurpose::fixture. Frozen so committed fixture
// bytes never move when new seeded content is added.
enum : std::uint64_t {
  kBumpyL1Weights = 0,
  kBumpyL1Bias = 1,
  kBumpyL2Weights = 2,
  kBumpyL2Bias = 3,
  kDemoImage = 10,
  kFamilyCenters = 20,  // + 3 * instance
  kFamilyAmplitudes = 21,
  kFamilyWidths = 22,
};

}  // namespace

const std::vector<std::string>& builtin_model_names() {
  static const std::vector<std::string> names = {"linear", "bilinear",
                                                 "symmetric", "bump"};
  return names;
}

bool is_builtin_model(const std::string& name) {
  for (const std::string& n : builtin_model_names()) {
    if (n == name) return true;
  }
  return false;
}

ModelPtr builtin_model(const std::string& name) {
  if (name == "linear") {
    return std::make_shared<LinearModel>(std::vector<double>{2.0, 3.0}, 0.0);
  }
  if (name == "bilinear") {
    return std::make_shared<BilinearProductModel>(
        2, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
  }
  if (name == "symmetric") {
    return std::make_shared<SymmetricSumModel>(4,
                                               SymmetricSumModel::G::softplus);
  }
  if (name == "bump") {
    // A single narrow bump just off the (0,0)-(1,1) diagonal: straight paths
    // between box corners graze it, which is what the gradient-magnitude
    // diagnostics and the loop experiments want to expose.
    return std::make_shared<BumpMixtureModel>(
        2, std::vector<std::vector<double>>{{0.585, 0.415}},
        std::vector<double>{3.0}, std::vector<double>{0.1});
  }
  throw InputError("unknown builtin model '" + name + "' (want linear|" +
                   "bilinear|symmetric|bump)");
}

ModelPtr bumpy_mlp(std::uint64_t seed) {
  const std::size_t in = 64;
  const std::size_t hidden = 32;
  const std::size_t out = 3;

  MlpLayer l1;
  l1.rows = hidden;
  l1.cols = in;
  l1.weights = StreamRng(seed, RngPurpose::fixture, kBumpyL1Weights)
                   .normal_vector(hidden * in);
  for (double& w : l1.weights) w /= std::sqrt(static_cast<double>(in));
  l1.bias =
      StreamRng(seed, RngPurpose::fixture, kBumpyL1Bias).normal_vector(hidden);
  for (double& b : l1.bias) b *= 0.1;
  l1.activation = Activation::softplus;

  MlpLayer l2;
  l2.rows = out;
  l2.cols = hidden;
  l2.weights = StreamRng(seed, RngPurpose::fixture, kBumpyL2Weights)
                   .normal_vector(out * hidden);
  for (double& w : l2.weights) w /= std::sqrt(static_cast<double>(hidden));
  l2.bias =
      StreamRng(seed, RngPurpose::fixture, kBumpyL2Bias).normal_vector(out);
  for (double& b : l2.bias) b *= 0.1;
  l2.activation = Activation::identity;

  return std::make_shared<MlpModel>(std::vector<MlpLayer>{l1, l2},
                                    Shape::image(8, 8, 1), out);
}

ModelPtr bump_family_instance(std::uint64_t instance) {
  const std::size_t n = 64;
  const std::size_t bumps = 6;
  const std::uint64_t base = kFamilyCenters + 3 * instance;

  StreamRng center_rng(instance, RngPurpose::fixture, base);
  StreamRng amp_rng(instance, RngPurpose::fixture, base + 1);
  StreamRng width_rng(instance, RngPurpose::fixture, base + 2);

  std::vector<std::vector<double>> centers;
  std::vector<double> amplitudes;
  std::vector<double> widths;
  centers.reserve(bumps);
  for (std::size_t m = 0; m < bumps; ++m) {
    // Cluster the bumps near the middle of the box. In 64 dimensions a
    // random point sits at squared distance ~n/12 ~ 5.3 from the box center
    // while the chord between two random points passes within ~2 of it, so a
    // mid-box cluster with widths ~0.6 is steep terrain that straight paths
    // graze but endpoints never sit on — the regime where path choice
    // matters.
    centers.push_back(center_rng.uniform_vector(n, 0.3, 0.7));
    const double magnitude = amp_rng.uniform(2.0, 4.0);
    amplitudes.push_back(m % 2 == 0 ? magnitude : -magnitude);
    widths.push_back(width_rng.uniform(0.5, 0.65));
  }
  return std::make_shared<BumpMixtureModel>(n, std::move(centers),
                                            std::move(amplitudes),
                                            std::move(widths),
                                            Shape::image(8, 8, 1));
}

ImageBuffer ones_image() {
  ImageBuffer image;
  image.width = 2;
  image.height = 1;
  image.channels = 1;
  image.samples = {255, 255};
  return image;
}

ImageBuffer demo_image(std::uint64_t seed) {
  ImageBuffer image;
  image.width = 8;
  image.height = 8;
  image.channels = 1;
  image.samples.resize(64);
  StreamRng rng(seed, RngPurpose::fixture, kDemoImage);
  for (std::uint8_t& s : image.samples) {
    s = static_cast<std::uint8_t>(rng.uniform(0.0, 256.0));
  }
  return image;
}

ImageBuffer demo_mask_image() {
  ImageBuffer image;
  image.width = 8;
  image.height = 8;
  image.channels = 1;
  image.samples.assign(64, 0);
  for (std::size_t r = 1; r <= 3; ++r) {
    for (std::size_t c = 1; c <= 3; ++c) {
      image.samples[r * 8 + c] = 255;
    }
  }
  return image;
}

void write_fixture_set(const std::string& dir, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create fixture directory '" + dir +
                  "': " + ec.message());
  }
  const auto at = [&dir](const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
  };

  for (const std::string& name : builtin_model_names()) {
    save_model(*builtin_model(name), at(name + ".json"));
  }
  const ModelPtr bumpy = bumpy_mlp(seed);
  save_model(*bumpy, at("bumpy.json"));

  write_image(ones_image(), at("ones.pgm"));
  write_image(demo_image(seed), at("demo.pgm"));
  write_image(demo_mask_image(), at("demo_mask.pgm"));

  // Spot values recorded at generation time; loading tests replay them.
  nlohmann::ordered_json values;
  values["seed"] = seed;
  values["bumpy"]["logits_at_zero"] =
      bumpy->logits(std::vector<double>(64, 0.0));
  const FeatureVector demo = to_features(demo_image(seed));
  values["bumpy"]["logits_at_demo_image"] = bumpy->logits(demo.values);
  write_file_atomic(at("fixture_values.json"), values.dump(2) + "\n");
}

}  // namespace pathattr
