#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathattr/imageio.hpp"
#include "pathattr/model.hpp"

namespace pathattr {

// Canonical single-logit demo models, addressable by name anywhere a model
// path is accepted. Names: "linear" (w = (2, 3)), "bilinear" (x0 * x1),
// "symmetric" (softplus sum over 4 features), "bump" (2-D off-path bump
// mixture).
bool is_builtin_model(const std::string& name);
ModelPtr builtin_model(const std::string& name);
const std::vector<std::string>& builtin_model_names();

// Seeded softplus MLP over an 8x8 grayscale input with three output classes;
// the bundled "bumpy" spec is this model at seed 0.
ModelPtr bumpy_mlp(std::uint64_t seed);

// One instance of the 64-feature bump-mixture family used by the loop
// experiments. `instance` selects the seeded variant; the input domain is
// the unit box over an 8x8 grid.
ModelPtr bump_family_instance(std::uint64_t instance);

// Bundled test images.
ImageBuffer ones_image();                    // 1x2, both samples 255
ImageBuffer demo_image(std::uint64_t seed);  // 8x8 seeded grayscale
ImageBuffer demo_mask_image();               // 8x8 mask, 3x3 object block

// Writes the whole fixture set into dir (created if needed): model specs
// linear/bilinear/symmetric/bump/bumpy.json, images ones/demo/demo_mask.pgm,
// and fixture_values.json recording spot values of the seeded models. Every
// byte derives from `seed`.
void write_fixture_set(const std::string& dir, std::uint64_t seed);

}  // namespace pathattr
