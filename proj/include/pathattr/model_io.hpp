#pragma once

#include <string>

#include "pathattr/model.hpp"

namespace pathattr {

// Reads a model spec file. Two top-level forms are accepted:
//
//   {"input_shape": [h,w,c]|[n],
//    "layers": [{"weights": [[...]], "bias": [...],
//                "activation": "relu"|"softplus"|"identity"}, ...],
//    "outputs": C}
//
// builds a feed-forward model (row-major weights, layer i consumes layer i-1
// output), and
//
//   {"analytic": {"kind": "linear"|"bilinear_product"|"symmetric_sum"|
//                 "bump_mixture", ...}}
//
// builds one of the closed-form builtin models, which cannot be expressed
// exactly as relu/softplus layer stacks.
//
// Errors: IoError when the file cannot be read; SpecParseError for bad JSON
// or missing/ill-typed fields; DimensionMismatchError when layers do not
// compose; UnknownActivationError for activation names outside the set.
ModelPtr load_model(const std::string& path);

// Same parser over an in-memory document; origin names the source in errors.
ModelPtr parse_model_spec(const std::string& json_text,
                          const std::string& origin);

// Serializes any builtin or feed-forward model back to spec-file JSON text.
std::string model_spec_json(const DifferentiableModel& model);

void save_model(const DifferentiableModel& model, const std::string& path);

}  // namespace pathattr
