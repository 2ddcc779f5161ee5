#include "pathattr/model_io.hpp"

#include <json.hpp>

#include "pathattr/errors.hpp"
#include "pathattr/serialization.hpp"

namespace pathattr {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const json& field(const json& j, const char* name, const std::string& origin) {
  const auto it = j.find(name);
  if (it == j.end()) {
    throw SpecParseError(origin + ": missing field '" + name + "'");
  }
  return *it;
}

double as_number(const json& j, const char* what, const std::string& origin) {
  if (!j.is_number()) {
    throw SpecParseError(origin + ": '" + std::string(what) +
                         "' must be a number");
  }
  return j.get<double>();
}

std::size_t as_count(const json& j, const char* what,
                     const std::string& origin) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) {
    throw SpecParseError(origin + ": '" + std::string(what) +
                         "' must be a positive integer");
  }
  return static_cast<std::size_t>(j.get<long long>());
}

std::vector<double> as_vector(const json& j, const char* what,
                              const std::string& origin) {
  if (!j.is_array()) {
    throw SpecParseError(origin + ": '" + std::string(what) +
                         "' must be an array of numbers");
  }
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(as_number(e, what, origin));
  return v;
}

Shape parse_shape(const json& j, const std::string& origin) {
  if (!j.is_array() || (j.size() != 1 && j.size() != 3)) {
    throw SpecParseError(origin +
                         ": 'input_shape' must be [n] or [h, w, c]");
  }
  Shape shape;
  for (const auto& e : j) {
    shape.dims.push_back(as_count(e, "input_shape", origin));
  }
  return shape;
}

ModelPtr parse_layers_spec(const json& j, const std::string& origin) {
  const Shape input_shape = parse_shape(field(j, "input_shape", origin), origin);
  const std::size_t outputs = as_count(field(j, "outputs", origin), "outputs",
                                       origin);

  const json& layers_j = field(j, "layers", origin);
  if (!layers_j.is_array() || layers_j.empty()) {
    throw SpecParseError(origin + ": 'layers' must be a non-empty array");
  }
  std::vector<MlpLayer> layers;
  layers.reserve(layers_j.size());
  for (const auto& lj : layers_j) {
    if (!lj.is_object()) {
      throw SpecParseError(origin + ": each layer must be an object");
    }
    MlpLayer layer;
    const json& wj = field(lj, "weights", origin);
    if (!wj.is_array() || wj.empty()) {
      throw SpecParseError(origin +
                           ": 'weights' must be a non-empty array of rows");
    }
    layer.rows = wj.size();
    for (const auto& row_j : wj) {
      const std::vector<double> row = as_vector(row_j, "weights", origin);
      if (layer.cols == 0) layer.cols = row.size();
      if (row.empty() || row.size() != layer.cols) {
        throw DimensionMismatchError(origin +
                                     ": weight rows have unequal lengths");
      }
      layer.weights.insert(layer.weights.end(), row.begin(), row.end());
    }
    layer.bias = as_vector(field(lj, "bias", origin), "bias", origin);
    const json& act = field(lj, "activation", origin);
    if (!act.is_string()) {
      throw SpecParseError(origin + ": 'activation' must be a string");
    }
    layer.activation = parse_activation(act.get<std::string>());
    layers.push_back(std::move(layer));
  }
  try {
    return std::make_shared<MlpModel>(std::move(layers), input_shape, outputs);
  } catch (const InputError& e) {
    // Parameter-content problems (non-finite weights) surface as file errors.
    throw SpecParseError(origin + ": " + e.what());
  }
}

ModelPtr parse_analytic_spec(const json& j, const std::string& origin) {
  if (!j.is_object()) {
    throw SpecParseError(origin + ": 'analytic' must be an object");
  }
  const json& kind_j = field(j, "kind", origin);
  if (!kind_j.is_string()) {
    throw SpecParseError(origin + ": 'kind' must be a string");
  }
  const std::string kind = kind_j.get<std::string>();
  try {
    if (kind == "linear") {
      return std::make_shared<LinearModel>(
          as_vector(field(j, "weights", origin), "weights", origin),
          as_number(field(j, "bias", origin), "bias", origin));
    }
    if (kind == "bilinear_product") {
      const std::size_t n =
          as_count(field(j, "input_size", origin), "input_size", origin);
      const json& pairs_j = field(j, "pairs", origin);
      if (!pairs_j.is_array()) {
        throw SpecParseError(origin + ": 'pairs' must be an array");
      }
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (const auto& pj : pairs_j) {
        if (!pj.is_array() || pj.size() != 2) {
          throw SpecParseError(origin + ": each pair must be [i, j]");
        }
        pairs.emplace_back(pj[0].get<std::size_t>(), pj[1].get<std::size_t>());
      }
      return std::make_shared<BilinearProductModel>(n, std::move(pairs));
    }
    if (kind == "symmetric_sum") {
      const std::size_t n =
          as_count(field(j, "input_size", origin), "input_size", origin);
      const json& gj = field(j, "g", origin);
      if (!gj.is_string()) {
        throw SpecParseError(origin + ": 'g' must be a string");
      }
      const std::string g = gj.get<std::string>();
      if (g != "square" && g != "softplus") {
        throw SpecParseError(origin + ": 'g' must be square or softplus");
      }
      return std::make_shared<SymmetricSumModel>(
          n, g == "square" ? SymmetricSumModel::G::square
                           : SymmetricSumModel::G::softplus);
    }
    if (kind == "bump_mixture") {
      const std::size_t n =
          as_count(field(j, "input_size", origin), "input_size", origin);
      const json& cj = field(j, "centers", origin);
      if (!cj.is_array()) {
        throw SpecParseError(origin + ": 'centers' must be an array");
      }
      std::vector<std::vector<double>> centers;
      for (const auto& c : cj) centers.push_back(as_vector(c, "centers", origin));
      Shape shape;
      if (j.contains("input_shape")) {
        shape = parse_shape(j["input_shape"], origin);
      }
      return std::make_shared<BumpMixtureModel>(
          n, std::move(centers),
          as_vector(field(j, "amplitudes", origin), "amplitudes", origin),
          as_vector(field(j, "widths", origin), "widths", origin), shape);
    }
  } catch (const IoError&) {
    throw;
  } catch (const InputError& e) {
    throw SpecParseError(origin + ": " + e.what());
  }
  throw SpecParseError(origin + ": unknown analytic kind '" + kind + "'");
}

json shape_json(const Shape& shape) {
  json a = json::array();
  for (std::size_t d : shape.dims) a.push_back(d);
  return a;
}

}  // namespace

ModelPtr parse_model_spec(const std::string& json_text,
                          const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SpecParseError(origin + ": not valid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) {
    throw SpecParseError(origin + ": top level must be an object");
  }
  if (j.contains("layers")) return parse_layers_spec(j, origin);
  if (j.contains("analytic")) return parse_analytic_spec(j["analytic"], origin);
  throw SpecParseError(origin +
                       ": model spec needs a 'layers' or 'analytic' section");
}

ModelPtr load_model(const std::string& path) {
  return parse_model_spec(read_file(path), path);
}

std::string model_spec_json(const DifferentiableModel& model) {
  ordered_json j;
  if (const auto* mlp = dynamic_cast<const MlpModel*>(&model)) {
    j["input_shape"] = shape_json(mlp->input_shape());
    ordered_json layers = ordered_json::array();
    for (const MlpLayer& layer : mlp->layers()) {
      ordered_json lj;
      ordered_json rows = ordered_json::array();
      for (std::size_t r = 0; r < layer.rows; ++r) {
        ordered_json row = ordered_json::array();
        for (std::size_t c = 0; c < layer.cols; ++c) {
          row.push_back(layer.weights[r * layer.cols + c]);
        }
        rows.push_back(std::move(row));
      }
      lj["weights"] = std::move(rows);
      lj["bias"] = layer.bias;
      lj["activation"] = activation_name(layer.activation);
      layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    j["outputs"] = mlp->output_arity();
  } else if (const auto* lin = dynamic_cast<const LinearModel*>(&model)) {
    j["analytic"] = {{"kind", "linear"},
                     {"weights", lin->weights()},
                     {"bias", lin->bias()}};
  } else if (const auto* bil =
                 dynamic_cast<const BilinearProductModel*>(&model)) {
    ordered_json pairs = ordered_json::array();
    for (const auto& [a, b] : bil->pairs()) {
      pairs.push_back(ordered_json::array({a, b}));
    }
    j["analytic"] = {{"kind", "bilinear_product"},
                     {"input_size", bil->input_size()},
                     {"pairs", std::move(pairs)}};
  } else if (const auto* sym = dynamic_cast<const SymmetricSumModel*>(&model)) {
    j["analytic"] = {
        {"kind", "symmetric_sum"},
        {"input_size", sym->input_size()},
        {"g", sym->g() == SymmetricSumModel::G::square ? "square" : "softplus"}};
  } else if (const auto* bump = dynamic_cast<const BumpMixtureModel*>(&model)) {
    ordered_json a = {{"kind", "bump_mixture"},
                      {"input_size", bump->input_size()},
                      {"centers", bump->centers()},
                      {"amplitudes", bump->amplitudes()},
                      {"widths", bump->widths()}};
    if (bump->input_shape().is_image()) {
      a["input_shape"] = shape_json(bump->input_shape());
    }
    j["analytic"] = std::move(a);
  } else {
    throw InputError("model '" + model.describe() +
                     "' has no spec-file serialization");
  }
  return j.dump(2) + "\n";
}

void save_model(const DifferentiableModel& model, const std::string& path) {
  write_file_atomic(path, model_spec_json(model));
}

}  // namespace pathattr
