// Command-line front end: attribution runs, evaluation experiments, path
// diagnostics, fixture generation, and gradient checking.
//
// Exit codes: 0 success, 2 configuration error, 3 file I/O error,
// 4 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "pathattr/attribution.hpp"
#include "pathattr/baseline.hpp"
#include "pathattr/errors.hpp"
#include "pathattr/evaluation.hpp"
#include "pathattr/fixtures.hpp"
#include "pathattr/imageio.hpp"
#include "pathattr/model.hpp"
#include "pathattr/model_io.hpp"
#include "pathattr/rng.hpp"
#include "pathattr/serialization.hpp"
#include "pathattr/trace.hpp"

namespace {

using namespace pathattr;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

// A model argument is a builtin name ("linear", "bilinear", "symmetric",
// "bump"), the seeded names "bumpy" and "family:K", or a spec-file path.
ModelPtr resolve_model(const std::string& arg, std::uint64_t seed) {
  if (is_builtin_model(arg)) return builtin_model(arg);
  if (arg == "bumpy") return bumpy_mlp(seed);
  if (arg.rfind("family:", 0) == 0) {
    std::uint64_t instance = 0;
    const std::string tail = arg.substr(7);
    try {
      std::size_t used = 0;
      instance = std::stoull(tail, &used);
      if (used != tail.size()) throw std::invalid_argument(tail);
    } catch (const std::exception&) {
      throw InputError("bad family instance '" + arg +
                       "' (want family:<number>)");
    }
    return bump_family_instance(instance);
  }
  return load_model(arg);
}

constexpr const char* kModelHelp =
    "model spec file, or builtin: linear|bilinear|symmetric|bump, "
    "seeded: bumpy, family:<k>";

std::string default_sidecar_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".json").string();
}

HeatmapNorm parse_heatmap_norm(const std::string& text) {
  HeatmapNorm norm;
  if (text == "abs-max") {
    norm.kind = HeatmapNorm::Kind::abs_max;
    return norm;
  }
  if (text == "percentile") {
    norm.kind = HeatmapNorm::Kind::percentile;
    return norm;
  }
  if (text.rfind("percentile:", 0) == 0) {
    norm.kind = HeatmapNorm::Kind::percentile;
    const std::string tail = text.substr(11);
    try {
      std::size_t used = 0;
      norm.q = std::stod(tail, &used);
      if (used != tail.size()) throw std::invalid_argument(tail);
    } catch (const std::exception&) {
      throw InputError("bad percentile rank '" + tail + "'");
    }
    if (!(norm.q > 0.0 && norm.q <= 100.0)) {
      throw InputError("percentile rank must be in (0, 100], got " + tail);
    }
    return norm;
  }
  throw InputError("unknown heatmap normalization '" + text +
                   "' (want abs-max or percentile[:q])");
}

// ---------------------------------------------------------------------------
// attribute
// ---------------------------------------------------------------------------

struct AttributeOptions {
  std::string method = "gig";
  std::string model;
  std::string input;
  std::string baseline = "black";
  bool baseline_equal_input = false;
  int steps = 200;
  double fraction = 0.1;
  int anchors = 0;
  std::size_t class_index = 0;
  std::string mode = "softmax";
  std::uint64_t seed = 0;
  int samples = 0;
  double sigma = 0.15;
  std::string out;
  std::string json_out;
  std::string trace_out;
  std::string heatmap_out;
  std::string heatmap_norm = "abs-max";
};

int cmd_attribute(const AttributeOptions& opt) {
  const ScoreMode mode = parse_score_mode(opt.mode);
  const ModelPtr model = resolve_model(opt.model, opt.seed);
  const FeatureVector input = to_features(read_image(opt.input));

  std::vector<FeatureVector> baselines;
  if (opt.baseline_equal_input) {
    baselines.push_back(input);
  } else {
    baselines = resolve_baselines(parse_baseline_spec(opt.baseline),
                                  input.shape, opt.seed);
  }

  const bool want_trace = !opt.trace_out.empty();
  if (want_trace && (opt.samples > 0 || baselines.size() != 1)) {
    throw InputError(
        "--trace records a single path: it needs --samples 0 and a "
        "one-baseline spec");
  }
  if (want_trace && (opt.method == "vanilla" || opt.method == "edge")) {
    throw InputError("--trace needs a path method (ig or gig)");
  }

  PathTrace trace;
  PathTrace* trace_ptr = want_trace ? &trace : nullptr;
  const auto attribute_one = [&](const FeatureVector& in,
                                 const FeatureVector& base,
                                 PathTrace* tr) -> AttributionMap {
    if (opt.method == "ig") {
      return integrated_gradients(*model, in, base, opt.steps, opt.class_index,
                                  mode, tr);
    }
    if (opt.method == "gig") {
      return guided_ig_anchored(*model, in, base, opt.steps, opt.fraction,
                                opt.anchors, opt.class_index, mode, tr);
    }
    if (opt.method == "vanilla") {
      return vanilla_gradients(*model, in, opt.class_index, mode);
    }
    if (opt.method == "edge") {
      return edge_detector(in);
    }
    throw InputError("unknown method '" + opt.method +
                     "' (want ig|gig|vanilla|edge)");
  };

  std::vector<AttributionMap> maps;
  maps.reserve(baselines.size());
  for (const FeatureVector& base : baselines) {
    if (opt.samples > 0) {
      const AttributionFn fn = [&](const FeatureVector& x) {
        return attribute_one(x, base, nullptr);
      };
      maps.push_back(smoothgrad(fn, input, opt.samples, opt.sigma, opt.seed));
    } else {
      maps.push_back(attribute_one(input, base, trace_ptr));
    }
  }
  AttributionMap result =
      maps.size() == 1 ? std::move(maps.front()) : average_attributions(maps);
  if (baselines.size() > 1) {
    result.config["baseline"] = opt.baseline;
  }

  write_file_atomic(opt.out, attribution_csv(result));
  const std::string sidecar =
      opt.json_out.empty() ? default_sidecar_path(opt.out) : opt.json_out;
  write_file_atomic(sidecar, attribution_sidecar_json(result).dump(2) + "\n");
  if (want_trace) write_trace(trace, opt.trace_out);
  if (!opt.heatmap_out.empty()) {
    write_image(render_heatmap(result.attributions, result.shape,
                               parse_heatmap_norm(opt.heatmap_norm)),
                opt.heatmap_out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval-closed-path
// ---------------------------------------------------------------------------

struct ClosedPathOptions {
  std::string model;
  std::string method = "gig";
  std::size_t trials = 50;
  std::size_t inputs = 20;
  std::size_t points = 2;
  int steps = 200;
  double fraction = 0.1;
  int anchors = 0;
  std::size_t class_index = 0;
  std::string mode = "softmax";
  std::uint64_t seed = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::string out;
};

int cmd_eval_closed_path(const ClosedPathOptions& opt) {
  const ModelPtr model = resolve_model(opt.model, opt.seed);
  if (opt.inputs < 1) throw InputError("--inputs must be >= 1");

  std::vector<FeatureVector> inputs;
  inputs.reserve(opt.inputs);
  const std::size_t n = model->input_size();
  for (std::size_t k = 0; k < opt.inputs; ++k) {
    StreamRng rng(opt.seed, RngPurpose::test_points, k);
    inputs.emplace_back(rng.uniform_vector(n, opt.lo, opt.hi),
                        model->input_shape());
  }

  ClosedPathConfig config;
  config.method = opt.method;
  config.steps = opt.steps;
  config.fraction = opt.fraction;
  config.anchors = opt.anchors;
  config.class_index = opt.class_index;
  config.mode = parse_score_mode(opt.mode);
  config.trials = opt.trials;
  config.seed = opt.seed;
  config.lo = opt.lo;
  config.hi = opt.hi;
  config.random_points_per_trial = opt.points;

  const ClosedPathReport report = closed_path_experiment(*model, config, inputs);
  write_file_atomic(opt.out, closed_path_json(report).dump(2) + "\n");
  std::cout << "method=" << report.method << " trials=" << report.trials
            << " mse=" << format_double(report.mse) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval-auc
// ---------------------------------------------------------------------------

struct AucOptions {
  std::string attribution;
  std::string mask;
  std::string out;
};

int cmd_eval_auc(const AucOptions& opt) {
  const std::vector<double> values =
      parse_attribution_csv(read_file(opt.attribution), opt.attribution);
  const MaskBuffer mask = read_mask(opt.mask);

  const std::size_t pixels = mask.width * mask.height;
  std::vector<double> scores;
  if (values.size() == pixels) {
    scores = values;
  } else if (pixels > 0 && values.size() % pixels == 0) {
    const std::size_t channels = values.size() / pixels;
    scores = pixel_saliency(values,
                            Shape::image(mask.height, mask.width, channels));
  } else {
    throw InputError("attribution length " + std::to_string(values.size()) +
                     " does not tile the " + std::to_string(mask.width) + "x" +
                     std::to_string(mask.height) + " mask");
  }

  std::vector<int> labels(mask.labels.begin(), mask.labels.end());
  const AucResult result = auc_roc(scores, labels);
  write_file_atomic(opt.out, auc_json(result).dump(2) + "\n");
  std::cout << "auc=" << format_double(result.auc) << " n_pos=" << result.n_pos
            << " n_neg=" << result.n_neg << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// diagnostics
// ---------------------------------------------------------------------------

struct DiagnosticsOptions {
  std::string trace;
  std::string out;
  std::string model;
  std::string input;
  std::string baseline = "black";
  int steps = 200;
  std::size_t class_index = 0;
  std::string mode = "softmax";
  std::uint64_t seed = 0;
  std::string profile_out;
};

int cmd_diagnostics(const DiagnosticsOptions& opt) {
  const PathTrace trace = read_trace(opt.trace);
  const PathDiagnostics diag = path_diagnostics(trace);
  write_file_atomic(opt.out, diagnostics_json(diag).dump(2) + "\n");
  std::cout << "noise_loss=" << format_double(diag.noise_loss)
            << " distance_loss=" << format_double(diag.distance_loss) << "\n";

  if (opt.profile_out.empty()) return kExitOk;
  if (opt.model.empty() || opt.input.empty()) {
    throw InputError("--profile-out needs --model and --input");
  }
  const ModelPtr model = resolve_model(opt.model, opt.seed);
  const FeatureVector input = to_features(read_image(opt.input));
  const std::vector<FeatureVector> baselines = resolve_baselines(
      parse_baseline_spec(opt.baseline), input.shape, opt.seed);
  if (baselines.size() != 1) {
    throw InputError("--profile-out needs a one-baseline spec");
  }
  const DirectionalProfile profile =
      directional_profile(*model, input, baselines.front(), opt.steps,
                          opt.class_index, parse_score_mode(opt.mode));
  std::string csv = "step,delta,grad_norm\n";
  for (std::size_t t = 0; t < profile.delta.size(); ++t) {
    csv += std::to_string(t + 1);
    csv += ',';
    csv += format_double(profile.delta[t]);
    csv += ',';
    csv += format_double(profile.grad_norm[t]);
    csv += '\n';
  }
  write_file_atomic(opt.profile_out, csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gen-fixtures
// ---------------------------------------------------------------------------

struct GenFixturesOptions {
  std::string out_dir;
  std::uint64_t seed = 0;
};

int cmd_gen_fixtures(const GenFixturesOptions& opt) {
  write_fixture_set(opt.out_dir, opt.seed);
  std::cout << "wrote fixture set to " << opt.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check-gradients
// ---------------------------------------------------------------------------

struct CheckGradientsOptions {
  std::vector<std::string> models;
  int points = 100;
  std::uint64_t seed = 0;
  double h = 1e-4;
  double tol = 1e-4;
  std::size_t class_index = 0;
  std::string mode = "softmax";
  std::string out;
};

int cmd_check_gradients(const CheckGradientsOptions& opt) {
  std::vector<std::string> names = opt.models;
  if (names.empty()) {
    names = {"linear",   "bilinear", "symmetric", "bump",
             "bumpy",    "family:0", "family:1",  "family:2"};
  }
  const ScoreMode mode = parse_score_mode(opt.mode);
  if (opt.points < 1) throw InputError("--points must be >= 1");

  nlohmann::ordered_json report;
  report["mode"] = opt.mode;
  report["points"] = opt.points;
  report["h"] = opt.h;
  report["tol"] = opt.tol;
  report["models"] = nlohmann::ordered_json::array();

  bool all_pass = true;
  for (const std::string& name : names) {
    const ModelPtr model = resolve_model(name, opt.seed);
    const std::size_t n = model->input_size();
    double worst = 0.0;
    for (int k = 0; k < opt.points; ++k) {
      StreamRng rng(opt.seed, RngPurpose::test_points,
                    static_cast<std::uint64_t>(k));
      const FeatureVector x(rng.uniform_vector(n, 0.0, 1.0),
                            model->input_shape());
      worst = std::max(
          worst, check_gradient(*model, x, opt.class_index, mode, opt.h));
    }
    const bool pass = worst < opt.tol;
    all_pass = all_pass && pass;
    std::cout << name << ": points=" << opt.points
              << " max_rel_error=" << format_double(worst) << " "
              << (pass ? "PASS" : "FAIL") << "\n";
    nlohmann::ordered_json entry;
    entry["model"] = name;
    entry["max_rel_error"] = worst;
    entry["pass"] = pass;
    report["models"].push_back(std::move(entry));
  }
  if (!opt.out.empty()) {
    write_file_atomic(opt.out, report.dump(2) + "\n");
  }
  return all_pass ? kExitOk : kExitNumeric;
}

// ---------------------------------------------------------------------------

void add_common_path_flags(CLI::App* cmd, int& steps, double& fraction,
                           int& anchors, std::size_t& class_index,
                           std::string& mode, std::uint64_t& seed) {
  cmd->add_option("-T,--steps", steps, "gradient steps along the path")
      ->capture_default_str();
  cmd->add_option("-p,--fraction", fraction,
                  "guided-walk selection fraction in (0, 1]")
      ->capture_default_str();
  cmd->add_option("-K,--anchors", anchors,
                  "straight-line anchors splitting the guided path")
      ->capture_default_str();
  cmd->add_option("--class", class_index, "output class index")
      ->capture_default_str();
  cmd->add_option("--mode", mode, "score to attribute: softmax|logit")
      ->capture_default_str();
  cmd->add_option("--seed", seed, "root seed for all randomness")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "path-method feature attributions and evaluation protocols for "
      "differentiable scalar-output models"};
  app.require_subcommand(1);

  AttributeOptions at;
  CLI::App* attribute = app.add_subcommand(
      "attribute", "compute a feature attribution map for one input");
  attribute->add_option("--method", at.method,
                        "attribution method: ig|gig|vanilla|edge")
      ->capture_default_str();
  attribute->add_option("--model", at.model, kModelHelp)->required();
  attribute->add_option("--input", at.input, "input image (PGM/PPM)")
      ->required();
  attribute->add_option("--baseline", at.baseline,
                        "baseline spec: black|white|black+white|random:N")
      ->capture_default_str();
  attribute->add_flag("--baseline-equal-input", at.baseline_equal_input,
                      "use the input itself as the baseline (test flag)");
  add_common_path_flags(attribute, at.steps, at.fraction, at.anchors,
                        at.class_index, at.mode, at.seed);
  attribute->add_option("--samples", at.samples,
                        "noise-averaging sample count (0 = off)")
      ->capture_default_str();
  attribute->add_option("--sigma", at.sigma,
                        "noise stddev for --samples > 0")
      ->capture_default_str();
  attribute->add_option("--out", at.out, "attribution CSV path")->required();
  attribute->add_option("--json", at.json_out,
                        "sidecar JSON path (default: CSV path with .json)");
  attribute->add_option("--trace", at.trace_out,
                        "write the path trace as JSON lines");
  attribute->add_option("--heatmap", at.heatmap_out,
                        "render a grayscale saliency heatmap (PGM)");
  attribute->add_option("--heatmap-norm", at.heatmap_norm,
                        "heatmap normalization: abs-max|percentile[:q]")
      ->capture_default_str();

  ClosedPathOptions cp;
  CLI::App* closed = app.add_subcommand(
      "eval-closed-path",
      "measure per-feature attribution totals around random closed loops");
  closed->add_option("--model", cp.model, kModelHelp)->required();
  closed->add_option("--method", cp.method, "path method: ig|gig")
      ->capture_default_str();
  closed->add_option("--trials", cp.trials, "number of random loops")
      ->capture_default_str();
  closed->add_option("--inputs", cp.inputs, "number of seeded loop anchors")
      ->capture_default_str();
  closed->add_option("--points", cp.points, "random waypoints per loop")
      ->capture_default_str();
  add_common_path_flags(closed, cp.steps, cp.fraction, cp.anchors,
                        cp.class_index, cp.mode, cp.seed);
  closed->add_option("--lo", cp.lo, "feature lower bound")
      ->capture_default_str();
  closed->add_option("--hi", cp.hi, "feature upper bound")
      ->capture_default_str();
  closed->add_option("--out", cp.out, "report JSON path")->required();

  AucOptions auc;
  CLI::App* eval_auc = app.add_subcommand(
      "eval-auc", "score an attribution CSV against a ground-truth mask");
  eval_auc->add_option("--attribution", auc.attribution, "attribution CSV")
      ->required();
  eval_auc->add_option("--mask", auc.mask, "binary mask (PGM, 0/255)")
      ->required();
  eval_auc->add_option("--out", auc.out, "report JSON path")->required();

  DiagnosticsOptions dg;
  CLI::App* diagnostics = app.add_subcommand(
      "diagnostics",
      "summarize a recorded path trace; optional directional profile");
  diagnostics->add_option("--trace", dg.trace, "path trace JSON lines")
      ->required();
  diagnostics->add_option("--out", dg.out, "diagnostics JSON path")
      ->required();
  diagnostics->add_option("--model", dg.model, kModelHelp);
  diagnostics->add_option("--input", dg.input, "input image (PGM/PPM)");
  diagnostics->add_option("--baseline", dg.baseline,
                          "baseline spec for the profile")
      ->capture_default_str();
  diagnostics
      ->add_option("-T,--steps", dg.steps, "profile sample count")
      ->capture_default_str();
  diagnostics->add_option("--class", dg.class_index, "output class index")
      ->capture_default_str();
  diagnostics->add_option("--mode", dg.mode, "score mode: softmax|logit")
      ->capture_default_str();
  diagnostics->add_option("--seed", dg.seed, "seed for baseline synthesis")
      ->capture_default_str();
  diagnostics->add_option("--profile-out", dg.profile_out,
                          "directional-derivative CSV along the straight path");

  GenFixturesOptions gf;
  CLI::App* gen = app.add_subcommand(
      "gen-fixtures", "write the bundled model specs and test images");
  gen->add_option("--out-dir", gf.out_dir, "output directory")->required();
  gen->add_option("--seed", gf.seed, "seed for the generated content")
      ->capture_default_str();

  CheckGradientsOptions cg;
  CLI::App* check = app.add_subcommand(
      "check-gradients",
      "compare analytic gradients against central finite differences");
  check->add_option("--model", cg.models,
                    std::string(kModelHelp) + " (repeatable; default: all)");
  check->add_option("--points", cg.points, "seeded sample points per model")
      ->capture_default_str();
  check->add_option("--seed", cg.seed, "seed for the sample points")
      ->capture_default_str();
  check->add_option("--fd-step", cg.h, "finite-difference step")
      ->capture_default_str();
  check->add_option("--tol", cg.tol, "max allowed relative error")
      ->capture_default_str();
  check->add_option("--class", cg.class_index, "output class index")
      ->capture_default_str();
  check->add_option("--mode", cg.mode, "score mode: softmax|logit")
      ->capture_default_str();
  check->add_option("--out", cg.out, "optional report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (app.got_subcommand(attribute)) return guarded([&] { return cmd_attribute(at); });
  if (app.got_subcommand(closed)) return guarded([&] { return cmd_eval_closed_path(cp); });
  if (app.got_subcommand(eval_auc)) return guarded([&] { return cmd_eval_auc(auc); });
  if (app.got_subcommand(diagnostics)) return guarded([&] { return cmd_diagnostics(dg); });
  if (app.got_subcommand(gen)) return guarded([&] { return cmd_gen_fixtures(gf); });
  if (app.got_subcommand(check)) return guarded([&] { return cmd_check_gradients(cg); });
  std::cerr << "error: no subcommand\n";
  return kExitConfig;
}
