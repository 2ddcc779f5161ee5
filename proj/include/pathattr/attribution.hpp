#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathattr/feature_vector.hpp"
#include "pathattr/model.hpp"
#include "pathattr/trace.hpp"

namespace pathattr {

// Result of one attribution computation. `completeness_residual` and the
// f_* fields are NaN for methods where they are not defined (vanilla
// gradients have no baseline, the edge detector has no model at all).
struct AttributionMap {
  std::vector<double> attributions;
  Shape shape;
  std::string method;
  nlohmann::json config = nlohmann::json::object();
  double completeness_residual = std::numeric_limits<double>::quiet_NaN();
  double f_input = std::numeric_limits<double>::quiet_NaN();
  double f_baseline = std::numeric_limits<double>::quiet_NaN();

  double sum() const;
};

// Straight-line path integral, midpoint Riemann rule: gradients are taken at
// alpha = (t - 0.5) / T and multiplied by the per-slot displacement. Path
// points are computed directly on the line (not accumulated), and the final
// point is the input itself, so displacements telescope to input - baseline
// exactly.
AttributionMap integrated_gradients(const DifferentiableModel& model,
                                    const FeatureVector& input,
                                    const FeatureVector& baseline,
                                    int steps,
                                    std::size_t class_index = 0,
                                    ScoreMode mode = ScoreMode::softmax,
                                    PathTrace* trace = nullptr);

// Adaptive guided path from baseline to input. Each of the `steps` outer
// steps evaluates the gradient once at the current point, then repeatedly
// moves the lowest-|gradient| fraction of still-unfinished features toward
// the input until the remaining L1 distance meets that step's target.
// Features whose coordinate already equals the input are masked out of both
// selection and the attribution update.
AttributionMap guided_ig(const DifferentiableModel& model,
                         const FeatureVector& input,
                         const FeatureVector& baseline,
                         int steps,
                         double fraction = 0.1,
                         std::size_t class_index = 0,
                         ScoreMode mode = ScoreMode::softmax,
                         PathTrace* trace = nullptr);

// Anchored variant: the straight line is split into `anchors` + 1 segments of
// equal parameter length and the guided walk runs independently on each,
// pinning the path to the line at the anchor points. anchors == 0 reduces to
// guided_ig on the whole line. Per-segment step budget is
// ceil(steps / (anchors + 1)).
AttributionMap guided_ig_anchored(const DifferentiableModel& model,
                                  const FeatureVector& input,
                                  const FeatureVector& baseline,
                                  int steps,
                                  double fraction = 0.1,
                                  int anchors = 0,
                                  std::size_t class_index = 0,
                                  ScoreMode mode = ScoreMode::softmax,
                                  PathTrace* trace = nullptr);

// Raw gradient at the input. No baseline, so no completeness residual.
AttributionMap vanilla_gradients(const DifferentiableModel& model,
                                 const FeatureVector& input,
                                 std::size_t class_index = 0,
                                 ScoreMode mode = ScoreMode::softmax);

// Model-free contrast detector for image inputs: per pixel, the mean
// absolute difference between the (channel-averaged) pixel and its in-bounds
// 8-neighborhood. Output shape is height x width x 1.
AttributionMap edge_detector(const FeatureVector& input);

// Base attribution computation applied to a perturbed copy of the input.
using AttributionFn = std::function<AttributionMap(const FeatureVector&)>;

// Mean attribution over `n_samples` Gaussian perturbations of the input
// (stddev `sigma`, one RNG stream per sample index derived from `seed`).
// sigma == 0 reproduces the base method exactly.
AttributionMap smoothgrad(const AttributionFn& base,
                          const FeatureVector& input,
                          int n_samples,
                          double sigma,
                          std::uint64_t seed);

// Pointwise mean of several maps (e.g. one per baseline draw). The residual
// is recomputed against the mean of the per-map value differences.
AttributionMap average_attributions(const std::vector<AttributionMap>& maps);

// Text forms shared by the CLI and bindings: a CSV table with header
// `index,attribution` (one row per feature, shortest round-trip decimals)
// and the sidecar document {method, config, completeness_residual, F_input,
// F_baseline}. NaN fields serialize as JSON null.
std::string attribution_csv(const AttributionMap& map);
nlohmann::ordered_json attribution_sidecar_json(const AttributionMap& map);

// Inverse of attribution_csv: parses the header and rows back into a flat
// attribution vector. Throws IoError on malformed text; `origin` names the
// source in error messages.
std::vector<double> parse_attribution_csv(const std::string& text,
                                          const std::string& origin);

}  // namespace pathattr
