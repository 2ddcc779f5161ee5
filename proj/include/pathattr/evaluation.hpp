#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathattr/attribution.hpp"
#include "pathattr/feature_vector.hpp"
#include "pathattr/model.hpp"
#include "pathattr/trace.hpp"

namespace pathattr {

// ---------------------------------------------------------------------------
// Closed-path ground-truth experiment: over a loop A -> P1 -> ... -> Pk -> A
// the per-feature attribution sums of an exact path method cancel, so the
// squared residual measures a method's discretization/path error without any
// human ground truth.
// ---------------------------------------------------------------------------

struct ClosedPathReport {
  std::string method;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double mse = 0.0;                   // flat over (trial, input, feature)
  std::vector<double> per_trial_mse;  // one entry per trial, trial order
};

// Attribution over one directed segment: `from` plays the baseline role,
// `to` the input role.
using SegmentAttributor = std::function<std::vector<double>(
    const FeatureVector& from, const FeatureVector& to)>;

// Core experiment over an arbitrary segment attributor (tests plug analytic
// integrals in here). For trial r the intermediate points are drawn from the
// substream (seed, closed_path, r), uniformly in [lo, hi]^N, and shared by
// every input of that trial; trials are therefore independent and could run
// concurrently, with the reduction fixed in trial-index order.
ClosedPathReport closed_path_experiment(const SegmentAttributor& segment,
                                        const std::string& method_tag,
                                        const std::vector<FeatureVector>& inputs,
                                        std::size_t trials,
                                        std::uint64_t seed,
                                        double lo,
                                        double hi,
                                        std::size_t random_points_per_trial = 2);

struct ClosedPathConfig {
  std::string method = "gig";  // "ig" or "gig"
  int steps = 200;
  double fraction = 0.1;
  int anchors = 0;
  std::size_t class_index = 0;
  ScoreMode mode = ScoreMode::softmax;
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t random_points_per_trial = 2;
};

// Convenience wrapper running the experiment with one of the built-in path
// methods.
ClosedPathReport closed_path_experiment(const DifferentiableModel& model,
                                        const ClosedPathConfig& config,
                                        const std::vector<FeatureVector>& inputs);

// ---------------------------------------------------------------------------
// ROC / AUC localization metric: attributions as prediction scores against a
// binary relevance mask.
// ---------------------------------------------------------------------------

struct AucResult {
  double auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  // Sweep over distinct score thresholds, descending; point 0 is the empty
  // classification (threshold above every score).
  std::vector<double> thresholds;
  std::vector<double> tpr;
  std::vector<double> fpr;
};

// Mann-Whitney rank statistic with the 0.5 tie convention, accumulated in
// integer half-units so the result is exact (and provably equal to the
// trapezoidal sweep over all thresholds). Throws DegenerateMaskError when the
// mask is all-0 or all-1, InputError on length mismatch or non-binary labels.
AucResult auc_roc(const std::vector<double>& scores,
                  const std::vector<int>& mask);
AucResult auc_roc(const AttributionMap& attribution,
                  const std::vector<int>& mask);

// ---------------------------------------------------------------------------
// Path diagnostics over a recorded trace.
// ---------------------------------------------------------------------------

struct PathDiagnostics {
  // sum_t sum_i |g_i dx_i|: total unsigned attribution flow; always at least
  // |sum of signed increments|.
  double noise_loss = 0.0;
  // sum_t ||x_t - line(alpha_t)||_2 * dAlpha_t, where line() is the straight
  // segment between the trace endpoints and alpha is the covered-L1 fraction
  // recorded in the trace (the method-independent parameterization).
  double distance_loss = 0.0;
  // cosine_profile[s][t] = raw cosine between step gradients s and t,
  // clamped to [-1, 1]; 0 when either gradient is the zero vector.
  std::vector<std::vector<double>> cosine_profile;
  // Per-step signed attribution increment and gradient L2 norm.
  std::vector<double> delta_curve;
  std::vector<double> grad_norm_curve;
};

PathDiagnostics path_diagnostics(const PathTrace& trace);

// ---------------------------------------------------------------------------
// Straight-line gradient profile: delta_t = grad F(mid_t) . (input - baseline)
// / steps and grad_norm_t = ||grad F(mid_t)||_2, sampled at the midpoint of
// each of the `steps` slots. A degenerate segment (baseline == input) yields
// all-zero curves.
// ---------------------------------------------------------------------------

struct DirectionalProfile {
  std::vector<double> delta;
  std::vector<double> grad_norm;
};

DirectionalProfile directional_profile(const DifferentiableModel& model,
                                       const FeatureVector& input,
                                       const FeatureVector& baseline,
                                       int steps,
                                       std::size_t class_index = 0,
                                       ScoreMode mode = ScoreMode::softmax);

// Report serialization (fixed key sets).
nlohmann::ordered_json closed_path_json(const ClosedPathReport& report);
nlohmann::ordered_json auc_json(const AucResult& result);
nlohmann::ordered_json diagnostics_json(const PathDiagnostics& diagnostics);

}  // namespace pathattr
