#include "pathattr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "pathattr/errors.hpp"
#include "pathattr/rng.hpp"

namespace pathattr {

namespace {

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

ClosedPathReport closed_path_experiment(const SegmentAttributor& segment,
                                        const std::string& method_tag,
                                        const std::vector<FeatureVector>& inputs,
                                        std::size_t trials,
                                        std::uint64_t seed,
                                        double lo,
                                        double hi,
                                        std::size_t random_points_per_trial) {
  if (inputs.empty()) throw InputError("closed-path experiment needs inputs");
  if (trials < 1) throw InputError("closed-path experiment needs trials >= 1");
  if (random_points_per_trial < 1) {
    throw InputError("closed-path experiment needs at least one random point");
  }
  if (!(lo < hi)) throw InputError("feature bounds must satisfy lo < hi");
  const std::size_t n = inputs.front().size();
  for (const FeatureVector& in : inputs) {
    in.validate();
    if (in.size() != n) {
      throw InputError("closed-path inputs disagree on feature count");
    }
  }

  ClosedPathReport report;
  report.method = method_tag;
  report.trials = trials;
  report.seed = seed;
  report.per_trial_mse.reserve(trials);

  double total_sq = 0.0;
  for (std::size_t r = 0; r < trials; ++r) {
    // One substream per trial: the loop's waypoints are independent of both
    // the trial order and the input set.
    StreamRng rng(seed, RngPurpose::closed_path, r);
    std::vector<std::vector<double>> waypoints(random_points_per_trial);
    for (auto& p : waypoints) p = rng.uniform_vector(n, lo, hi);

    double trial_sq = 0.0;
    for (const FeatureVector& a : inputs) {
      // Loop a -> p1 -> ... -> pk -> a; each hop attributes with `from` as
      // the baseline and `to` as the input.
      std::vector<double> total(n, 0.0);
      FeatureVector from = a;
      for (std::size_t w = 0; w <= waypoints.size(); ++w) {
        FeatureVector to = (w == waypoints.size())
                               ? a
                               : FeatureVector(waypoints[w], a.shape);
        const std::vector<double> attr = segment(from, to);
        if (attr.size() != n) {
          throw InputError("segment attributor returned wrong length");
        }
        for (std::size_t i = 0; i < n; ++i) total[i] += attr[i];
        from = std::move(to);
      }
      for (std::size_t i = 0; i < n; ++i) trial_sq += total[i] * total[i];
    }
    const double denom = static_cast<double>(inputs.size() * n);
    report.per_trial_mse.push_back(trial_sq / denom);
    total_sq += trial_sq;
  }

  report.mse =
      total_sq / static_cast<double>(trials * inputs.size() * n);
  return report;
}

ClosedPathReport closed_path_experiment(const DifferentiableModel& model,
                                        const ClosedPathConfig& config,
                                        const std::vector<FeatureVector>& inputs) {
  SegmentAttributor segment;
  if (config.method == "ig") {
    segment = [&model, &config](const FeatureVector& from,
                                const FeatureVector& to) {
      return integrated_gradients(model, to, from, config.steps,
                                  config.class_index, config.mode)
          .attributions;
    };
  } else if (config.method == "gig") {
    segment = [&model, &config](const FeatureVector& from,
                                const FeatureVector& to) {
      return guided_ig_anchored(model, to, from, config.steps, config.fraction,
                                config.anchors, config.class_index, config.mode)
          .attributions;
    };
  } else {
    throw InputError("closed-path method must be 'ig' or 'gig', got '" +
                     config.method + "'");
  }
  return closed_path_experiment(segment, config.method, inputs, config.trials,
                                config.seed, config.lo, config.hi,
                                config.random_points_per_trial);
}

AucResult auc_roc(const std::vector<double>& scores,
                  const std::vector<int>& mask) {
  if (scores.size() != mask.size()) {
    throw InputError("scores and mask disagree on length");
  }
  if (scores.empty()) throw InputError("cannot rank an empty score vector");
  require_finite(scores, "scores");

  std::size_t n_pos = 0;
  for (int m : mask) {
    if (m != 0 && m != 1) {
      throw InputError("mask labels must be 0 or 1");
    }
    n_pos += static_cast<std::size_t>(m);
  }
  const std::size_t n_neg = mask.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DegenerateMaskError("mask must contain both classes (has " +
                              std::to_string(n_pos) + " positives of " +
                              std::to_string(mask.size()) + ")");
  }

  // Sort indices by score ascending and walk tie groups. The Mann-Whitney
  // count is accumulated in integer half-units: each positive contributes 2
  // per negative ranked strictly below it and 1 per tied negative, making the
  // statistic exact before the single final division.
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  std::uint64_t half_units = 0;
  std::uint64_t neg_below = 0;
  std::size_t at = 0;
  while (at < idx.size()) {
    std::size_t end = at;
    std::uint64_t group_pos = 0;
    std::uint64_t group_neg = 0;
    while (end < idx.size() && scores[idx[end]] == scores[idx[at]]) {
      if (mask[idx[end]] == 1) {
        ++group_pos;
      } else {
        ++group_neg;
      }
      ++end;
    }
    half_units += group_pos * (2 * neg_below + group_neg);
    neg_below += group_neg;
    at = end;
  }

  AucResult result;
  result.n_pos = n_pos;
  result.n_neg = n_neg;
  result.auc = static_cast<double>(half_units) /
               (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));

  // Threshold sweep for the curve, descending: point k classifies
  // score >= thresholds[k] as positive.
  result.thresholds.push_back(std::numeric_limits<double>::infinity());
  result.tpr.push_back(0.0);
  result.fpr.push_back(0.0);
  std::size_t cum_pos = 0;
  std::size_t cum_neg = 0;
  for (std::size_t k = idx.size(); k > 0;) {
    std::size_t start = k;
    const double value = scores[idx[k - 1]];
    while (start > 0 && scores[idx[start - 1]] == value) {
      if (mask[idx[start - 1]] == 1) {
        ++cum_pos;
      } else {
        ++cum_neg;
      }
      --start;
    }
    result.thresholds.push_back(value);
    result.tpr.push_back(static_cast<double>(cum_pos) /
                         static_cast<double>(n_pos));
    result.fpr.push_back(static_cast<double>(cum_neg) /
                         static_cast<double>(n_neg));
    k = start;
  }
  return result;
}

AucResult auc_roc(const AttributionMap& attribution,
                  const std::vector<int>& mask) {
  return auc_roc(attribution.attributions, mask);
}

PathDiagnostics path_diagnostics(const PathTrace& trace) {
  if (trace.steps.empty()) {
    throw InputError("path diagnostics need a non-empty trace");
  }
  const std::size_t n = trace.start.size();
  for (const TraceStep& step : trace.steps) {
    if (step.x.size() != n || step.dx.size() != n) {
      throw InputError("trace step geometry disagrees with the start point");
    }
    if (step.g.size() != n) {
      throw InputError("trace lacks per-step gradients");
    }
  }

  PathDiagnostics out;
  const std::vector<double>& end = trace.steps.back().x;

  double alpha_prev = 0.0;
  for (const TraceStep& step : trace.steps) {
    double signed_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double inc = step.g[i] * step.dx[i];
      out.noise_loss += std::abs(inc);
      signed_sum += inc;
    }
    out.delta_curve.push_back(signed_sum);
    out.grad_norm_curve.push_back(l2_norm(step.g));

    // Deviation from the straight chord at the same covered-L1 fraction.
    const double alpha = step.alpha_equivalent;
    const double d_alpha = std::max(alpha - alpha_prev, 0.0);
    double dev_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double line_i = (end[i] - trace.start[i]) * alpha + trace.start[i];
      const double d = step.x[i] - line_i;
      dev_sq += d * d;
    }
    out.distance_loss += std::sqrt(dev_sq) * d_alpha;
    alpha_prev = alpha;
  }

  const std::size_t s_count = trace.steps.size();
  std::vector<double> norms(s_count);
  for (std::size_t s = 0; s < s_count; ++s) {
    norms[s] = l2_norm(trace.steps[s].g);
  }
  out.cosine_profile.assign(s_count, std::vector<double>(s_count, 0.0));
  for (std::size_t s = 0; s < s_count; ++s) {
    for (std::size_t t = s; t < s_count; ++t) {
      double value = 0.0;
      if (norms[s] > 0.0 && norms[t] > 0.0) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          dot += trace.steps[s].g[i] * trace.steps[t].g[i];
        }
        value = std::clamp(dot / (norms[s] * norms[t]), -1.0, 1.0);
      }
      out.cosine_profile[s][t] = value;
      out.cosine_profile[t][s] = value;
    }
  }
  return out;
}

DirectionalProfile directional_profile(const DifferentiableModel& model,
                                       const FeatureVector& input,
                                       const FeatureVector& baseline,
                                       int steps,
                                       std::size_t class_index,
                                       ScoreMode mode) {
  input.validate();
  baseline.validate();
  if (input.size() != model.input_size() || baseline.size() != input.size()) {
    throw InputError("directional profile endpoints disagree with the model");
  }
  if (steps < 1) {
    throw InputError("step count must be >= 1, got " + std::to_string(steps));
  }

  DirectionalProfile profile;
  profile.delta.assign(static_cast<std::size_t>(steps), 0.0);
  profile.grad_norm.assign(static_cast<std::size_t>(steps), 0.0);
  if (input.values == baseline.values) {
    return profile;  // a point path has nothing to sample
  }

  const std::size_t n = input.size();
  const double t_count = static_cast<double>(steps);
  for (int t = 1; t <= steps; ++t) {
    const double alpha = (static_cast<double>(t) - 0.5) / t_count;
    std::vector<double> point(n);
    for (std::size_t i = 0; i < n; ++i) {
      point[i] = (input.values[i] - baseline.values[i]) * alpha +
                 baseline.values[i];
    }
    GradientRecord rec = gradient(
        model, FeatureVector(std::move(point), Shape::flat(n)), class_index,
        mode);
    double directional = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      directional += rec.gradient[i] * (input.values[i] - baseline.values[i]);
    }
    profile.delta[static_cast<std::size_t>(t - 1)] = directional / t_count;
    profile.grad_norm[static_cast<std::size_t>(t - 1)] = l2_norm(rec.gradient);
  }
  return profile;
}

nlohmann::ordered_json closed_path_json(const ClosedPathReport& report) {
  nlohmann::ordered_json j;
  j["method"] = report.method;
  j["trials"] = report.trials;
  j["mse"] = report.mse;
  j["per_trial_mse"] = report.per_trial_mse;
  return j;
}

nlohmann::ordered_json auc_json(const AucResult& result) {
  nlohmann::ordered_json j;
  j["auc"] = result.auc;
  j["n_pos"] = result.n_pos;
  j["n_neg"] = result.n_neg;
  return j;
}

nlohmann::ordered_json diagnostics_json(const PathDiagnostics& diagnostics) {
  nlohmann::ordered_json j;
  j["noise_loss"] = diagnostics.noise_loss;
  j["distance_loss"] = diagnostics.distance_loss;
  j["cosine_profile"] = diagnostics.cosine_profile;
  j["delta_curve"] = diagnostics.delta_curve;
  j["grad_norm_curve"] = diagnostics.grad_norm_curve;
  return j;
}

}  // namespace pathattr
