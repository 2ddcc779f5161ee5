#include "pathattr/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string_view>
#include <utility>

#include "pathattr/errors.hpp"
#include "pathattr/rng.hpp"
#include "pathattr/serialization.hpp"

namespace pathattr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_endpoints(const DifferentiableModel& model,
                     const FeatureVector& input,
                     const FeatureVector& baseline) {
  input.validate();
  baseline.validate();
  if (input.values.size() != model.input_size()) {
    throw InputError("input has " + std::to_string(input.values.size()) +
                     " features, model expects " +
                     std::to_string(model.input_size()));
  }
  if (baseline.values.size() != input.values.size()) {
    throw InputError("baseline has " + std::to_string(baseline.values.size()) +
                     " features, input has " +
                     std::to_string(input.values.size()));
  }
}

void check_steps(int steps) {
  if (steps < 1) {
    throw InputError("step count must be >= 1, got " + std::to_string(steps));
  }
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

// Point on the straight segment from `from` to `to` at parameter `ratio`.
// ratio == 0 reproduces `from` bitwise.
std::vector<double> line_point(const std::vector<double>& from,
                               const std::vector<double>& to,
                               double ratio) {
  std::vector<double> x(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    x[i] = (to[i] - from[i]) * ratio + from[i];
  }
  return x;
}

// Covered-distance fraction used for alpha_equivalent. A zero-length segment
// counts as fully covered.
double covered_fraction(double l1_remaining, double d_total) {
  if (d_total > 0.0) return 1.0 - l1_remaining / d_total;
  return 1.0;
}

void finish_map(AttributionMap& map,
                const DifferentiableModel& model,
                const FeatureVector& input,
                const FeatureVector& baseline,
                std::size_t class_index,
                ScoreMode mode) {
  map.f_input = evaluate(model, input, class_index, mode);
  map.f_baseline = evaluate(model, baseline, class_index, mode);
  map.completeness_residual = std::abs(map.sum() - (map.f_input - map.f_baseline));
  require_finite(map.attributions, "attributions");
}

// Guided walk over one straight segment. Appends to `attr` and (optionally)
// `trace`; `t_offset` shifts the recorded outer-step index so anchored runs
// produce one continuous trace. alpha/l1 fields in the trace are recorded
// relative to the segment; anchored runs rewrite them globally afterwards.
void guided_walk_segment(const DifferentiableModel& model,
                         const std::vector<double>& seg_input,
                         const std::vector<double>& seg_baseline,
                         int steps,
                         double fraction,
                         std::size_t class_index,
                         ScoreMode mode,
                         std::vector<double>& attr,
                         PathTrace* trace,
                         int t_offset) {
  const std::size_t n = seg_input.size();
  const double d_total = l1_distance(seg_baseline, seg_input);
  std::vector<double> x = seg_baseline;
  std::vector<double> before(n);
  std::vector<char> finished(n);
  std::vector<char> selected(n);
  std::vector<std::size_t> order;
  order.reserve(n);

  for (int t = 1; t <= steps; ++t) {
    // One gradient evaluation per outer step; the inner loop below reuses it
    // even when several moves happen before the step's distance target is met.
    GradientRecord rec =
        gradient(model, FeatureVector(x, Shape::flat(n)), class_index, mode);
    const std::vector<double>& y = rec.gradient;
    const double d_target =
        d_total * (1.0 - static_cast<double>(t) / static_cast<double>(steps));

    std::size_t inner = 0;
    while (true) {
      // Features already sitting at the input are finished: they drop out of
      // selection and their (meaningless) gradient never enters the update.
      double d_current = 0.0;
      std::size_t unfinished = 0;
      order.clear();
      for (std::size_t i = 0; i < n; ++i) {
        finished[i] = (x[i] == seg_input[i]) ? 1 : 0;
        if (!finished[i]) {
          d_current += std::abs(x[i] - seg_input[i]);
          order.push_back(i);
          ++unfinished;
        }
      }
      if (d_current <= d_target) break;

      // Lowest-|gradient| fraction of the unfinished features, ties included,
      // so equal-|gradient| features always move together. k-th smallest
      // defines the cut; all-equal magnitudes select everything.
      std::size_t k = static_cast<std::size_t>(
          std::ceil(fraction * static_cast<double>(unfinished)));
      k = std::clamp<std::size_t>(k, 1, unfinished);
      std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return std::abs(y[a]) < std::abs(y[b]);
                       });
      const double threshold = std::abs(y[order[k - 1]]);

      double d_selected = 0.0;
      std::size_t selected_count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        selected[i] = (!finished[i] && std::abs(y[i]) <= threshold) ? 1 : 0;
        if (selected[i]) {
          d_selected += std::abs(x[i] - seg_input[i]);
          ++selected_count;
        }
      }
      if (!(d_selected > 0.0)) {
        throw ProgressError("guided path selection covers no distance");
      }

      const double delta = (d_current - d_target) / d_selected;
      before = x;
      if (delta > 1.0) {
        for (std::size_t i = 0; i < n; ++i) {
          if (selected[i]) x[i] = seg_input[i];
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          if (selected[i]) x[i] = (1.0 - delta) * x[i] + delta * seg_input[i];
        }
      }
      if (x == before) break;  // rounding floor: the move is a no-op

      // Finished features never move, so their zero displacement keeps them
      // out of the sum regardless of gradient; zeroing their gradient here
      // mirrors the sentinel rule and is what the trace records.
      double step_attr_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double gi = finished[i] ? 0.0 : y[i];
        const double inc = gi * (x[i] - before[i]);
        attr[i] += inc;
        step_attr_sum += inc;
      }

      if (trace != nullptr) {
        TraceStep step;
        step.t = t_offset + t;
        step.x = x;
        step.g.resize(n);
        step.dx.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          step.g[i] = finished[i] ? 0.0 : y[i];
          step.dx[i] = x[i] - before[i];
        }
        step.delta = delta;
        step.snapped = delta > 1.0;
        step.selected_count = selected_count;
        step.l1_remaining = l1_distance(x, seg_input);
        step.alpha_equivalent = covered_fraction(step.l1_remaining, d_total);
        step.step_attr_sum = step_attr_sum;
        trace->steps.push_back(std::move(step));
      }

      if (delta <= 1.0) break;
      if (++inner > n + 8) {
        throw ProgressError("guided path failed to reach its distance target");
      }
    }
  }
}

}  // namespace

double AttributionMap::sum() const {
  return std::accumulate(attributions.begin(), attributions.end(), 0.0);
}

AttributionMap integrated_gradients(const DifferentiableModel& model,
                                    const FeatureVector& input,
                                    const FeatureVector& baseline,
                                    int steps,
                                    std::size_t class_index,
                                    ScoreMode mode,
                                    PathTrace* trace) {
  check_endpoints(model, input, baseline);
  check_steps(steps);
  const std::size_t n = input.values.size();
  const double d_total = l1_distance(baseline.values, input.values);

  AttributionMap map;
  map.attributions.assign(n, 0.0);
  map.shape = input.shape;
  map.method = "ig";
  map.config = {{"method", "ig"},
                {"steps", steps},
                {"class", class_index},
                {"mode", score_mode_name(mode)}};

  if (trace != nullptr) {
    trace->start = baseline.values;
    trace->steps.clear();
  }

  std::vector<double> x_prev = baseline.values;
  const double t_count = static_cast<double>(steps);
  for (int t = 1; t <= steps; ++t) {
    const double alpha_mid = (static_cast<double>(t) - 0.5) / t_count;
    std::vector<double> mid =
        line_point(baseline.values, input.values, alpha_mid);
    GradientRecord rec = gradient(
        model, FeatureVector(std::move(mid), Shape::flat(n)), class_index, mode);

    // Slot endpoints sit exactly on the line; the last one is the input
    // itself, so the displacements telescope to input - baseline with no
    // accumulation drift.
    std::vector<double> x_t =
        (t == steps)
            ? input.values
            : line_point(baseline.values, input.values,
                         static_cast<double>(t) / t_count);

    double step_attr_sum = 0.0;
    std::vector<double> dx(n);
    for (std::size_t i = 0; i < n; ++i) {
      dx[i] = x_t[i] - x_prev[i];
      const double inc = rec.gradient[i] * dx[i];
      map.attributions[i] += inc;
      step_attr_sum += inc;
    }

    if (trace != nullptr) {
      TraceStep step;
      step.t = t;
      step.x = x_t;
      step.g = rec.gradient;
      step.dx = std::move(dx);
      step.snapped = false;
      step.selected_count = n;
      step.l1_remaining = l1_distance(x_t, input.values);
      step.alpha_equivalent = covered_fraction(step.l1_remaining, d_total);
      step.step_attr_sum = step_attr_sum;
      trace->steps.push_back(std::move(step));
    }
    x_prev = std::move(x_t);
  }

  finish_map(map, model, input, baseline, class_index, mode);
  return map;
}

AttributionMap guided_ig(const DifferentiableModel& model,
                         const FeatureVector& input,
                         const FeatureVector& baseline,
                         int steps,
                         double fraction,
                         std::size_t class_index,
                         ScoreMode mode,
                         PathTrace* trace) {
  return guided_ig_anchored(model, input, baseline, steps, fraction, 0,
                            class_index, mode, trace);
}

AttributionMap guided_ig_anchored(const DifferentiableModel& model,
                                  const FeatureVector& input,
                                  const FeatureVector& baseline,
                                  int steps,
                                  double fraction,
                                  int anchors,
                                  std::size_t class_index,
                                  ScoreMode mode,
                                  PathTrace* trace) {
  check_endpoints(model, input, baseline);
  check_steps(steps);
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw InputError("fraction must lie in (0, 1], got " +
                     std::to_string(fraction));
  }
  if (anchors < 0) {
    throw InputError("anchor count must be >= 0, got " +
                     std::to_string(anchors));
  }

  const std::size_t n = input.values.size();
  AttributionMap map;
  map.attributions.assign(n, 0.0);
  map.shape = input.shape;
  map.method = "gig";
  map.config = {{"method", "gig"},
                {"steps", steps},
                {"fraction", fraction},
                {"anchors", anchors},
                {"class", class_index},
                {"mode", score_mode_name(mode)}};

  if (trace != nullptr) {
    trace->start = baseline.values;
    trace->steps.clear();
  }

  const int segments = anchors + 1;
  const int seg_steps = (steps + anchors) / segments;  // ceil(steps/segments)
  std::vector<double> seg_start = baseline.values;
  for (int k = 1; k <= segments; ++k) {
    // Anchor points sit exactly on the straight line; the last segment ends
    // at the input itself.
    std::vector<double> seg_end =
        (k == segments)
            ? input.values
            : line_point(baseline.values, input.values,
                         static_cast<double>(k) / static_cast<double>(segments));
    guided_walk_segment(model, seg_end, seg_start, seg_steps, fraction,
                        class_index, mode, map.attributions, trace,
                        (k - 1) * seg_steps);
    seg_start = std::move(seg_end);
  }

  // Per-segment walks record distances relative to their segment; rewrite
  // them against the global endpoints so alpha_equivalent spans 0..1 over the
  // whole path.
  if (trace != nullptr && anchors > 0) {
    const double d_total = l1_distance(baseline.values, input.values);
    for (TraceStep& step : trace->steps) {
      step.l1_remaining = l1_distance(step.x, input.values);
      step.alpha_equivalent = covered_fraction(step.l1_remaining, d_total);
    }
  }

  finish_map(map, model, input, baseline, class_index, mode);
  return map;
}

AttributionMap vanilla_gradients(const DifferentiableModel& model,
                                 const FeatureVector& input,
                                 std::size_t class_index,
                                 ScoreMode mode) {
  input.validate();
  if (input.values.size() != model.input_size()) {
    throw InputError("input has " + std::to_string(input.values.size()) +
                     " features, model expects " +
                     std::to_string(model.input_size()));
  }
  GradientRecord rec = gradient(model, input, class_index, mode);

  AttributionMap map;
  map.attributions = std::move(rec.gradient);
  map.shape = input.shape;
  map.method = "vanilla";
  map.config = {{"method", "vanilla"},
                {"class", class_index},
                {"mode", score_mode_name(mode)}};
  map.f_input = rec.value;
  require_finite(map.attributions, "attributions");
  return map;
}

AttributionMap edge_detector(const FeatureVector& input) {
  input.validate();
  if (!input.shape.is_image()) {
    throw InputError("edge detector needs an image-shaped input");
  }
  const std::size_t h = input.shape.height();
  const std::size_t w = input.shape.width();
  const std::size_t c = input.shape.channels();

  // Channel-average first, then per-pixel mean absolute difference against
  // the in-bounds 8-neighborhood.
  std::vector<double> gray(h * w, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double sum = 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) {
        sum += input.values[(y * w + x) * c + ch];
      }
      gray[y * w + x] = sum / static_cast<double>(c);
    }
  }

  AttributionMap map;
  map.attributions.assign(h * w, 0.0);
  map.shape = Shape::image(h, w, 1);
  map.method = "edge";
  map.config = {{"method", "edge"}};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dxx = -1; dxx <= 1; ++dxx) {
          if (dy == 0 && dxx == 0) continue;
          const std::ptrdiff_t ny = static_cast<std::ptrdiff_t>(y) + dy;
          const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(x) + dxx;
          if (ny < 0 || nx < 0 || ny >= static_cast<std::ptrdiff_t>(h) ||
              nx >= static_cast<std::ptrdiff_t>(w)) {
            continue;
          }
          sum += std::abs(gray[y * w + x] -
                          gray[static_cast<std::size_t>(ny) * w +
                               static_cast<std::size_t>(nx)]);
          ++count;
        }
      }
      map.attributions[y * w + x] =
          count > 0 ? sum / static_cast<double>(count) : 0.0;
    }
  }
  return map;
}

AttributionMap smoothgrad(const AttributionFn& base,
                          const FeatureVector& input,
                          int n_samples,
                          double sigma,
                          std::uint64_t seed) {
  input.validate();
  if (n_samples < 1) {
    throw InputError("sample count must be >= 1, got " +
                     std::to_string(n_samples));
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InputError("sigma must be finite and >= 0");
  }

  // With sigma == 0 every sample is the unperturbed input, and the mean of n
  // identical maps is that map — evaluate once so the result matches the base
  // method bit for bit instead of accumulating summation rounding.
  const int effective_samples = sigma == 0.0 ? 1 : n_samples;
  std::vector<AttributionMap> maps;
  maps.reserve(static_cast<std::size_t>(effective_samples));
  for (int s = 0; s < effective_samples; ++s) {
    FeatureVector noisy = input;
    if (sigma > 0.0) {
      StreamRng rng(seed, RngPurpose::smoothgrad,
                    static_cast<std::uint64_t>(s));
      const std::vector<double> noise = rng.normal_vector(noisy.values.size());
      for (std::size_t i = 0; i < noisy.values.size(); ++i) {
        noisy.values[i] += sigma * noise[i];
      }
    }
    maps.push_back(base(noisy));
  }

  AttributionMap map = average_attributions(maps);
  map.method = "smoothgrad:" + maps.front().method;
  nlohmann::json config = {{"method", map.method},
                           {"n_samples", n_samples},
                           {"sigma", sigma},
                           {"seed", seed},
                           {"base", maps.front().config}};
  map.config = std::move(config);
  return map;
}

AttributionMap average_attributions(const std::vector<AttributionMap>& maps) {
  if (maps.empty()) {
    throw InputError("cannot average an empty set of attribution maps");
  }
  const std::size_t n = maps.front().attributions.size();
  for (const AttributionMap& m : maps) {
    if (m.attributions.size() != n) {
      throw InputError("attribution maps disagree on feature count");
    }
  }

  AttributionMap out;
  out.attributions.assign(n, 0.0);
  out.shape = maps.front().shape;
  out.method = maps.front().method;
  out.config = maps.front().config;

  const double count = static_cast<double>(maps.size());
  double f_input = 0.0;
  double f_baseline = 0.0;
  for (const AttributionMap& m : maps) {
    for (std::size_t i = 0; i < n; ++i) out.attributions[i] += m.attributions[i];
    f_input += m.f_input;
    f_baseline += m.f_baseline;
  }
  for (std::size_t i = 0; i < n; ++i) out.attributions[i] /= count;
  out.f_input = f_input / count;
  out.f_baseline = f_baseline / count;

  // Residual against the mean of the per-map value differences (not the mean
  // of per-map residuals); NaN endpoints (methods without a baseline)
  // propagate into a NaN residual.
  out.completeness_residual =
      std::abs(out.sum() - (out.f_input - out.f_baseline));
  require_finite(out.attributions, "attributions");
  return out;
}

std::string attribution_csv(const AttributionMap& map) {
  std::string out = "index,attribution\n";
  for (std::size_t i = 0; i < map.attributions.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(map.attributions[i]);
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json attribution_sidecar_json(const AttributionMap& map) {
  nlohmann::ordered_json j;
  j["method"] = map.method;
  j["config"] = map.config;
  j["completeness_residual"] = map.completeness_residual;
  j["F_input"] = map.f_input;
  j["F_baseline"] = map.f_baseline;
  return j;
}

std::vector<double> parse_attribution_csv(const std::string& text,
                                          const std::string& origin) {
  std::vector<double> values;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "index,attribution") {
        throw IoError(origin + ": expected header 'index,attribution', got '" +
                      std::string(line) + "'");
      }
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw IoError(origin + ":" + std::to_string(line_no) +
                    ": expected 'index,value'");
    }
    const std::string cell(line.substr(comma + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw IoError(origin + ":" + std::to_string(line_no) +
                    ": bad attribution value '" + cell + "'");
    }
    if (used != cell.size()) {
      throw IoError(origin + ":" + std::to_string(line_no) +
                    ": trailing characters in '" + cell + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) {
    throw IoError(origin + ": no attribution rows");
  }
  return values;
}

}  // namespace pathattr
