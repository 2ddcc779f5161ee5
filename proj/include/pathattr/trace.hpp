#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace pathattr {

// One move along an attribution path. Guided IG emits one step per inner
// iteration (an outer Riemann step t may span several moves); IG emits
// exactly one step per Riemann slot. The recorded gradient is the one the
// attribution update actually used — for Guided IG that means finished
// features carry 0 in g, mirroring the sentinel zeroing in the update rule —
// so increment_i == g_i * dx_i holds for every record.
struct TraceStep {
  int t = 0;                       // 1-based outer step index
  std::vector<double> x;           // point after the move
  std::vector<double> g;           // gradient applied by the move
  std::vector<double> dx;          // x_after - x_before
  double delta = std::numeric_limits<double>::quiet_NaN();  // GIG convex factor
  bool snapped = false;            // took the delta > 1 branch
  std::size_t selected_count = 0;  // |S| for the move (IG: all features)
  double alpha_equivalent = 0.0;   // covered L1 fraction after the move
  double l1_remaining = 0.0;       // ||x - X^I||_1 after the move
  double step_attr_sum = 0.0;      // sum_i g_i * dx_i
};

struct PathTrace {
  std::vector<double> start;       // segment start (the baseline end)
  std::vector<TraceStep> steps;

  bool empty() const { return steps.empty(); }
  const std::vector<double>& end() const { return steps.back().x; }
};

// JSON-lines encoding, one record per step:
//   {"t":..., "alpha_equivalent":..., "x_l1_remaining":...,
//    "selected_count":..., "step_attr_sum":..., "delta":..., "snapped":...,
//    "x":[...], "g":[...], "dx":[...]}
// The first record additionally carries "start" so the segment start is
// preserved exactly. delta is null on non-GIG traces.
std::string trace_jsonl(const PathTrace& trace);
PathTrace parse_trace_jsonl(const std::string& text);

void write_trace(const PathTrace& trace, const std::string& path);
PathTrace read_trace(const std::string& path);

}  // namespace pathattr
