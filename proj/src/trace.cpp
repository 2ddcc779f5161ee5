#include "pathattr/trace.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pathattr/errors.hpp"
#include "pathattr/serialization.hpp"

namespace pathattr {

using nlohmann::json;
using nlohmann::ordered_json;

std::string trace_jsonl(const PathTrace& trace) {
  std::ostringstream os;
  bool first = true;
  for (const TraceStep& s : trace.steps) {
    ordered_json j;
    j["t"] = s.t;
    j["alpha_equivalent"] = s.alpha_equivalent;
    j["x_l1_remaining"] = s.l1_remaining;
    j["selected_count"] = s.selected_count;
    j["step_attr_sum"] = s.step_attr_sum;
    if (std::isnan(s.delta)) {
      j["delta"] = nullptr;
    } else {
      j["delta"] = s.delta;
    }
    j["snapped"] = s.snapped;
    j["x"] = s.x;
    j["g"] = s.g;
    j["dx"] = s.dx;
    if (first) {
      j["start"] = trace.start;
      first = false;
    }
    os << j.dump() << "\n";
  }
  return os.str();
}

PathTrace parse_trace_jsonl(const std::string& text) {
  PathTrace trace;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError("trace line " + std::to_string(lineno) +
                    " is not valid JSON (" + e.what() + ")");
    }
    try {
      TraceStep s;
      s.t = j.at("t").get<int>();
      s.alpha_equivalent = j.at("alpha_equivalent").get<double>();
      s.l1_remaining = j.at("x_l1_remaining").get<double>();
      s.selected_count = j.at("selected_count").get<std::size_t>();
      s.step_attr_sum = j.at("step_attr_sum").get<double>();
      if (j.contains("delta") && !j["delta"].is_null()) {
        s.delta = j["delta"].get<double>();
      }
      if (j.contains("snapped")) s.snapped = j["snapped"].get<bool>();
      if (j.contains("x")) s.x = j["x"].get<std::vector<double>>();
      if (j.contains("g")) s.g = j["g"].get<std::vector<double>>();
      if (j.contains("dx")) s.dx = j["dx"].get<std::vector<double>>();
      if (j.contains("start")) {
        trace.start = j["start"].get<std::vector<double>>();
      }
      trace.steps.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw IoError("trace line " + std::to_string(lineno) +
                    " has a bad field (" + e.what() + ")");
    }
  }
  return trace;
}

void write_trace(const PathTrace& trace, const std::string& path) {
  write_file_atomic(path, trace_jsonl(trace));
}

PathTrace read_trace(const std::string& path) {
  return parse_trace_jsonl(read_file(path));
}

}  // namespace pathattr
