#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pathattr/errors.hpp"
#include "pathattr/trace.hpp"

using namespace pathattr;

namespace {

PathTrace sample_trace() {
  PathTrace trace;
  trace.start = {0.0, 0.0};
  TraceStep s1;
  s1.t = 1;
  s1.x = {0.5, 1.0};
  s1.g = {0.0, 0.0};
  s1.dx = {0.5, 1.0};
  s1.delta = 0.5;
  s1.selected_count = 2;
  s1.alpha_equivalent = 0.5;
  s1.l1_remaining = 1.5;
  s1.step_attr_sum = 0.0;
  TraceStep s2;
  s2.t = 2;
  s2.x = {0.5, 2.0};
  s2.g = {1.0, 0.5};
  s2.dx = {0.0, 1.0};
  s2.delta = 1.5;
  s2.snapped = true;
  s2.selected_count = 1;
  s2.alpha_equivalent = 1.0 - 0.5 / 3.0;
  s2.l1_remaining = 0.5;
  s2.step_attr_sum = 0.5;
  trace.steps = {s1, s2};
  return trace;
}

}  // namespace

TEST_CASE("trace serialization round-trips every field") {
  const PathTrace trace = sample_trace();
  const std::string text = trace_jsonl(trace);
  const PathTrace back = parse_trace_jsonl(text);

  CHECK(back.start == trace.start);
  REQUIRE(back.steps.size() == trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& a = trace.steps[i];
    const TraceStep& b = back.steps[i];
    CHECK(a.t == b.t);
    CHECK(a.x == b.x);
    CHECK(a.g == b.g);
    CHECK(a.dx == b.dx);
    CHECK(a.delta == b.delta);
    CHECK(a.snapped == b.snapped);
    CHECK(a.selected_count == b.selected_count);
    CHECK(a.alpha_equivalent == b.alpha_equivalent);
    CHECK(a.l1_remaining == b.l1_remaining);
    CHECK(a.step_attr_sum == b.step_attr_sum);
  }
  // Re-encoding is byte-identical (determinism building block).
  CHECK(trace_jsonl(back) == text);
}

TEST_CASE("every line carries the five pinned fields") {
  const std::string text = trace_jsonl(sample_trace());
  std::size_t lines = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string line = text.substr(pos, eol - pos);
    for (const char* key : {"\"t\":", "\"alpha_equivalent\":",
                            "\"x_l1_remaining\":", "\"selected_count\":",
                            "\"step_attr_sum\":"}) {
      CHECK(line.find(key) != std::string::npos);
    }
    ++lines;
    pos = eol + 1;
  }
  CHECK(lines == 2);
}

TEST_CASE("a NaN delta serializes as null and parses back as NaN") {
  PathTrace trace = sample_trace();
  trace.steps[0].delta = std::numeric_limits<double>::quiet_NaN();
  const std::string text = trace_jsonl(trace);
  CHECK(text.find("\"delta\":null") != std::string::npos);
  const PathTrace back = parse_trace_jsonl(text);
  CHECK(std::isnan(back.steps[0].delta));
  CHECK(back.steps[1].delta == 1.5);
}

TEST_CASE("file round-trip and parse errors") {
  const auto dir =
      std::filesystem::temp_directory_path() / "pathattr_trace_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "trace.jsonl").string();
  const PathTrace trace = sample_trace();
  write_trace(trace, path);
  const PathTrace back = read_trace(path);
  CHECK(back.steps.size() == 2);
  CHECK(back.start == trace.start);

  CHECK_THROWS_AS(parse_trace_jsonl("{broken\n"), IoError);
  CHECK_THROWS_AS(parse_trace_jsonl("{\"t\": \"x\"}\n"), IoError);
  CHECK_THROWS_AS(read_trace("/nonexistent/trace.jsonl"), IoError);
}
