// Acceptance gate: every release-blocking property, one test case per
// criterion, each emitting a single [PASS]/[FAIL] line with the measured
// numbers next to the bound it must meet.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathattr/attribution.hpp"
#include "pathattr/baseline.hpp"
#include "pathattr/evaluation.hpp"
#include "pathattr/fixtures.hpp"
#include "pathattr/model.hpp"
#include "pathattr/model_io.hpp"
#include "pathattr/rng.hpp"
#include "pathattr/serialization.hpp"
#include "pathattr/trace.hpp"

using namespace pathattr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void announce(const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %s — %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

FeatureVector random_box_point(std::uint64_t seed, std::size_t n, double lo,
                               double hi) {
  return FeatureVector::flat(
      StreamRng(seed, RngPurpose::test_points, 0).uniform_vector(n, lo, hi));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

}  // namespace

TEST_CASE("criterion: exactness on linear models") {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    StreamRng rng(1000 + k, RngPurpose::test_points, 0);
    const auto n =
        static_cast<std::size_t>(1.0 + rng.uniform(0.0, 255.999));
    const std::vector<double> w = rng.uniform_vector(n, -2.0, 2.0);
    const LinearModel model(w, rng.uniform(-1.0, 1.0));
    const FeatureVector baseline =
        FeatureVector::flat(rng.uniform_vector(n, -1.0, 1.0));
    const FeatureVector input =
        FeatureVector::flat(rng.uniform_vector(n, -1.0, 1.0));

    const AttributionMap maps[3] = {
        integrated_gradients(model, input, baseline, 200, 0, ScoreMode::logit),
        guided_ig_anchored(model, input, baseline, 200, 0.1, 0, 0,
                           ScoreMode::logit),
        guided_ig_anchored(model, input, baseline, 200, 0.1, 20, 0,
                           ScoreMode::logit)};
    for (const AttributionMap& map : maps) {
      for (std::size_t i = 0; i < n; ++i) {
        const double want = w[i] * (input.values[i] - baseline.values[i]);
        worst = std::max(worst, std::abs(map.attributions[i] - want));
      }
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const bool ok = worst < 1e-9 && seconds < 5.0;
  announce("exactness on linear models", ok,
           "max |a_i - w_i dx_i| = " + fmt(worst) + " (< 1e-9), " +
               fmt(seconds) + " s (< 5), 50 triples x {ig, gig0, gig20}");
  CHECK(ok);
}

TEST_CASE("criterion: completeness holds and tightens with steps") {
  struct Endpoint {
    std::string label;
    ModelPtr model;
    FeatureVector input;
    FeatureVector baseline;
  };
  std::vector<Endpoint> endpoints;
  const ModelPtr mlp = bumpy_mlp(0);
  for (std::uint64_t s : {0ull, 1ull, 3ull}) {
    endpoints.push_back({"mlp/seed" + std::to_string(s), mlp,
                         resolve_baselines(parse_baseline_spec("random:1"),
                                           Shape::flat(64), s)[0],
                         FeatureVector::flat(std::vector<double>(64, 0.0))});
  }
  const ModelPtr bump = builtin_model("bump");
  endpoints.push_back({"bump/low-chord", bump,
                       FeatureVector::flat({1.0, 0.1}),
                       FeatureVector::flat({0.05, 0.0})});
  endpoints.push_back({"bump/high-chord", bump,
                       FeatureVector::flat({1.0, 0.75}),
                       FeatureVector::flat({0.3, 1.0})});

  double worst200 = 0.0;
  double worst_shrink = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const Endpoint& e : endpoints) {
    for (int method = 0; method < 3; ++method) {
      double r[2] = {0.0, 0.0};
      const int steps[2] = {200, 800};
      for (int ti = 0; ti < 2; ++ti) {
        AttributionMap map;
        if (method == 0) {
          map = integrated_gradients(*e.model, e.input, e.baseline, steps[ti],
                                     0, ScoreMode::logit);
        } else {
          map = guided_ig_anchored(*e.model, e.input, e.baseline, steps[ti],
                                   0.1, method == 1 ? 0 : 20, 0,
                                   ScoreMode::logit);
        }
        r[ti] = std::abs(map.completeness_residual);
      }
      CAPTURE(e.label);
      CAPTURE(method);
      worst200 = std::max(worst200, r[0]);
      const double shrink = r[0] / std::max(r[1], 1e-300);
      worst_shrink = std::min(worst_shrink, shrink);
      ok = ok && r[0] < 1e-3 && r[1] * 2.0 <= r[0];
    }
  }
  announce("completeness residuals", ok,
           "worst |residual| @T=200 = " + fmt(worst200) +
               " (< 1e-3), weakest shrink to T=800 = " + fmt(worst_shrink) +
               "x (>= 2x) over {mlp x3, bump x2} x {ig, gig0, gig20}");
  CHECK(ok);
}

TEST_CASE("criterion: symmetric variables share their attribution") {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const std::size_t pairs = 2 + k % 5;  // 4..12 features
    const std::size_t n = 2 * pairs;
    const SymmetricSumModel model(n, SymmetricSumModel::G::softplus);
    StreamRng rng(2000 + k, RngPurpose::test_points, 0);
    std::vector<double> base = rng.uniform_vector(n, -1.0, 1.0);
    std::vector<double> in = rng.uniform_vector(n, -1.0, 1.0);
    for (std::size_t p = 0; p < pairs; ++p) {
      base[2 * p + 1] = base[2 * p];
      in[2 * p + 1] = in[2 * p];
    }
    for (int anchors : {0, 5, 20}) {
      const AttributionMap map = guided_ig_anchored(
          model, FeatureVector::flat(in), FeatureVector::flat(base), 100, 0.1,
          anchors, 0, ScoreMode::logit);
      for (std::size_t p = 0; p < pairs; ++p) {
        worst = std::max(worst, std::abs(map.attributions[2 * p] -
                                         map.attributions[2 * p + 1]));
      }
    }
  }
  const bool ok = worst < 1e-9;
  announce("symmetry preservation", ok,
           "max |a_i - a_j| over equal pairs = " + fmt(worst) +
               " (< 1e-9), 20 fixtures x K in {0, 5, 20}");
  CHECK(ok);
}

TEST_CASE("criterion: guided paths obey the length laws") {
  double worst_l1 = 0.0;
  double worst_l2_margin = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (std::uint64_t run = 0; run < 100; ++run) {
    ModelPtr model;
    std::size_t n = 0;
    if (run < 40) {
      model = builtin_model("bump");
      n = 2;
    } else if (run < 70) {
      model = bumpy_mlp(0);
      n = 64;
    } else {
      model = bump_family_instance(run % 3);
      n = 64;
    }
    StreamRng rng(3000 + run, RngPurpose::test_points, 0);
    const FeatureVector baseline =
        FeatureVector::flat(rng.uniform_vector(n, 0.0, 1.0));
    const FeatureVector input =
        FeatureVector::flat(rng.uniform_vector(n, 0.0, 1.0));
    PathTrace trace;
    guided_ig_anchored(*model, input, baseline, 120, 0.1,
                       run % 10 == 0 ? 20 : 0, 0, ScoreMode::logit, &trace);

    double path_l1 = 0.0;
    double path_l2 = 0.0;
    for (const TraceStep& step : trace.steps) {
      double l1 = 0.0, sq = 0.0;
      for (double d : step.dx) {
        l1 += std::abs(d);
        sq += d * d;
      }
      path_l1 += l1;
      path_l2 += std::sqrt(sq);
    }
    double line_l1 = 0.0, line_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = input.values[i] - baseline.values[i];
      line_l1 += std::abs(d);
      line_sq += d * d;
    }
    const double bound = std::sqrt(static_cast<double>(n)) *
                         std::sqrt(line_sq);
    worst_l1 = std::max(worst_l1, std::abs(path_l1 - line_l1));
    worst_l2_margin = std::min(worst_l2_margin, bound - path_l2);
    ok = ok && std::abs(path_l1 - line_l1) < 1e-9 && path_l2 <= bound + 1e-12;
  }
  announce("path-norm laws", ok,
           "max |L1(path) - L1(line)| = " + fmt(worst_l1) +
               " (< 1e-9), min sqrt(N)*L2 slack = " + fmt(worst_l2_margin) +
               " (>= 0), 100 recorded traces");
  CHECK(ok);
}

TEST_CASE("criterion: guided loops close tighter than straight ones") {
  const auto start = std::chrono::steady_clock::now();
  std::vector<FeatureVector> inputs;
  for (std::uint64_t k = 0; k < 20; ++k) {
    inputs.push_back(FeatureVector::flat(
        StreamRng(0, RngPurpose::test_points, k).uniform_vector(64, 0.0,
                                                                1.0)));
  }
  bool ok = true;
  std::string detail;
  for (std::uint64_t instance = 0; instance < 3; ++instance) {
    const ModelPtr model = bump_family_instance(instance);
    ClosedPathConfig config;
    config.steps = 500;
    config.trials = 50;
    config.seed = 0;
    config.mode = ScoreMode::logit;
    config.method = "ig";
    const ClosedPathReport ig = closed_path_experiment(*model, config, inputs);
    config.method = "gig";
    const ClosedPathReport gig = closed_path_experiment(*model, config, inputs);
    ok = ok && gig.mse < ig.mse;
    detail += (detail.empty() ? "" : ", ") + std::to_string(instance) + ": " +
              fmt(gig.mse) + " < " + fmt(ig.mse);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  ok = ok && seconds < 300.0;
  announce("closed-path superiority of guided paths", ok,
           "gig vs ig mse per instance {" + detail + "}, " + fmt(seconds) +
               " s (< 300), 50 trials x 20 inputs, T=500");
  CHECK(ok);
}

TEST_CASE("criterion: hand-executed walk is reproduced step for step") {
  std::ifstream in(std::string(PATHATTR_TEST_DIR) +
                   "/fixtures/gig_trace_bilinear_t2.json");
  REQUIRE(in.good());
  const json fx = json::parse(in);
  const ModelPtr model =
      parse_model_spec(fx.at("model").dump(), "gig_trace_bilinear_t2.json");
  const FeatureVector input =
      FeatureVector::flat(fx.at("input").get<std::vector<double>>());
  const FeatureVector baseline =
      FeatureVector::flat(fx.at("baseline").get<std::vector<double>>());

  PathTrace trace;
  const AttributionMap map = guided_ig(
      *model, input, baseline, fx.at("steps").get<int>(),
      fx.at("fraction").get<double>(), 0, ScoreMode::logit, &trace);

  bool ok = map.attributions ==
            fx.at("expected_attributions").get<std::vector<double>>();
  const json& want = fx.at("expected_trace");
  ok = ok && trace.start == want.at("start").get<std::vector<double>>();
  const json& steps = want.at("steps");
  ok = ok && trace.steps.size() == steps.size();
  bool saw_clamp = false;
  bool saw_sentinel_zero = false;
  if (ok) {
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
      const TraceStep& got = trace.steps[s];
      const json& exp = steps[s];
      ok = ok && got.t == exp.at("t").get<int>() &&
           got.x == exp.at("x").get<std::vector<double>>() &&
           got.g == exp.at("g").get<std::vector<double>>() &&
           got.dx == exp.at("dx").get<std::vector<double>>() &&
           got.snapped == exp.at("snapped").get<bool>() &&
           got.selected_count == exp.at("selected_count").get<std::size_t>() &&
           got.alpha_equivalent == exp.at("alpha_equivalent").get<double>() &&
           got.l1_remaining == exp.at("x_l1_remaining").get<double>() &&
           got.step_attr_sum == exp.at("step_attr_sum").get<double>();
      const double want_delta = exp.at("delta").get<double>();
      ok = ok && (got.delta == want_delta ||
                  (std::isnan(got.delta) && std::isnan(want_delta)));
      saw_clamp = saw_clamp || (got.snapped && got.delta > 1.0);
      // A feature that already sits on the input must have its stale
      // gradient zeroed before the move (otherwise the infinity sentinel
      // would leak into the products).
      for (std::size_t i = 0; i < got.g.size(); ++i) {
        if (got.x[i] == input.values[i] && got.g[i] == 0.0 && got.dx[i] == 0.0 &&
            max_abs(got.g) > 0.0) {
          saw_sentinel_zero = true;
        }
      }
    }
  }
  ok = ok && saw_clamp && saw_sentinel_zero;
  announce("hand-executed walk conformance", ok,
           std::string("bit-exact over ") + std::to_string(trace.steps.size()) +
               " moves, delta-clamp branch " +
               (saw_clamp ? "exercised" : "MISSING") + ", sentinel zeroing " +
               (saw_sentinel_zero ? "exercised" : "MISSING"));
  CHECK(ok);
}

TEST_CASE("criterion: rank AUC equals exhaustive threshold enumeration") {
  std::size_t exact_matches = 0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    StreamRng rng(4000 + k, RngPurpose::test_points, 0);
    const std::size_t n = 2 + k % 11;  // 2..12
    std::vector<double> scores(n);
    std::vector<int> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Quantized scores so ties genuinely occur.
      scores[i] = std::round(rng.uniform(0.0, 1.0) * 8.0) / 8.0;
      mask[i] = rng.uniform(0.0, 1.0) < 0.5 ? 1 : 0;
    }
    mask[0] = 1;
    mask[n - 1] = 0;

    // Oracle: walk every distinct threshold from high to low, accumulating
    // the trapezoid area in exact integer arithmetic.
    std::vector<double> distinct = scores;
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    long long tp = 0, fp = 0, area2 = 0;
    long long total_pos = 0, total_neg = 0;
    for (std::size_t i = 0; i < n; ++i) (mask[i] ? total_pos : total_neg) += 1;
    for (double threshold : distinct) {
      long long tp_inc = 0, fp_inc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (scores[i] == threshold) (mask[i] ? tp_inc : fp_inc) += 1;
      }
      area2 += fp_inc * (2 * tp + tp_inc);
      tp += tp_inc;
      fp += fp_inc;
    }
    const double oracle =
        static_cast<double>(area2) /
        (2.0 * static_cast<double>(total_pos) *
         static_cast<double>(total_neg));

    const AucResult got = auc_roc(scores, mask);
    if (got.auc == oracle) ++exact_matches;
  }
  const bool ok = exact_matches == 1000;
  announce("AUC oracle equivalence", ok,
           std::to_string(exact_matches) +
               "/1000 instances equal exhaustive enumeration exactly "
               "(N <= 12, quantized scores, 0.5 tie convention)");
  CHECK(ok);
}

TEST_CASE("criterion: analytic gradients match finite differences") {
  struct Entry {
    std::string name;
    ModelPtr model;
    double lo, hi;
  };
  const std::vector<Entry> zoo = {
      {"linear", builtin_model("linear"), -0.5, 1.5},
      {"bilinear", builtin_model("bilinear"), -0.5, 1.5},
      {"symmetric", builtin_model("symmetric"), -0.5, 1.5},
      {"bump", builtin_model("bump"), 0.0, 1.0},
      {"bumpy", bumpy_mlp(0), 0.0, 1.0},
      {"family:0", bump_family_instance(0), 0.0, 1.0},
      {"family:1", bump_family_instance(1), 0.0, 1.0},
      {"family:2", bump_family_instance(2), 0.0, 1.0},
  };
  double worst = 0.0;
  std::string worst_name;
  for (const Entry& e : zoo) {
    const std::size_t n = e.model->input_size();
    for (std::uint64_t k = 0; k < 100; ++k) {
      const FeatureVector x = FeatureVector::flat(
          StreamRng(5000 + k, RngPurpose::test_points, 0)
              .uniform_vector(n, e.lo, e.hi));
      const double err =
          check_gradient(*e.model, x, 0, ScoreMode::logit, 1e-4);
      if (err > worst) {
        worst = err;
        worst_name = e.name;
      }
    }
  }
  const bool ok = worst < 1e-4;
  announce("gradient correctness", ok,
           "max relative error = " + fmt(worst) + " (" + worst_name +
               ") over 8 fixture models x 100 points (< 1e-4)");
  CHECK(ok);
}

TEST_CASE("criterion: CLI runs replay byte for byte") {
  const fs::path root = fs::temp_directory_path() / "pathattr_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);

  const auto run = [&root](const std::string& args) {
    const std::string cmd = std::string("\"") + PATHATTR_CLI + "\" " + args +
                            " >" + (root / "stdout.txt").string() + " 2>" +
                            (root / "stderr.txt").string();
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };

  bool ok = true;
  std::size_t files_compared = 0;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / (pass == 0 ? "r1" : "r2");
    fs::create_directories(dir);
    const std::string fx = (dir / "fx").string();
    ok = ok && run("gen-fixtures --out-dir " + fx + " --seed 3") == 0;
    ok = ok &&
         run("attribute --method gig --model " + fx + "/bumpy.json --input " +
             fx + "/demo.pgm --baseline random:2 --seed 7 --mode logit" +
             " --out " + (dir / "attr.csv").string() + " --json " +
             (dir / "attr.json").string() + " --heatmap " +
             (dir / "heat.pgm").string()) == 0;
    ok = ok &&
         run("attribute --method ig --model " + fx + "/bumpy.json --input " +
             fx + "/demo.pgm --baseline black --mode logit --trace " +
             (dir / "trace.jsonl").string() + " --out " +
             (dir / "ig.csv").string()) == 0;
    ok = ok && run("eval-closed-path --model " + fx +
                   "/bump.json --method gig --mode logit --seed 1 --trials 10" +
                   " --inputs 5 --steps 100 --out " +
                   (dir / "loops.json").string()) == 0;
    ok = ok && run("eval-auc --attribution " + (dir / "attr.csv").string() +
                   " --mask " + fx + "/demo_mask.pgm --out " +
                   (dir / "auc.json").string()) == 0;
    ok = ok && run("diagnostics --trace " + (dir / "trace.jsonl").string() +
                   " --out " + (dir / "diag.json").string() +
                   " --profile-out " + (dir / "profile.csv").string() +
                   " --model " + fx + "/bumpy.json --input " + fx +
                   "/demo.pgm --baseline black --mode logit -T 32") == 0;
    ok = ok && run("check-gradients --model linear --model bump --points 20" +
                   std::string(" --mode logit --out ") +
                   (dir / "grad.json").string()) == 0;
  }
  if (ok) {
    for (auto it = fs::recursive_directory_iterator(root / "r1");
         it != fs::recursive_directory_iterator(); ++it) {
      if (!it->is_regular_file()) continue;
      const fs::path rel = fs::relative(it->path(), root / "r1");
      const std::string a = read_file(it->path().string());
      const std::string b = read_file((root / "r2" / rel).string());
      if (a != b) {
        ok = false;
        MESSAGE("outputs differ: ", rel.string());
      }
      ++files_compared;
    }
  }
  ok = ok && files_compared >= 14;
  announce("CLI determinism", ok,
           "all 6 subcommands rerun byte-identically (" +
               std::to_string(files_compared) + " files compared)");
  CHECK(ok);
}
