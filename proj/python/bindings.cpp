// Python bindings for the attribution core. Plain lists in, lightweight
// record types out; heavyweight loops release the GIL.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
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
#include "pathattr/trace.hpp"

namespace py = pybind11;
using namespace pathattr;

namespace {

// ModelPtr aliases shared_ptr<const DifferentiableModel>; pybind11 holders
// want mutable element types, so the handle wraps the pointer instead.
struct ModelHandle {
  ModelPtr ptr;

  const DifferentiableModel& ref() const {
    if (!ptr) throw InputError("model handle is empty");
    return *ptr;
  }
};

py::tuple shape_tuple(const Shape& shape) {
  py::tuple t(shape.dims.size());
  for (std::size_t i = 0; i < shape.dims.size(); ++i) t[i] = shape.dims[i];
  return t;
}

Shape shape_from_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() == 1) return Shape::flat(dims[0]);
  if (dims.size() == 3) return Shape::image(dims[0], dims[1], dims[2]);
  throw InputError("shape must have 1 or 3 dims, got " +
                   std::to_string(dims.size()));
}

// Attaches the model's declared shape when the length matches so that
// image-aware consumers (heatmaps, edge detector) see (h, w, c).
FeatureVector model_input(const ModelHandle& model,
                          std::vector<double> values) {
  const Shape shape = model.ref().input_shape();
  if (shape.size() == values.size()) {
    return FeatureVector(std::move(values), shape);
  }
  return FeatureVector::flat(std::move(values));
}

ScoreMode mode_from(const std::string& name) { return parse_score_mode(name); }

py::object attr_or_pair(AttributionMap map, std::unique_ptr<PathTrace> trace,
                        bool return_trace) {
  if (!return_trace) return py::cast(std::move(map));
  return py::make_tuple(py::cast(std::move(map)), py::cast(std::move(*trace)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Path-method feature attributions (integrated and guided gradients) "
      "over differentiable models, with evaluation protocols.";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_IOError, e.what());
    } catch (const NumericError& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  py::class_<ModelHandle>(m, "Model")
      .def_property_readonly(
          "input_size",
          [](const ModelHandle& h) { return h.ref().input_size(); })
      .def_property_readonly(
          "output_arity",
          [](const ModelHandle& h) { return h.ref().output_arity(); })
      .def_property_readonly(
          "input_shape",
          [](const ModelHandle& h) { return shape_tuple(h.ref().input_shape()); })
      .def("logits",
           [](const ModelHandle& h, const std::vector<double>& x) {
             return h.ref().logits(x);
           },
           py::arg("x"))
      .def("evaluate",
           [](const ModelHandle& h, std::vector<double> x,
              std::size_t class_index, const std::string& mode) {
             return evaluate(h.ref(), model_input(h, std::move(x)),
                             class_index, mode_from(mode));
           },
           py::arg("x"), py::arg("class_index") = 0,
           py::arg("mode") = "softmax")
      .def("gradient",
           [](const ModelHandle& h, std::vector<double> x,
              std::size_t class_index, const std::string& mode) {
             return gradient(h.ref(), model_input(h, std::move(x)),
                             class_index, mode_from(mode))
                 .gradient;
           },
           py::arg("x"), py::arg("class_index") = 0,
           py::arg("mode") = "softmax")
      .def("check_gradient",
           [](const ModelHandle& h, std::vector<double> x,
              std::size_t class_index, const std::string& mode, double step) {
             return check_gradient(h.ref(), model_input(h, std::move(x)),
                                   class_index, mode_from(mode), step);
           },
           py::arg("x"), py::arg("class_index") = 0,
           py::arg("mode") = "softmax", py::arg("step") = 1e-4)
      .def("save",
           [](const ModelHandle& h, const std::string& path) {
             save_model(h.ref(), path);
           },
           py::arg("path"))
      .def("__repr__",
           [](const ModelHandle& h) { return "<Model " + h.ref().describe() + ">"; });

  m.def("load_model",
        [](const std::string& path) { return ModelHandle{load_model(path)}; },
        py::arg("path"), "Load a model spec (JSON) from disk.");
  m.def("builtin_model",
        [](const std::string& name) { return ModelHandle{builtin_model(name)}; },
        py::arg("name"), "One of: linear, bilinear, symmetric, bump.");
  m.def("bumpy_mlp",
        [](std::uint64_t seed) { return ModelHandle{bumpy_mlp(seed)}; },
        py::arg("seed") = 0, "Seeded 64-input softplus MLP fixture.");
  m.def("bump_family",
        [](std::uint64_t instance) {
          return ModelHandle{bump_family_instance(instance)};
        },
        py::arg("instance"),
        "Seeded 64-d bump-mixture fixture family instance.");

  py::class_<AttributionMap>(m, "Attribution")
      .def_property_readonly(
          "attributions",
          [](const AttributionMap& a) { return a.attributions; })
      .def_property_readonly(
          "shape", [](const AttributionMap& a) { return shape_tuple(a.shape); })
      .def_readonly("method", &AttributionMap::method)
      .def_readonly("completeness_residual",
                    &AttributionMap::completeness_residual)
      .def_readonly("f_input", &AttributionMap::f_input)
      .def_readonly("f_baseline", &AttributionMap::f_baseline)
      .def("sum", &AttributionMap::sum)
      .def_property_readonly(
          "config_json", [](const AttributionMap& a) { return a.config.dump(); })
      .def("__len__",
           [](const AttributionMap& a) { return a.attributions.size(); })
      .def("__repr__", [](const AttributionMap& a) {
        return "<Attribution " + a.method + ", " +
               std::to_string(a.attributions.size()) + " features>";
      });

  py::class_<PathTrace>(m, "PathTrace")
      .def("__len__", [](const PathTrace& t) { return t.steps.size(); })
      .def_property_readonly(
          "start", [](const PathTrace& t) { return t.start; })
      .def_property_readonly(
          "alphas",
          [](const PathTrace& t) {
            std::vector<double> a;
            a.reserve(t.steps.size());
            for (const TraceStep& s : t.steps) a.push_back(s.alpha_equivalent);
            return a;
          })
      .def("jsonl", [](const PathTrace& t) { return trace_jsonl(t); });

  m.def(
      "integrated_gradients",
      [](const ModelHandle& model, std::vector<double> input,
         std::vector<double> baseline, int steps, std::size_t class_index,
         const std::string& mode, bool return_trace) {
        auto trace = std::make_unique<PathTrace>();
        const FeatureVector in = model_input(model, std::move(input));
        const FeatureVector base = model_input(model, std::move(baseline));
        AttributionMap map;
        {
          py::gil_scoped_release release;
          map = integrated_gradients(model.ref(), in, base, steps, class_index,
                                     mode_from(mode),
                                     return_trace ? trace.get() : nullptr);
        }
        return attr_or_pair(std::move(map), std::move(trace), return_trace);
      },
      py::arg("model"), py::arg("input"), py::arg("baseline"),
      py::arg("steps") = 200, py::arg("class_index") = 0,
      py::arg("mode") = "softmax", py::arg("return_trace") = false,
      "Straight-line path integral with midpoint-rule gradients.");

  m.def(
      "guided_ig",
      [](const ModelHandle& model, std::vector<double> input,
         std::vector<double> baseline, int steps, double fraction, int anchors,
         std::size_t class_index, const std::string& mode, bool return_trace) {
        auto trace = std::make_unique<PathTrace>();
        const FeatureVector in = model_input(model, std::move(input));
        const FeatureVector base = model_input(model, std::move(baseline));
        AttributionMap map;
        {
          py::gil_scoped_release release;
          map = guided_ig_anchored(model.ref(), in, base, steps, fraction,
                                   anchors, class_index, mode_from(mode),
                                   return_trace ? trace.get() : nullptr);
        }
        return attr_or_pair(std::move(map), std::move(trace), return_trace);
      },
      py::arg("model"), py::arg("input"), py::arg("baseline"),
      py::arg("steps") = 200, py::arg("fraction") = 0.1,
      py::arg("anchors") = 0, py::arg("class_index") = 0,
      py::arg("mode") = "softmax", py::arg("return_trace") = false,
      "Adaptive guided path attribution; anchors > 0 pins the path to the "
      "straight line at evenly spaced points.");

  m.def(
      "vanilla_gradients",
      [](const ModelHandle& model, std::vector<double> input,
         std::size_t class_index, const std::string& mode) {
        return vanilla_gradients(model.ref(),
                                 model_input(model, std::move(input)),
                                 class_index, mode_from(mode));
      },
      py::arg("model"), py::arg("input"), py::arg("class_index") = 0,
      py::arg("mode") = "softmax", "Raw gradient at the input.");

  m.def(
      "edge_detector",
      [](std::vector<double> input, const std::vector<std::size_t>& shape) {
        return edge_detector(
            FeatureVector(std::move(input), shape_from_dims(shape)));
      },
      py::arg("input"), py::arg("shape"),
      "Model-free neighborhood-contrast saliency for (h, w, c) inputs.");

  m.def(
      "smoothgrad",
      [](const ModelHandle& model, std::vector<double> input,
         std::vector<double> baseline, int n_samples, double sigma,
         std::uint64_t seed, const std::string& method, int steps,
         double fraction, int anchors, std::size_t class_index,
         const std::string& mode) {
        const FeatureVector in = model_input(model, std::move(input));
        const FeatureVector base = model_input(model, std::move(baseline));
        const ScoreMode score_mode = mode_from(mode);
        const ModelPtr ptr = model.ptr;
        AttributionFn base_fn;
        if (method == "ig") {
          base_fn = [=](const FeatureVector& x) {
            return integrated_gradients(*ptr, x, base, steps, class_index,
                                        score_mode);
          };
        } else if (method == "gig") {
          base_fn = [=](const FeatureVector& x) {
            return guided_ig_anchored(*ptr, x, base, steps, fraction, anchors,
                                      class_index, score_mode);
          };
        } else {
          throw InputError("smoothgrad method must be ig or gig, got '" +
                           method + "'");
        }
        py::gil_scoped_release release;
        return smoothgrad(base_fn, in, n_samples, sigma, seed);
      },
      py::arg("model"), py::arg("input"), py::arg("baseline"),
      py::arg("n_samples"), py::arg("sigma"), py::arg("seed") = 0,
      py::arg("method") = "ig", py::arg("steps") = 200,
      py::arg("fraction") = 0.1, py::arg("anchors") = 0,
      py::arg("class_index") = 0, py::arg("mode") = "softmax",
      "Mean attribution over seeded Gaussian perturbations of the input.");

  m.def(
      "resolve_baselines",
      [](const std::string& spec, std::size_t size, std::uint64_t seed) {
        std::vector<std::vector<double>> out;
        for (FeatureVector& b :
             resolve_baselines(parse_baseline_spec(spec), Shape::flat(size),
                               seed)) {
          out.push_back(std::move(b.values));
        }
        return out;
      },
      py::arg("spec"), py::arg("size"), py::arg("seed") = 0,
      "Expand a baseline spec (black | white | black+white | random:N).");

  py::class_<ClosedPathReport>(m, "ClosedPathReport")
      .def_readonly("method", &ClosedPathReport::method)
      .def_readonly("trials", &ClosedPathReport::trials)
      .def_readonly("seed", &ClosedPathReport::seed)
      .def_readonly("mse", &ClosedPathReport::mse)
      .def_readonly("per_trial_mse", &ClosedPathReport::per_trial_mse)
      .def("__repr__", [](const ClosedPathReport& r) {
        return "<ClosedPathReport " + r.method + " mse=" +
               std::to_string(r.mse) + ">";
      });

  m.def(
      "closed_path_experiment",
      [](const ModelHandle& model, const std::vector<std::vector<double>>& inputs,
         const std::string& method, int steps, double fraction, int anchors,
         std::size_t class_index, const std::string& mode, std::size_t trials,
         std::uint64_t seed, double lo, double hi, std::size_t points) {
        ClosedPathConfig config;
        config.method = method;
        config.steps = steps;
        config.fraction = fraction;
        config.anchors = anchors;
        config.class_index = class_index;
        config.mode = mode_from(mode);
        config.trials = trials;
        config.seed = seed;
        config.lo = lo;
        config.hi = hi;
        config.random_points_per_trial = points;
        std::vector<FeatureVector> fvs;
        fvs.reserve(inputs.size());
        for (const std::vector<double>& x : inputs) {
          fvs.push_back(model_input(model, x));
        }
        py::gil_scoped_release release;
        return closed_path_experiment(model.ref(), config, fvs);
      },
      py::arg("model"), py::arg("inputs"), py::arg("method") = "gig",
      py::arg("steps") = 200, py::arg("fraction") = 0.1,
      py::arg("anchors") = 0, py::arg("class_index") = 0,
      py::arg("mode") = "softmax", py::arg("trials") = 50,
      py::arg("seed") = 0, py::arg("lo") = 0.0, py::arg("hi") = 1.0,
      py::arg("points") = 2,
      "Random closed loops through each input; attributions must cancel.");

  py::class_<AucResult>(m, "AucResult")
      .def_readonly("auc", &AucResult::auc)
      .def_readonly("n_pos", &AucResult::n_pos)
      .def_readonly("n_neg", &AucResult::n_neg)
      .def_readonly("thresholds", &AucResult::thresholds)
      .def_readonly("tpr", &AucResult::tpr)
      .def_readonly("fpr", &AucResult::fpr);

  m.def(
      "auc_roc",
      [](const std::vector<double>& scores, const std::vector<int>& mask) {
        return auc_roc(scores, mask);
      },
      py::arg("scores"), py::arg("mask"),
      "Rank-statistic ROC AUC with the 0.5 tie convention.");

  py::class_<PathDiagnostics>(m, "PathDiagnostics")
      .def_readonly("noise_loss", &PathDiagnostics::noise_loss)
      .def_readonly("distance_loss", &PathDiagnostics::distance_loss)
      .def_readonly("cosine_profile", &PathDiagnostics::cosine_profile)
      .def_readonly("delta_curve", &PathDiagnostics::delta_curve)
      .def_readonly("grad_norm_curve", &PathDiagnostics::grad_norm_curve);

  m.def("path_diagnostics",
        [](const PathTrace& trace) { return path_diagnostics(trace); },
        py::arg("trace"),
        "Noise/distance losses and gradient-direction profile of a trace.");

  py::class_<DirectionalProfile>(m, "DirectionalProfile")
      .def_readonly("delta", &DirectionalProfile::delta)
      .def_readonly("grad_norm", &DirectionalProfile::grad_norm);

  m.def(
      "directional_profile",
      [](const ModelHandle& model, std::vector<double> input,
         std::vector<double> baseline, int steps, std::size_t class_index,
         const std::string& mode) {
        return directional_profile(
            model.ref(), model_input(model, std::move(input)),
            model_input(model, std::move(baseline)), steps, class_index,
            mode_from(mode));
      },
      py::arg("model"), py::arg("input"), py::arg("baseline"),
      py::arg("steps") = 200, py::arg("class_index") = 0,
      py::arg("mode") = "softmax",
      "Signed directional derivative and gradient norm along the line.");

  m.def(
      "read_image_features",
      [](const std::string& path) {
        const FeatureVector fv = to_features(read_image(path));
        py::tuple shape = shape_tuple(fv.shape);
        return py::make_tuple(fv.values, shape);
      },
      py::arg("path"),
      "Load a PGM/PPM image as ([0,1] features, (h, w, c)).");

  m.def(
      "read_mask",
      [](const std::string& path) {
        const MaskBuffer mask = read_mask(path);
        return std::vector<int>(mask.labels.begin(), mask.labels.end());
      },
      py::arg("path"), "Load a PGM mask as 0/1 labels (threshold 128).");
}
