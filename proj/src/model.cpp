#include "pathattr/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pathattr/errors.hpp"

namespace pathattr {
namespace {

void check_point(const DifferentiableModel& model, const FeatureVector& x,
                 std::size_t target_class) {
  x.validate();
  if (x.size() != model.input_size()) {
    std::ostringstream os;
    os << "input length " << x.size() << " does not match model input size "
       << model.input_size();
    throw InputError(os.str());
  }
  if (target_class >= model.output_arity()) {
    std::ostringstream os;
    os << "class index " << target_class << " out of range for "
       << model.output_arity() << " outputs";
    throw InputError(os.str());
  }
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double denom = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    denom += p[k];
  }
  for (auto& v : p) v /= denom;
  return p;
}

// Stable softplus and its derivative.
double softplus(double u) {
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}
double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

ScoreMode parse_score_mode(const std::string& name) {
  if (name == "logit") return ScoreMode::logit;
  if (name == "softmax") return ScoreMode::softmax;
  throw InputError("unknown score mode '" + name + "' (want logit|softmax)");
}

std::string score_mode_name(ScoreMode mode) {
  return mode == ScoreMode::logit ? "logit" : "softmax";
}

double evaluate(const DifferentiableModel& model, const FeatureVector& x,
                std::size_t target_class, ScoreMode mode) {
  check_point(model, x, target_class);
  const std::vector<double> l = model.logits(x.values);
  require_finite(l, "model output");
  if (mode == ScoreMode::logit) return l[target_class];
  return softmax(l)[target_class];
}

GradientRecord gradient(const DifferentiableModel& model,
                        const FeatureVector& x, std::size_t target_class,
                        ScoreMode mode) {
  check_point(model, x, target_class);
  const std::vector<double> l = model.logits(x.values);
  require_finite(l, "model output");

  GradientRecord rec;
  std::vector<double> cot(l.size(), 0.0);
  if (mode == ScoreMode::logit) {
    rec.value = l[target_class];
    cot[target_class] = 1.0;
  } else {
    const std::vector<double> p = softmax(l);
    rec.value = p[target_class];
    // d softmax_c / d logit_k = p_c (delta_ck - p_k)
    for (std::size_t k = 0; k < l.size(); ++k) {
      cot[k] = p[target_class] * ((k == target_class ? 1.0 : 0.0) - p[k]);
    }
  }
  rec.gradient = model.vjp(x.values, cot);
  if (rec.gradient.size() != model.input_size()) {
    throw NumericError("model vjp returned wrong length");
  }
  for (double g : rec.gradient) {
    if (!std::isfinite(g)) throw NumericError("non-finite gradient entry");
  }
  return rec;
}

double check_gradient(const DifferentiableModel& model, const FeatureVector& x,
                      std::size_t target_class, ScoreMode mode, double h) {
  if (!(h > 0)) throw InputError("finite-difference step h must be positive");
  const GradientRecord rec = gradient(model, x, target_class, mode);
  FeatureVector probe = x;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x.values[i];
    probe.values[i] = xi + h;
    const double fp = evaluate(model, probe, target_class, mode);
    probe.values[i] = xi - h;
    const double fm = evaluate(model, probe, target_class, mode);
    probe.values[i] = xi;
    const double numeric = (fp - fm) / (2.0 * h);
    const double err =
        std::abs(rec.gradient[i] - numeric) / (std::abs(numeric) + 1e-8);
    worst = std::max(worst, err);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// LinearModel
// ---------------------------------------------------------------------------

LinearModel::LinearModel(std::vector<double> weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {
  if (weights_.empty()) throw InputError("linear model needs weights");
  require_finite(weights_, "linear weights");
  if (!std::isfinite(bias_)) throw InputError("linear bias must be finite");
}

std::vector<double> LinearModel::logits(std::span<const double> x) const {
  double acc = bias_;
  for (std::size_t i = 0; i < weights_.size(); ++i) acc += weights_[i] * x[i];
  return {acc};
}

std::vector<double> LinearModel::vjp(std::span<const double>,
                                     std::span<const double> cot) const {
  std::vector<double> g(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) g[i] = cot[0] * weights_[i];
  return g;
}

// ---------------------------------------------------------------------------
// BilinearProductModel
// ---------------------------------------------------------------------------

BilinearProductModel::BilinearProductModel(
    std::size_t input_size,
    std::vector<std::pair<std::size_t, std::size_t>> pairs)
    : n_(input_size), pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw InputError("bilinear model needs at least one pair");
  for (const auto& [i, j] : pairs_) {
    if (i >= n_ || j >= n_ || i == j) {
      throw InputError("bilinear pair indices out of range");
    }
  }
}

std::vector<double> BilinearProductModel::logits(
    std::span<const double> x) const {
  double f = 1.0;
  for (const auto& [i, j] : pairs_) f *= x[i] * x[j];
  return {f};
}

std::vector<double> BilinearProductModel::vjp(
    std::span<const double> x, std::span<const double> cot) const {
  std::vector<double> g(n_, 0.0);
  // dF/dx_k = sum over pairs p containing k of d(x_i x_j)/dx_k * prod of the
  // other pair terms.
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    double rest = 1.0;
    for (std::size_t q = 0; q < pairs_.size(); ++q) {
      if (q == p) continue;
      rest *= x[pairs_[q].first] * x[pairs_[q].second];
    }
    const auto [i, j] = pairs_[p];
    g[i] += cot[0] * x[j] * rest;
    g[j] += cot[0] * x[i] * rest;
  }
  return g;
}

// ---------------------------------------------------------------------------
// SymmetricSumModel
// ---------------------------------------------------------------------------

SymmetricSumModel::SymmetricSumModel(std::size_t input_size, G g)
    : n_(input_size), g_(g) {
  if (n_ == 0) throw InputError("symmetric sum model needs features");
}

std::vector<double> SymmetricSumModel::logits(std::span<const double> x) const {
  double f = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    f += g_ == G::square ? x[i] * x[i] : softplus(x[i]);
  }
  return {f};
}

std::vector<double> SymmetricSumModel::vjp(std::span<const double> x,
                                           std::span<const double> cot) const {
  std::vector<double> g(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const double d = g_ == G::square ? 2.0 * x[i] : sigmoid(x[i]);
    g[i] = cot[0] * d;
  }
  return g;
}

// ---------------------------------------------------------------------------
// BumpMixtureModel
// ---------------------------------------------------------------------------

BumpMixtureModel::BumpMixtureModel(std::size_t input_size,
                                   std::vector<std::vector<double>> centers,
                                   std::vector<double> amplitudes,
                                   std::vector<double> widths, Shape shape)
    : n_(input_size),
      centers_(std::move(centers)),
      amplitudes_(std::move(amplitudes)),
      widths_(std::move(widths)),
      shape_(std::move(shape)) {
  if (shape_.dims.empty()) shape_ = Shape::flat(n_);
  if (shape_.size() != n_) {
    throw InputError("bump mixture shape does not match input size");
  }
  if (centers_.size() != amplitudes_.size() ||
      centers_.size() != widths_.size()) {
    throw InputError("bump mixture arrays must have equal length");
  }
  for (const auto& c : centers_) {
    if (c.size() != n_) throw InputError("bump center has wrong length");
    require_finite(c, "bump center");
  }
  for (double w : widths_) {
    if (!(w > 0)) throw InputError("bump widths must be positive");
  }
  require_finite(amplitudes_, "bump amplitudes");
}

std::vector<double> BumpMixtureModel::logits(std::span<const double> x) const {
  double f = 0.0;
  for (std::size_t m = 0; m < centers_.size(); ++m) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = x[i] - centers_[m][i];
      d2 += d * d;
    }
    f += amplitudes_[m] * std::exp(-d2 / (2.0 * widths_[m] * widths_[m]));
  }
  return {f};
}

std::vector<double> BumpMixtureModel::vjp(std::span<const double> x,
                                          std::span<const double> cot) const {
  std::vector<double> g(n_, 0.0);
  for (std::size_t m = 0; m < centers_.size(); ++m) {
    const double s2 = widths_[m] * widths_[m];
    double d2 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = x[i] - centers_[m][i];
      d2 += d * d;
    }
    const double e = amplitudes_[m] * std::exp(-d2 / (2.0 * s2));
    for (std::size_t i = 0; i < n_; ++i) {
      g[i] += cot[0] * e * (centers_[m][i] - x[i]) / s2;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// MlpModel
// ---------------------------------------------------------------------------

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "softplus") return Activation::softplus;
  throw UnknownActivationError("unknown activation '" + name +
                               "' (want identity|relu|softplus)");
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::softplus: return "softplus";
  }
  return "identity";
}

namespace {

double apply_activation(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    // ReLU derivative at exactly 0 is taken as 0; Guided IG's selection
    // consumes |gradient|, so the kink convention must be fixed.
    case Activation::relu: return z > 0 ? z : 0.0;
    case Activation::softplus: return softplus(z);
  }
  return z;
}

double activation_derivative(Activation a, double z) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return z > 0 ? 1.0 : 0.0;
    case Activation::softplus: return sigmoid(z);
  }
  return 1.0;
}

}  // namespace

MlpModel::MlpModel(std::vector<MlpLayer> layers, Shape input_shape,
                   std::size_t outputs)
    : layers_(std::move(layers)), input_shape_(std::move(input_shape)),
      outputs_(outputs) {
  if (layers_.empty()) throw DimensionMismatchError("model needs layers");
  std::size_t prev = input_shape_.size();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const MlpLayer& layer = layers_[l];
    if (layer.rows == 0 || layer.cols == 0 ||
        layer.weights.size() != layer.rows * layer.cols ||
        layer.bias.size() != layer.rows) {
      std::ostringstream os;
      os << "layer " << l << " has inconsistent weight/bias sizes";
      throw DimensionMismatchError(os.str());
    }
    if (layer.cols != prev) {
      std::ostringstream os;
      os << "layer " << l << " expects " << layer.cols
         << " inputs but the previous stage produces " << prev;
      throw DimensionMismatchError(os.str());
    }
    require_finite(layer.weights, "layer weights");
    require_finite(layer.bias, "layer bias");
    prev = layer.rows;
  }
  if (prev != outputs_) {
    std::ostringstream os;
    os << "declared output arity " << outputs_ << " but the last layer has "
       << prev << " rows";
    throw DimensionMismatchError(os.str());
  }
}

std::vector<double> MlpModel::forward(
    std::span<const double> x,
    std::vector<std::vector<double>>* pre_acts) const {
  std::vector<double> a(x.begin(), x.end());
  for (const MlpLayer& layer : layers_) {
    std::vector<double> z(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      double acc = layer.bias[r];
      const double* w = layer.weights.data() + r * layer.cols;
      for (std::size_t c = 0; c < layer.cols; ++c) acc += w[c] * a[c];
      z[r] = acc;
    }
    if (pre_acts) pre_acts->push_back(z);
    a.resize(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      a[r] = apply_activation(layer.activation, z[r]);
    }
  }
  return a;
}

std::vector<double> MlpModel::logits(std::span<const double> x) const {
  return forward(x, nullptr);
}

std::vector<double> MlpModel::vjp(std::span<const double> x,
                                  std::span<const double> cot) const {
  std::vector<std::vector<double>> pre_acts;
  pre_acts.reserve(layers_.size());
  forward(x, &pre_acts);

  // delta w.r.t. layer l's pre-activation, walked backwards.
  std::vector<double> delta(cot.begin(), cot.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const MlpLayer& layer = layers_[l];
    for (std::size_t r = 0; r < layer.rows; ++r) {
      delta[r] *= activation_derivative(layer.activation, pre_acts[l][r]);
    }
    std::vector<double> prev(layer.cols, 0.0);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      const double* w = layer.weights.data() + r * layer.cols;
      const double d = delta[r];
      for (std::size_t c = 0; c < layer.cols; ++c) prev[c] += w[c] * d;
    }
    delta = std::move(prev);
  }
  return delta;
}

}  // namespace pathattr
