#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathattr/feature_vector.hpp"

namespace pathattr {

// Which scalar an attribution run targets: the raw logit of the selected
// class, or the softmax score of the selected class.
enum class ScoreMode { logit, softmax };

ScoreMode parse_score_mode(const std::string& name);
std::string score_mode_name(ScoreMode mode);

struct GradientRecord {
  double value = 0.0;             // F at the point
  std::vector<double> gradient;   // dF/dx_i per feature
};

// A differentiable scalar- or vector-output function over flat feature
// vectors. Implementations are immutable after construction, so evaluate and
// gradient calls are pure and safe to run concurrently from multiple threads.
class DifferentiableModel {
 public:
  virtual ~DifferentiableModel() = default;

  virtual std::size_t input_size() const = 0;
  virtual std::size_t output_arity() const = 0;

  // Raw outputs before any softmax.
  virtual std::vector<double> logits(std::span<const double> x) const = 0;

  // Reverse-mode product J^T w, where J is the Jacobian of logits w.r.t. x
  // and w is a cotangent over the outputs.
  virtual std::vector<double> vjp(std::span<const double> x,
                                  std::span<const double> cotangent) const = 0;

  // Declared input shape; image models carry (h, w, c), everything else is
  // flat. Inputs are validated by length, the shape is presentation metadata.
  virtual Shape input_shape() const { return Shape::flat(input_size()); }

  virtual std::string describe() const = 0;
};

using ModelPtr = std::shared_ptr<const DifferentiableModel>;

// Scalar F(x) for the selected class under the given mode. Softmax uses
// max-subtraction. Throws InputError on length mismatch / non-finite input,
// NumericError if the model emits a non-finite value.
double evaluate(const DifferentiableModel& model, const FeatureVector& x,
                std::size_t target_class, ScoreMode mode);

// Analytic gradient of the same scalar. The softmax gradient is assembled
// from the logit Jacobian as p_c * (e_c - p), never by differencing.
GradientRecord gradient(const DifferentiableModel& model,
                        const FeatureVector& x, std::size_t target_class,
                        ScoreMode mode);

// Central-difference check: max over coordinates of
// |analytic - numeric| / (|numeric| + 1e-8), step h > 0.
double check_gradient(const DifferentiableModel& model, const FeatureVector& x,
                      std::size_t target_class, ScoreMode mode, double h);

// ---------------------------------------------------------------------------
// Built-in analytic models, each with closed-form gradients.
// ---------------------------------------------------------------------------

// F(x) = w . x + b, single output.
class LinearModel final : public DifferentiableModel {
 public:
  LinearModel(std::vector<double> weights, double bias);

  std::size_t input_size() const override { return weights_.size(); }
  std::size_t output_arity() const override { return 1; }
  std::vector<double> logits(std::span<const double> x) const override;
  std::vector<double> vjp(std::span<const double> x,
                          std::span<const double> cotangent) const override;
  std::string describe() const override { return "linear"; }

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  std::vector<double> weights_;
  double bias_;
};

// F(x) = prod over pairs (i, j) of x_i * x_j. The canonical two-feature
// instance is F(x1, x2) = x1 * x2.
class BilinearProductModel final : public DifferentiableModel {
 public:
  BilinearProductModel(std::size_t input_size,
                       std::vector<std::pair<std::size_t, std::size_t>> pairs);

  std::size_t input_size() const override { return n_; }
  std::size_t output_arity() const override { return 1; }
  std::vector<double> logits(std::span<const double> x) const override;
  std::vector<double> vjp(std::span<const double> x,
                          std::span<const double> cotangent) const override;
  std::string describe() const override { return "bilinear_product"; }

  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const {
    return pairs_;
  }

 private:
  std::size_t n_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

// F(x) = sum_i g(x_i) with one shared g. Every pair of features is symmetric,
// which is what the symmetry-preservation tests need.
class SymmetricSumModel final : public DifferentiableModel {
 public:
  enum class G { square, softplus };

  SymmetricSumModel(std::size_t input_size, G g);

  std::size_t input_size() const override { return n_; }
  std::size_t output_arity() const override { return 1; }
  std::vector<double> logits(std::span<const double> x) const override;
  std::vector<double> vjp(std::span<const double> x,
                          std::span<const double> cotangent) const override;
  std::string describe() const override { return "symmetric_sum"; }

  G g() const { return g_; }

 private:
  std::size_t n_;
  G g_;
};

// F(x) = sum_m A_m exp(-|x - c_m|^2 / (2 s_m^2)). Narrow bumps placed near
// but off a straight baseline-input line create the high-gradient regions
// that path methods are sensitive to.
class BumpMixtureModel final : public DifferentiableModel {
 public:
  BumpMixtureModel(std::size_t input_size, std::vector<std::vector<double>> centers,
                   std::vector<double> amplitudes, std::vector<double> widths,
                   Shape shape = Shape{});

  std::size_t input_size() const override { return n_; }
  std::size_t output_arity() const override { return 1; }
  std::vector<double> logits(std::span<const double> x) const override;
  std::vector<double> vjp(std::span<const double> x,
                          std::span<const double> cotangent) const override;
  Shape input_shape() const override { return shape_; }
  std::string describe() const override { return "bump_mixture"; }

  const std::vector<std::vector<double>>& centers() const { return centers_; }
  const std::vector<double>& amplitudes() const { return amplitudes_; }
  const std::vector<double>& widths() const { return widths_; }

 private:
  std::size_t n_;
  std::vector<std::vector<double>> centers_;
  std::vector<double> amplitudes_;
  std::vector<double> widths_;
  Shape shape_;
};

// ---------------------------------------------------------------------------
// Feed-forward model backed by a layer list (the ModelSpec file schema).
// ---------------------------------------------------------------------------

enum class Activation { identity, relu, softplus };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);

struct MlpLayer {
  std::size_t rows = 0;           // outputs
  std::size_t cols = 0;           // inputs
  std::vector<double> weights;    // row-major, rows x cols
  std::vector<double> bias;       // rows
  Activation activation = Activation::identity;
};

class MlpModel final : public DifferentiableModel {
 public:
  // Validates that adjacent layers compose, that the declared output arity
  // matches the last layer, and that all parameters are finite.
  MlpModel(std::vector<MlpLayer> layers, Shape input_shape,
           std::size_t outputs);

  std::size_t input_size() const override { return input_shape_.size(); }
  std::size_t output_arity() const override { return outputs_; }
  std::vector<double> logits(std::span<const double> x) const override;
  std::vector<double> vjp(std::span<const double> x,
                          std::span<const double> cotangent) const override;
  Shape input_shape() const override { return input_shape_; }
  std::string describe() const override { return "mlp"; }

  const std::vector<MlpLayer>& layers() const { return layers_; }

 private:
  std::vector<double> forward(std::span<const double> x,
                              std::vector<std::vector<double>>* pre_acts) const;

  std::vector<MlpLayer> layers_;
  Shape input_shape_;
  std::size_t outputs_;
};

}  // namespace pathattr
