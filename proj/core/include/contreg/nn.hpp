#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "contreg/errors.hpp"

namespace contreg::nn {

using Vector = std::vector<double>;

enum class Activation { LeakyRelu, Tanh, Identity };
enum class Mode { Train, Eval };
enum class LossKind { Prediction, Reconstruction };

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::Identity;
  double leaky_slope = 0.05;
  // Inverted dropout on this layer's activations. Only hidden layers are
  // masked; the rate on the final layer is ignored.
  double dropout_rate = 0.0;
};

struct Layer {
  LayerSpec spec;
  Vector weights;  // input_dim x output_dim, row-major: weights[i * output_dim + o]
  Vector bias;     // output_dim
};

/// A dense feed-forward network. Parameters flatten in a stable order
/// (layer 0 weights row-major, layer 0 bias, layer 1 weights, ...), so
/// Fisher diagonals and Adam moments stay aligned across calls.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<LayerSpec> specs);  // zero parameters

  // Uniform weights in [-sqrt(6/fan_in), +sqrt(6/fan_in)], zero biases.
  static Network initialized(std::vector<LayerSpec> specs, std::uint64_t seed);

  std::size_t layer_count() const { return layers_.size(); }
  std::size_t input_dim() const { return layers_.front().spec.input_dim; }
  std::size_t output_dim() const { return layers_.back().spec.output_dim; }
  std::size_t parameter_count() const;

  Layer& layer(std::size_t l) { return layers_[l]; }
  const Layer& layer(std::size_t l) const { return layers_[l]; }

  Vector flatten() const;
  void unflatten(const Vector& params);

 private:
  std::vector<Layer> layers_;
};

/// One training row. `target` is ignored for LossKind::Reconstruction,
/// where the input reconstructs itself.
struct TrainSample {
  Vector input;
  Vector target;
};

using TrainSet = std::vector<TrainSample>;

Vector forward(const Network& net, const Vector& x, Mode mode,
               std::mt19937_64* rng = nullptr);

/// Runs only the first `layer_count` layers (an encoder slice, say).
/// layer_count == net.layer_count() is the full pass.
Vector forward_prefix(const Network& net, const Vector& x, std::size_t layer_count,
                      Mode mode = Mode::Eval, std::mt19937_64* rng = nullptr);

/// (1/N) * sum of squared Euclidean distances. Throws std::invalid_argument
/// on empty input, ShapeError on mismatched lengths.
double mse(const std::vector<Vector>& predictions, const std::vector<Vector>& targets);

struct PenaltyResult {
  double value = 0.0;
  Vector gradient;  // aligned with flattened parameters
};

/// Extra loss term evaluated at the current flattened parameters.
using PenaltyHook = std::function<PenaltyResult(const Vector& params)>;

struct BackwardResult {
  Vector gradient;  // d(batch MSE + penalty)/d(params), flattened order
  double loss = 0.0;
};

/// Analytic gradient of the batch loss. Eval mode by default so gradients
/// are deterministic; pass Mode::Train with an rng to sample dropout masks.
BackwardResult backward(const Network& net, const TrainSet& batch, LossKind kind,
                        const PenaltyHook& penalty = nullptr,
                        Mode mode = Mode::Eval, std::mt19937_64* rng = nullptr);

struct AdamState {
  Vector m;
  Vector v;
  std::int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState fresh(std::size_t parameter_count, double learning_rate);
};

/// Bias-corrected Adam update, in place.
void adam_step(AdamState& state, Vector& params, const Vector& grads);

struct TrainConfig {
  std::size_t epochs = 1;
  std::size_t batch_size = 32;  // final partial batch is processed
  std::optional<std::size_t> early_stopping_patience;
  bool dropout_enabled = false;
  std::uint64_t shuffle_seed = 0;
  double learning_rate = 1e-3;
};

struct TrainResult {
  std::vector<double> history;  // per-epoch mean training loss (incl. penalty)
};

/// Shuffled mini-batch Adam over the dataset. With a patience set, stops
/// once the epoch loss has not strictly decreased for that many epochs and
/// restores the parameters of the best epoch seen.
TrainResult train(Network& net, const TrainSet& dataset, const TrainConfig& config,
                  LossKind kind, const PenaltyHook& penalty = nullptr);

}  // namespace contreg::nn
