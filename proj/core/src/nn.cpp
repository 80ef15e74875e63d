#include "contreg/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace contreg::nn {

namespace {

void check_chain(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("network needs at least one layer");
  for (std::size_t l = 0; l < specs.size(); ++l) {
    if (specs[l].input_dim == 0 || specs[l].output_dim == 0)
      throw std::invalid_argument("layer dims must be positive");
    if (l > 0 && specs[l].input_dim != specs[l - 1].output_dim)
      throw ShapeError("layer " + std::to_string(l) + " input dim " +
                       std::to_string(specs[l].input_dim) + " does not chain with previous output dim " +
                       std::to_string(specs[l - 1].output_dim));
    if (specs[l].dropout_rate < 0.0 || specs[l].dropout_rate >= 1.0)
      throw std::invalid_argument("dropout rate must be in [0,1)");
  }
}

double activate(Activation a, double slope, double x) {
  switch (a) {
    case Activation::LeakyRelu: return x > 0.0 ? x : slope * x;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Identity: return x;
  }
  return x;
}

// Derivative expressed through the pre-activation value.
double activate_grad(Activation a, double slope, double pre) {
  switch (a) {
    case Activation::LeakyRelu: return pre > 0.0 ? 1.0 : slope;
    case Activation::Tanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

struct ForwardTrace {
  // activations[0] is the input; activations[l+1] the (possibly masked)
  // output of layer l. preacts[l] holds layer l's pre-activation values.
  std::vector<Vector> activations;
  std::vector<Vector> preacts;
  std::vector<Vector> masks;  // empty vector when a layer is unmasked
};

bool layer_is_masked(const Network& net, std::size_t l, Mode mode) {
  // Hidden-layer activations only: the final layer's output is never dropped.
  return mode == Mode::Train && l + 1 < net.layer_count() &&
         net.layer(l).spec.dropout_rate > 0.0;
}

ForwardTrace forward_trace(const Network& net, const Vector& x, Mode mode,
                           std::mt19937_64* rng, std::size_t layer_count) {
  if (x.size() != net.input_dim())
    throw ShapeError("input length " + std::to_string(x.size()) + " does not match network input dim " +
                     std::to_string(net.input_dim()));
  if (layer_count > net.layer_count())
    throw std::invalid_argument("layer_count exceeds network depth");

  ForwardTrace trace;
  trace.activations.resize(layer_count + 1);
  trace.preacts.resize(layer_count);
  trace.masks.resize(layer_count);
  trace.activations[0] = x;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t l = 0; l < layer_count; ++l) {
    const Layer& layer = net.layer(l);
    const std::size_t in = layer.spec.input_dim;
    const std::size_t out = layer.spec.output_dim;
    const Vector& a_prev = trace.activations[l];

    Vector pre(layer.bias);
    for (std::size_t i = 0; i < in; ++i) {
      const double ai = a_prev[i];
      const double* w = layer.weights.data() + i * out;
      for (std::size_t o = 0; o < out; ++o) pre[o] += ai * w[o];
    }

    Vector act(out);
    for (std::size_t o = 0; o < out; ++o)
      act[o] = activate(layer.spec.activation, layer.spec.leaky_slope, pre[o]);

    if (layer_is_masked(net, l, mode)) {
      if (rng == nullptr)
        throw std::invalid_argument("Train-mode forward with dropout needs an rng");
      const double rate = layer.spec.dropout_rate;
      const double keep_scale = 1.0 / (1.0 - rate);
      Vector mask(out);
      for (std::size_t o = 0; o < out; ++o) {
        mask[o] = unit(*rng) < rate ? 0.0 : keep_scale;
        act[o] *= mask[o];
      }
      trace.masks[l] = std::move(mask);
    }

    trace.preacts[l] = std::move(pre);
    trace.activations[l + 1] = std::move(act);
  }
  return trace;
}

// Backpropagates d(loss)/d(output) through the traced pass, accumulating
// parameter gradients into grad (flattened order).
void backprop_one(const Network& net, const ForwardTrace& trace,
                  Vector output_grad, Vector& grad) {
  std::size_t offset = grad.size();
  for (std::size_t li = net.layer_count(); li-- > 0;) {
    const Layer& layer = net.layer(li);
    const std::size_t in = layer.spec.input_dim;
    const std::size_t out = layer.spec.output_dim;
    offset -= in * out + out;

    Vector g_pre(out);
    const Vector& mask = trace.masks[li];
    for (std::size_t o = 0; o < out; ++o) {
      double g = output_grad[o];
      if (!mask.empty()) g *= mask[o];
      g_pre[o] = g * activate_grad(layer.spec.activation, layer.spec.leaky_slope,
                                   trace.preacts[li][o]);
    }

    const Vector& a_prev = trace.activations[li];
    double* gw = grad.data() + offset;
    for (std::size_t i = 0; i < in; ++i) {
      const double ai = a_prev[i];
      for (std::size_t o = 0; o < out; ++o) gw[i * out + o] += ai * g_pre[o];
    }
    double* gb = grad.data() + offset + in * out;
    for (std::size_t o = 0; o < out; ++o) gb[o] += g_pre[o];

    if (li > 0) {
      Vector g_prev(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        const double* w = layer.weights.data() + i * out;
        double acc = 0.0;
        for (std::size_t o = 0; o < out; ++o) acc += w[o] * g_pre[o];
        g_prev[i] = acc;
      }
      output_grad = std::move(g_prev);
    }
  }
}

}  // namespace

Network::Network(std::vector<LayerSpec> specs) {
  check_chain(specs);
  layers_.reserve(specs.size());
  for (auto& spec : specs) {
    Layer layer;
    layer.spec = spec;
    layer.weights.assign(spec.input_dim * spec.output_dim, 0.0);
    layer.bias.assign(spec.output_dim, 0.0);
    layers_.push_back(std::move(layer));
  }
}

Network Network::initialized(std::vector<LayerSpec> specs, std::uint64_t seed) {
  Network net(std::move(specs));
  std::mt19937_64 rng(seed);
  for (auto& layer : net.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.spec.input_dim));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& w : layer.weights) w = dist(rng);
  }
  return net;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

Vector Network::flatten() const {
  Vector params;
  params.reserve(parameter_count());
  for (const auto& layer : layers_) {
    params.insert(params.end(), layer.weights.begin(), layer.weights.end());
    params.insert(params.end(), layer.bias.begin(), layer.bias.end());
  }
  return params;
}

void Network::unflatten(const Vector& params) {
  if (params.size() != parameter_count())
    throw ShapeError("parameter vector length " + std::to_string(params.size()) +
                     " does not match network parameter count " +
                     std::to_string(parameter_count()));
  std::size_t offset = 0;
  for (auto& layer : layers_) {
    std::copy_n(params.begin() + offset, layer.weights.size(), layer.weights.begin());
    offset += layer.weights.size();
    std::copy_n(params.begin() + offset, layer.bias.size(), layer.bias.begin());
    offset += layer.bias.size();
  }
}

Vector forward(const Network& net, const Vector& x, Mode mode, std::mt19937_64* rng) {
  return forward_trace(net, x, mode, rng, net.layer_count()).activations.back();
}

Vector forward_prefix(const Network& net, const Vector& x, std::size_t layer_count,
                      Mode mode, std::mt19937_64* rng) {
  return forward_trace(net, x, mode, rng, layer_count).activations.back();
}

double mse(const std::vector<Vector>& predictions, const std::vector<Vector>& targets) {
  if (predictions.size() != targets.size())
    throw ShapeError("mse sequence lengths differ");
  if (predictions.empty())
    throw std::invalid_argument("mse over empty sequences");
  double total = 0.0;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    if (predictions[n].size() != targets[n].size())
      throw ShapeError("mse item dims differ at index " + std::to_string(n));
    double sq = 0.0;
    for (std::size_t j = 0; j < predictions[n].size(); ++j) {
      const double d = targets[n][j] - predictions[n][j];
      sq += d * d;
    }
    total += sq;
  }
  return total / static_cast<double>(predictions.size());
}

BackwardResult backward(const Network& net, const TrainSet& batch, LossKind kind,
                        const PenaltyHook& penalty, Mode mode, std::mt19937_64* rng) {
  if (batch.empty()) throw std::invalid_argument("backward over an empty batch");

  BackwardResult result;
  result.gradient.assign(net.parameter_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (std::size_t n = 0; n < batch.size(); ++n) {
    const Vector& target = kind == LossKind::Reconstruction ? batch[n].input : batch[n].target;
    ForwardTrace trace = forward_trace(net, batch[n].input, mode, rng, net.layer_count());
    const Vector& output = trace.activations.back();
    if (output.size() != target.size())
      throw ShapeError("target dim " + std::to_string(target.size()) +
                       " does not match network output dim " + std::to_string(output.size()));

    double sq = 0.0;
    Vector output_grad(output.size());
    for (std::size_t j = 0; j < output.size(); ++j) {
      const double d = output[j] - target[j];
      sq += d * d;
      output_grad[j] = 2.0 * inv_n * d;
    }
    if (!std::isfinite(sq))
      throw NumericError("non-finite loss at batch index " + std::to_string(n), n);
    result.loss += sq * inv_n;

    backprop_one(net, trace, std::move(output_grad), result.gradient);
  }

  if (penalty) {
    PenaltyResult p = penalty(net.flatten());
    result.loss += p.value;
    if (p.gradient.size() != result.gradient.size())
      throw std::invalid_argument("penalty gradient length mismatch");
    for (std::size_t i = 0; i < p.gradient.size(); ++i) result.gradient[i] += p.gradient[i];
  }
  return result;
}

AdamState AdamState::fresh(std::size_t parameter_count, double lr) {
  AdamState state;
  state.m.assign(parameter_count, 0.0);
  state.v.assign(parameter_count, 0.0);
  state.learning_rate = lr;
  return state;
}

void adam_step(AdamState& state, Vector& params, const Vector& grads) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
    throw std::invalid_argument("adam_step length mismatch");

  state.step += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / b1t;
    const double v_hat = state.v[i] / b2t;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

TrainResult train(Network& net, const TrainSet& dataset, const TrainConfig& config,
                  LossKind kind, const PenaltyHook& penalty) {
  if (dataset.empty()) throw std::invalid_argument("train over an empty dataset");
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be positive");

  std::mt19937_64 rng(config.shuffle_seed);
  AdamState adam = AdamState::fresh(net.parameter_count(), config.learning_rate);
  const Mode mode = config.dropout_enabled ? Mode::Train : Mode::Eval;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  double best_loss = std::numeric_limits<double>::infinity();
  Vector best_params;
  std::size_t epochs_without_improvement = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    TrainSet batch;
    batch.reserve(config.batch_size);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(start + config.batch_size, order.size());
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(dataset[order[k]]);

      BackwardResult back = backward(net, batch, kind, penalty, mode, &rng);
      Vector params = net.flatten();
      adam_step(adam, params, back.gradient);
      net.unflatten(params);

      loss_sum += back.loss * static_cast<double>(batch.size());
    }
    const double epoch_loss = loss_sum / static_cast<double>(dataset.size());
    result.history.push_back(epoch_loss);

    if (config.early_stopping_patience) {
      if (epoch_loss < best_loss) {
        best_loss = epoch_loss;
        best_params = net.flatten();
        epochs_without_improvement = 0;
      } else {
        ++epochs_without_improvement;
      }
      if (epochs_without_improvement >= *config.early_stopping_patience) break;
    }
  }

  if (config.early_stopping_patience && !best_params.empty()) net.unflatten(best_params);
  return result;
}

}  // namespace contreg::nn
