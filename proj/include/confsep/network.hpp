#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "confsep/types.hpp"

namespace confsep {

enum class Activation { relu, tanh };

std::string to_string(Activation act);
Activation parse_activation(const std::string& text);

/// Dense feedforward classifier. weights[k] maps layer_sizes[k] ->
/// layer_sizes[k+1]; the final layer produces logits (no activation), hidden
/// layers apply the configured activation. Immutable by convention: training
/// produces new Network values.
struct Network {
  std::vector<int> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Activation activation = Activation::tanh;

  int input_dim() const { return layer_sizes.front(); }
  int num_classes() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }

  /// Checks shape consistency and finiteness of every entry.
  void validate() const;
};

/// Zero-initialized network of the given shape.
Network zero_network(const std::vector<int>& layer_sizes, Activation act);

/// Glorot-uniform initialization, deterministic under the seed.
Network random_network(const std::vector<int>& layer_sizes, Activation act,
                       std::uint64_t seed);

/// Post-activation values for every layer; post[0] is the input itself and
/// logits is the unactivated final layer. Enough state to run backprop
/// (relu' and tanh' are both functions of the post-activation).
struct ForwardTrace {
  std::vector<Vector> post;
  Vector logits;
};

ForwardTrace forward_trace(const Network& net, const Vector& x);

LogitsVector forward_logits(const Network& net, const Vector& x);

/// Numerically stabilized: exp(z - max z) / sum.
PredictionVector softmax(const LogitsVector& z);

/// Predicted label (argmax of softmax, ties to the lowest index) plus the
/// full probability vector.
std::pair<ClassLabel, PredictionVector> predict(const Network& net, const Vector& x);

inline ClassLabel predict_label(const Network& net, const Vector& x) {
  return predict(net, x).first;
}

/// Max softmax probability; in [1/num_classes, 1].
double confidence(const PredictionVector& probs);

struct GradientBundle {
  Vector input_grad;
  std::vector<Matrix> weight_grads;
  std::vector<Vector> bias_grads;
};

/// Exact reverse-mode gradients of <upstream, logits(x)> with respect to the
/// input and every parameter.
GradientBundle backward(const Network& net, const Vector& x, const Vector& upstream);

GradientBundle backward_from_trace(const Network& net, const ForwardTrace& trace,
                                   const Vector& upstream);

/// Input gradient only; the cheap path used inside attack/embedding loops.
Vector input_gradient_from_trace(const Network& net, const ForwardTrace& trace,
                                 const Vector& upstream);

}  // namespace confsep
