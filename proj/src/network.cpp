#include "confsep/network.hpp"

#include <cmath>
#include <random>

namespace confsep {

namespace {

void check_input_dim(const Network& net, const Vector& x) {
  if (x.size() != net.input_dim()) {
    throw ValidationError("input dimension " + std::to_string(x.size()) +
                          " does not match first layer size " +
                          std::to_string(net.input_dim()));
  }
}

Vector apply_activation(Activation act, const Vector& z) {
  if (act == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Derivative through the activation given the post-activation value.
// relu: 1 where post > 0, else 0 (subgradient at 0 is 0). tanh: 1 - post^2.
Vector activation_deriv(Activation act, const Vector& post) {
  if (act == Activation::relu) {
    return (post.array() > 0.0).cast<double>().matrix();
  }
  return (1.0 - post.array().square()).matrix();
}

}  // namespace

std::string to_string(Activation act) {
  return act == Activation::relu ? "relu" : "tanh";
}

Activation parse_activation(const std::string& text) {
  if (text == "relu") return Activation::relu;
  if (text == "tanh") return Activation::tanh;
  throw ValidationError("unknown activation '" + text + "' (expected relu or tanh)");
}

void Network::validate() const {
  if (layer_sizes.size() < 2) throw ValidationError("network needs at least two layers");
  for (int s : layer_sizes) {
    if (s <= 0) throw ValidationError("layer sizes must be positive");
  }
  if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size()) {
    throw ValidationError("weight/bias count does not match layer count");
  }
  for (size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() != layer_sizes[k + 1] || weights[k].cols() != layer_sizes[k]) {
      throw ValidationError("weight matrix " + std::to_string(k) + " has wrong shape");
    }
    if (biases[k].size() != layer_sizes[k + 1]) {
      throw ValidationError("bias vector " + std::to_string(k) + " has wrong size");
    }
    if (!weights[k].allFinite() || !biases[k].allFinite()) {
      throw ValidationError("non-finite parameter in layer " + std::to_string(k));
    }
  }
}

Network zero_network(const std::vector<int>& layer_sizes, Activation act) {
  Network net;
  net.layer_sizes = layer_sizes;
  net.activation = act;
  for (size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    net.weights.push_back(Matrix::Zero(layer_sizes[k + 1], layer_sizes[k]));
    net.biases.push_back(Vector::Zero(layer_sizes[k + 1]));
  }
  net.validate();
  return net;
}

Network random_network(const std::vector<int>& layer_sizes, Activation act,
                       std::uint64_t seed) {
  Network net = zero_network(layer_sizes, act);
  std::mt19937_64 rng(seed);
  for (size_t k = 0; k < net.weights.size(); ++k) {
    const double fan_in = layer_sizes[k];
    const double fan_out = layer_sizes[k + 1];
    const double scale = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (int r = 0; r < net.weights[k].rows(); ++r) {
      for (int c = 0; c < net.weights[k].cols(); ++c) {
        net.weights[k](r, c) = dist(rng);
      }
    }
  }
  return net;
}

ForwardTrace forward_trace(const Network& net, const Vector& x) {
  check_input_dim(net, x);
  ForwardTrace trace;
  trace.post.reserve(net.weights.size());
  trace.post.push_back(x);
  for (int k = 0; k < net.num_layers(); ++k) {
    Vector z = net.weights[k] * trace.post.back() + net.biases[k];
    if (k + 1 == net.num_layers()) {
      trace.logits = std::move(z);
    } else {
      trace.post.push_back(apply_activation(net.activation, z));
    }
  }
  return trace;
}

LogitsVector forward_logits(const Network& net, const Vector& x) {
  return forward_trace(net, x).logits;
}

PredictionVector softmax(const LogitsVector& z) {
  if (!z.allFinite()) throw ValidationError("softmax requires finite logits");
  const double m = z.maxCoeff();
  Vector e = (z.array() - m).exp().matrix();
  return e / e.sum();
}

std::pair<ClassLabel, PredictionVector> predict(const Network& net, const Vector& x) {
  PredictionVector probs = softmax(forward_logits(net, x));
  return {argmax_lowest(probs), std::move(probs)};
}

double confidence(const PredictionVector& probs) { return probs.maxCoeff(); }

GradientBundle backward_from_trace(const Network& net, const ForwardTrace& trace,
                                   const Vector& upstream) {
  if (upstream.size() != net.num_classes()) {
    throw ValidationError("upstream dimension does not match class count");
  }
  GradientBundle grads;
  grads.weight_grads.resize(net.num_layers());
  grads.bias_grads.resize(net.num_layers());

  Vector delta = upstream;
  for (int k = net.num_layers() - 1; k >= 0; --k) {
    grads.weight_grads[k] = delta * trace.post[k].transpose();
    grads.bias_grads[k] = delta;
    Vector back = net.weights[k].transpose() * delta;
    if (k > 0) {
      delta = back.cwiseProduct(activation_deriv(net.activation, trace.post[k]));
    } else {
      grads.input_grad = std::move(back);
    }
  }
  return grads;
}

GradientBundle backward(const Network& net, const Vector& x, const Vector& upstream) {
  return backward_from_trace(net, forward_trace(net, x), upstream);
}

Vector input_gradient_from_trace(const Network& net, const ForwardTrace& trace,
                                 const Vector& upstream) {
  if (upstream.size() != net.num_classes()) {
    throw ValidationError("upstream dimension does not match class count");
  }
  Vector delta = upstream;
  for (int k = net.num_layers() - 1; k >= 1; --k) {
    delta = (net.weights[k].transpose() * delta)
                .cwiseProduct(activation_deriv(net.activation, trace.post[k]));
  }
  return net.weights[0].transpose() * delta;
}

}  // namespace confsep
