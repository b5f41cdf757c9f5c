#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>

#include "confsep/model_io.hpp"
#include "confsep/network.hpp"
#include "confsep/types.hpp"
#include "oracles.hpp"

using namespace confsep;

namespace {

Network one_layer(const Matrix& W, const Vector& b, Activation act = Activation::tanh) {
  Network net;
  net.layer_sizes = {static_cast<int>(W.cols()), static_cast<int>(W.rows())};
  net.weights = {W};
  net.biases = {b};
  net.activation = act;
  return net;
}

}  // namespace

TEST_CASE("forward_logits on degenerate networks") {
  const Network zero = zero_network({3, 4, 2}, Activation::tanh);
  Vector x(3);
  x << 0.3, -0.1, 0.9;
  CHECK(forward_logits(zero, x).isZero(0.0));

  const Network ident = one_layer(Matrix::Identity(2, 2), Vector::Zero(2));
  Vector x2(2);
  x2 << 0.2, 0.8;
  const LogitsVector z = forward_logits(ident, x2);
  CHECK(z[0] == 0.2);
  CHECK(z[1] == 0.8);
}

TEST_CASE("forward_logits matches the straight-line recomputation") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    for (Activation act : {Activation::tanh, Activation::relu}) {
      const Network net = random_network({2, 4, 3}, act, seed);
      std::mt19937_64 rng(seed * 7919);
      const Vector x = oracle::random_point(2, rng);
      const LogitsVector z = forward_logits(net, x);
      const auto ref = oracle::logits(net, x);
      REQUIRE(z.size() == 3);
      for (int i = 0; i < 3; ++i)
        CHECK(z[i] == doctest::Approx(ref[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward_logits is pure") {
  const Network net = random_network({2, 5, 3}, Activation::tanh, 11);
  Vector x(2);
  x << 0.4, 0.6;
  const LogitsVector a = forward_logits(net, x);
  const LogitsVector b = forward_logits(net, x);
  CHECK(a == b);
}

TEST_CASE("forward_logits rejects dimension mismatches") {
  const Network net = random_network({2, 3, 2}, Activation::tanh, 1);
  Vector x(3);
  x << 0.1, 0.2, 0.3;
  CHECK_THROWS_AS(forward_logits(net, x), ValidationError);
}

TEST_CASE("softmax values") {
  Vector z(2);
  z << 0.0, 0.0;
  const PredictionVector p = softmax(z);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));

  z << 1.0, 0.0;
  const PredictionVector q = softmax(z);
  // e/(e+1) and 1/(e+1)
  CHECK(q[0] == doctest::Approx(0.73105857863000490).epsilon(1e-14));
  CHECK(q[1] == doctest::Approx(0.26894142136999512).epsilon(1e-14));
}

TEST_CASE("softmax shift invariance and stability") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector z = 6.0 * oracle::random_point(4, rng, -1.0, 1.0);
    for (double c : {1000.0, -17.5, 3.25}) {
      const PredictionVector a = softmax(z);
      const PredictionVector b = softmax(z + Vector::Constant(4, c));
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  Vector big(3);
  big << 1e3, -1e3, 500.0;
  const PredictionVector p = softmax(big);
  CHECK(p.allFinite());
  CHECK(std::fabs(p.sum() - 1.0) <= 1e-9);
  CHECK(p.minCoeff() >= 0.0);
  CHECK(p.maxCoeff() <= 1.0);
}

TEST_CASE("softmax sums to one on random logits") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector z = 10.0 * oracle::random_point(5, rng, -1.0, 1.0);
    CHECK(std::fabs(softmax(z).sum() - 1.0) <= 1e-9);
  }
}

TEST_CASE("predict breaks ties toward the lowest label") {
  // All-equal logits: zero network.
  const Network zero = zero_network({2, 3}, Activation::tanh);
  Vector x(2);
  x << 0.5, 0.5;
  CHECK(predict(zero, x).first == 0);

  Vector v(3);
  v << 0.1, 0.7, 0.2;
  CHECK(argmax_lowest(v) == 1);
  v << 0.4, 0.4, 0.2;
  CHECK(argmax_lowest(v) == 0);
}

TEST_CASE("predict composes argmax with forward_logits") {
  // Bias-only network pinning the prediction vector near (0.1, 0.7, 0.2).
  Vector b(3);
  b << std::log(0.1), std::log(0.7), std::log(0.2);
  const Network net = one_layer(Matrix::Zero(3, 2), b);
  Vector x(2);
  x << 0.3, 0.3;
  const auto [label, probs] = predict(net, x);
  CHECK(label == 1);
  CHECK(probs[1] == doctest::Approx(0.7).epsilon(1e-12));

  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const Network rnet = random_network({2, 6, 4}, Activation::tanh, seed);
    std::mt19937_64 rng(seed);
    const Vector p = oracle::random_point(2, rng);
    CHECK(predict(rnet, p).first == argmax_lowest(softmax(forward_logits(rnet, p))));
  }
}

TEST_CASE("confidence is the max probability") {
  CHECK(confidence(Vector::Constant(10, 0.1)) == doctest::Approx(0.1).epsilon(1e-15));
  Vector onehot = Vector::Zero(4);
  onehot[2] = 1.0;
  CHECK(confidence(onehot) == 1.0);
  Vector z(2);
  z << 1.0, 0.0;
  CHECK(confidence(softmax(z)) == doctest::Approx(0.73105857863000490).epsilon(1e-14));
}

TEST_CASE("backward on linear cases") {
  const Network zero = random_network({2, 4, 3}, Activation::tanh, 3);
  Vector x(2);
  x << 0.2, 0.9;
  const GradientBundle g0 = backward(zero, x, Vector::Zero(3));
  CHECK(g0.input_grad.isZero(0.0));
  for (const auto& W : g0.weight_grads) CHECK(W.isZero(0.0));
  for (const auto& b : g0.bias_grads) CHECK(b.isZero(0.0));

  Matrix W(3, 2);
  W << 1.0, -2.0, 0.5, 0.25, -1.5, 3.0;
  Vector b = Vector::Zero(3);
  const Network lin = one_layer(W, b);
  Vector u(3);
  u << 0.3, -1.1, 0.7;
  const GradientBundle g = backward(lin, x, u);
  CHECK((g.input_grad - W.transpose() * u).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("backward matches central finite differences") {
  std::mt19937_64 rng(99);
  for (std::uint64_t seed : {31u, 32u, 33u, 34u}) {
    for (Activation act : {Activation::tanh, Activation::relu}) {
      const Network net = random_network({2, 4, 3}, act, seed);
      const Vector x = oracle::random_point(2, rng);
      Vector u(3);
      u << 0.7, -0.4, 1.3;

      if (act == Activation::relu) {
        // Finite differences are unreliable within h of a relu kink.
        const ForwardTrace trace = forward_trace(net, x);
        const Vector pre = net.weights[0] * x + net.biases[0];
        if (pre.cwiseAbs().minCoeff() < 1e-3) continue;
      }

      const GradientBundle g = backward(net, x, u);
      const auto value = [&](const Network& n, const Vector& pt) {
        return u.dot(forward_logits(n, pt));
      };

      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double fd = oracle::central_diff(
            [&](const Vector& pt) { return value(net, pt); }, x, i);
        CHECK(oracle::grad_close(g.input_grad[i], fd));
      }
      for (std::size_t layer = 0; layer < net.weights.size(); ++layer) {
        for (Eigen::Index r = 0; r < net.weights[layer].rows(); ++r) {
          for (Eigen::Index c = 0; c < net.weights[layer].cols(); ++c) {
            Network up = net;
            up.weights[layer](r, c) += 1e-5;
            Network down = net;
            down.weights[layer](r, c) -= 1e-5;
            const double fd = (value(up, x) - value(down, x)) / 2e-5;
            CHECK(oracle::grad_close(g.weight_grads[layer](r, c), fd));
          }
          Network up = net;
          up.biases[layer][r] += 1e-5;
          Network down = net;
          down.biases[layer][r] -= 1e-5;
          const double fd = (value(up, x) - value(down, x)) / 2e-5;
          CHECK(oracle::grad_close(g.bias_grads[layer][r], fd));
        }
      }
    }
  }
}

TEST_CASE("backward_from_trace and input_gradient_from_trace agree with backward") {
  const Network net = random_network({3, 5, 4}, Activation::tanh, 8);
  std::mt19937_64 rng(8);
  const Vector x = oracle::random_point(3, rng);
  Vector u(4);
  u << 0.2, -0.8, 0.5, 1.0;
  const GradientBundle a = backward(net, x, u);
  const ForwardTrace trace = forward_trace(net, x);
  const GradientBundle b = backward_from_trace(net, trace, u);
  CHECK(a.input_grad == b.input_grad);
  for (std::size_t k = 0; k < a.weight_grads.size(); ++k) {
    CHECK(a.weight_grads[k] == b.weight_grads[k]);
    CHECK(a.bias_grads[k] == b.bias_grads[k]);
  }
  CHECK(input_gradient_from_trace(net, trace, u) == a.input_grad);
}

TEST_CASE("network validation") {
  Network net = random_network({2, 3, 2}, Activation::tanh, 1);
  CHECK_NOTHROW(net.validate());
  net.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(net.validate(), ValidationError);

  Network bad = random_network({2, 3, 2}, Activation::tanh, 1);
  bad.biases[1] = Vector::Zero(5);
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  CHECK_THROWS_AS(zero_network({}, Activation::tanh), ValidationError);
  CHECK_THROWS_AS(random_network({2, 0, 2}, Activation::tanh, 1), ValidationError);
}

TEST_CASE("random_network is deterministic under its seed") {
  const Network a = random_network({2, 8, 3}, Activation::relu, 42);
  const Network b = random_network({2, 8, 3}, Activation::relu, 42);
  const Network c = random_network({2, 8, 3}, Activation::relu, 43);
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    CHECK(a.weights[k] == b.weights[k]);
    CHECK(a.biases[k] == b.biases[k]);
  }
  CHECK(a.weights[0] != c.weights[0]);
}

TEST_CASE("model text round-trip is value-exact") {
  Network net = random_network({2, 5, 3}, Activation::relu, 77);
  // Values that stress decimal printing.
  net.weights[0](0, 0) = 0.1 + 0.2;
  net.weights[0](1, 0) = -0.0;
  net.weights[0](1, 1) = 1e-300;
  net.biases[1][2] = 12345678.91011121;

  const Network back = parse_model(format_model(net));
  CHECK(back.layer_sizes == net.layer_sizes);
  CHECK(back.activation == net.activation);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    for (Eigen::Index r = 0; r < net.weights[k].rows(); ++r)
      for (Eigen::Index c = 0; c < net.weights[k].cols(); ++c) {
        const double expected = net.weights[k](r, c);
        const double got = back.weights[k](r, c);
        CHECK(std::memcmp(&expected, &got, sizeof(double)) == 0);
      }
    CHECK(back.biases[k] == net.biases[k]);
  }
}

TEST_CASE("model file round-trip and error reporting") {
  const std::string dir =
      (std::filesystem::temp_directory_path() / "confsep_nn_core_test").string();
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/model.cmdl";

  const Network net = random_network({3, 4, 2}, Activation::tanh, 5);
  save_model(net, path);
  const Network back = load_model(path);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    CHECK(back.weights[k] == net.weights[k]);
    CHECK(back.biases[k] == net.biases[k]);
  }

  CHECK_THROWS_AS(load_model(dir + "/missing.cmdl"), IoError);
  write_text_file(path, "NOT-A-MODEL v9\n");
  CHECK_THROWS_AS(load_model(path), ValidationError);
  write_text_file(path, "CONFSEP-MODEL v1\nlayers 2 3\nactivation tanh\nW0 3 2\n1 2\n");
  CHECK_THROWS_AS(load_model(path), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("mix_seed derives distinct deterministic streams") {
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  CHECK(mix_seed(1, 2) != mix_seed(2, 2));
}
