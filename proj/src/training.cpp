#include "confsep/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "confsep/parallel.hpp"

namespace confsep {

void TrainConfig::validate() const {
  if (epochs <= 0) throw ValidationError("train: epochs must be positive");
  if (batch_size <= 0) throw ValidationError("train: batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("train: learning_rate must be positive and finite");
  loss.validate();
  if (inner) inner->validate();
}

AttackBudget training_inner_budget(NormKind norm, double radius,
                                   std::uint64_t seed) {
  AttackBudget budget;
  budget.norm = norm;
  budget.radius = radius;
  budget.iterations = 10;
  budget.restarts = 1;
  budget.seed = seed;
  return budget;
}

namespace {

struct EpochStats {
  double clean_loss_sum = 0.0;
  double adv_loss_sum = 0.0;
};

void apply_update(Network& net, const GradientBundle& grad, double scale) {
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    net.weights[k] -= scale * grad.weight_grads[k];
    net.biases[k] -= scale * grad.bias_grads[k];
  }
}

void accumulate(GradientBundle& total, const GradientBundle& g) {
  for (std::size_t k = 0; k < total.weight_grads.size(); ++k) {
    total.weight_grads[k] += g.weight_grads[k];
    total.bias_grads[k] += g.bias_grads[k];
  }
}

GradientBundle zero_gradients(const Network& net) {
  GradientBundle g;
  g.input_grad = Vector::Zero(net.layer_sizes.front());
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    g.weight_grads.push_back(Matrix::Zero(net.weights[k].rows(), net.weights[k].cols()));
    g.bias_grads.push_back(Vector::Zero(net.biases[k].size()));
  }
  return g;
}

}  // namespace

Network train(const Dataset& data, const std::vector<int>& arch,
              const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.size() == 0) throw ValidationError("train: empty dataset");
  if (arch.size() < 2) throw ValidationError("train: arch needs >= 2 layers");
  if (arch.front() != data.dim())
    throw ValidationError("train: arch input width " + std::to_string(arch.front()) +
                          " does not match data dimension " + std::to_string(data.dim()));
  if (arch.back() < data.num_classes())
    throw ValidationError("train: arch output width " + std::to_string(arch.back()) +
                          " smaller than class count " + std::to_string(data.num_classes()));
  if (arch.back() < 2) throw ValidationError("train: need at least 2 outputs");

  Network net = random_network(arch, cfg.activation, cfg.seed);
  const int n = data.size();

  // The shuffle stream is independent of the inner attacks, so natural
  // training and radius-0 min-max training visit identical batches.
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0x73687566u));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochStats stats;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(n, start + cfg.batch_size);
      GradientBundle total = zero_gradients(net);
      for (int b = start; b < stop; ++b) {
        const int i = order[static_cast<std::size_t>(b)];
        const Vector& x = data.xs[static_cast<std::size_t>(i)];
        const ClassLabel y = data.ys[static_cast<std::size_t>(i)];

        Vector x_eff = x;
        if (cfg.inner) {
          AttackBudget budget = *cfg.inner;
          budget.seed = mix_seed(cfg.inner->seed,
                                 static_cast<std::uint64_t>(epoch) *
                                         static_cast<std::uint64_t>(n) +
                                     static_cast<std::uint64_t>(i));
          x_eff = pgd_maximize_loss(net, x, y, cfg.loss, budget).point;
        }

        const ForwardTrace trace = forward_trace(net, x_eff);
        const PredictionVector probs = softmax(trace.logits);
        const double sample_loss = loss_value(cfg.loss, trace.logits, probs, y);
        if (!std::isfinite(sample_loss))
          throw ValidationError("train: loss diverged at epoch " +
                                std::to_string(epoch));
        stats.adv_loss_sum += sample_loss;
        if (cfg.inner) {
          const LogitsVector clean_logits = forward_logits(net, x);
          stats.clean_loss_sum +=
              loss_value(cfg.loss, clean_logits, softmax(clean_logits), y);
        } else {
          stats.clean_loss_sum += sample_loss;
        }

        accumulate(total,
                   backward_from_trace(
                       net, trace, loss_logit_grad(cfg.loss, trace.logits, probs, y)));
      }
      apply_update(net, total, cfg.learning_rate / static_cast<double>(stop - start));
    }

    if (cfg.log) {
      int correct = 0;
      for (int i = 0; i < n; ++i)
        if (predict_label(net, data.xs[static_cast<std::size_t>(i)]) ==
            data.ys[static_cast<std::size_t>(i)])
          ++correct;
      TrainLogEntry entry;
      entry.epoch = epoch;
      entry.clean_loss = stats.clean_loss_sum / n;
      entry.adv_loss = stats.adv_loss_sum / n;
      entry.clean_acc = static_cast<double>(correct) / n;
      if (!std::isfinite(entry.clean_loss) || !std::isfinite(entry.adv_loss))
        throw ValidationError("train: loss diverged at epoch " + std::to_string(epoch));
      cfg.log(entry);
    }
  }
  return net;
}

double rho_hat(const Network& net, const Dataset& data, const LossKind& kind,
               const AttackBudget& budget, int threads) {
  budget.validate();
  if (data.size() == 0) throw ValidationError("rho_hat: empty dataset");
  const int n = data.size();
  std::vector<double> kappas(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int i) {
    AttackBudget b = budget;
    b.seed = mix_seed(budget.seed, static_cast<std::uint64_t>(i));
    kappas[static_cast<std::size_t>(i)] =
        kappa_hat(net, data.xs[static_cast<std::size_t>(i)],
                  data.ys[static_cast<std::size_t>(i)], kind, b);
  });
  double sum = 0.0;
  for (double k : kappas) sum += k;
  return sum / n;
}

}  // namespace confsep
