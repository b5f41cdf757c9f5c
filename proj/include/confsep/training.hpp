#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "confsep/attacks.hpp"
#include "confsep/dataset.hpp"
#include "confsep/losses.hpp"
#include "confsep/network.hpp"

namespace confsep {

struct TrainLogEntry {
  int epoch = 0;
  double clean_loss = 0.0;
  double adv_loss = 0.0;
  double clean_acc = 0.0;
};

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 0.1;
  LossKind loss = LossKind::cross_entropy();
  Activation activation = Activation::tanh;
  std::uint64_t seed = 0;

  /// When set, each training point is replaced by the loss-maximizing point
  /// found inside the budget's ball before the gradient step. A budget with
  /// radius 0 reproduces natural training bit for bit. Per-sample attack
  /// seeds are mix_seed(budget.seed, epoch * n + sample_index).
  std::optional<AttackBudget> inner;

  /// Called once per epoch with that epoch's metrics.
  std::function<void(const TrainLogEntry&)> log;

  void validate() const;
};

/// Inner-maximization defaults for training: a light search (10 iterations,
/// single restart) rather than the heavier evaluation-attack defaults.
AttackBudget training_inner_budget(NormKind norm, double radius,
                                   std::uint64_t seed = 0);

/// Minibatch SGD on the mean loss; with cfg.inner set this is min-max
/// training (ascend inside the ball, then descend in parameters). Throws
/// ValidationError if the loss stops being finite.
Network train(const Dataset& data, const std::vector<int>& arch,
              const TrainConfig& cfg);

/// Mean over the dataset of the inner-max loss estimate kappa_hat, using
/// per-sample seeds mix_seed(budget.seed, sample_index).
double rho_hat(const Network& net, const Dataset& data, const LossKind& kind,
               const AttackBudget& budget, int threads = 1);

}  // namespace confsep
