#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "confsep/losses.hpp"
#include "confsep/network.hpp"
#include "confsep/types.hpp"

namespace confsep {

/// Perturbation set description: a norm ball of the given radius around the
/// original input, intersected with the domain box. step_size / iterations /
/// restarts parameterize the PGD search; seed makes it deterministic.
struct AttackBudget {
  NormKind norm = NormKind::linf;
  double radius = 0.0;
  int iterations = 100;
  int restarts = 10;
  double step_size = 0.0;  // 0 means radius / 4
  std::uint64_t seed = 0;
  DomainBox box;

  double step() const { return step_size > 0.0 ? step_size : radius / 4.0; }
  void validate() const;
  AttackBudget with_radius(double r) const {
    AttackBudget b = *this;
    b.radius = r;
    return b;
  }
};

struct AttackResult {
  FeatureVector point;
  std::optional<ClassLabel> target;
  double achieved_confidence = 0.0;  // max softmax probability at point
  ClassLabel achieved_label = 0;
  double objective = 0.0;  // value of the search objective at point
  bool success = false;
};

/// Objective for a projected-gradient search over points.
struct PointObjective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct SearchOutcome {
  Vector point;
  double objective = 0.0;
};

/// Best-of-restarts PGD ascent of the objective over the budget ball around
/// x0. Restart 0 starts at x0 and x0 stays a candidate under ties, so the
/// result is never worse than the start; with radius 0 it is exactly x0.
SearchOutcome pgd_maximize(const Vector& x0, const PointObjective& objective,
                           const AttackBudget& budget);

/// Projects z onto the budget ball around x0 intersected with the domain box.
/// linf: coordinate-wise clamp; l2: radial scaling onto the sphere if
/// outside. Idempotent.
Vector project(const Vector& x0, const Vector& z, const AttackBudget& budget);

/// Uniform sample from the budget ball around x0, clamped into the box.
Vector sample_in_ball(const Vector& x0, const AttackBudget& budget,
                      std::mt19937_64& rng);

/// PGD maximization of the given loss over the budget ball. The first
/// restart starts at x0 and x0 itself is always kept as a candidate, so the
/// returned loss never falls below the clean loss.
AttackResult pgd_maximize_loss(const Network& net, const Vector& x0, ClassLabel y,
                               const LossKind& kind, const AttackBudget& budget);

/// Maximizes the probability of the target label over the ball (PGD on
/// -log F(.)_target, best over restarts by F(.)_target). success means the
/// prediction at the returned point equals the target.
AttackResult targeted_confidence_attack(const Network& net, const Vector& x0,
                                        ClassLabel target, const AttackBudget& budget);

/// Runs targeted_confidence_attack for every label != y and returns the
/// successful (prediction-flipping) result of largest confidence, or nullopt
/// if no target label flips the prediction.
std::optional<AttackResult> best_wrong_attack(const Network& net, const Vector& x0,
                                              ClassLabel y, const AttackBudget& budget);

/// Searches for a point in the ball that is at least p-confident for some
/// wrong label (best_wrong_attack, then threshold test). One-sided: nullopt
/// means "not found", not "does not exist".
std::optional<AttackResult> p_confident_attack(const Network& net, const Vector& x0,
                                               ClassLabel y, double p,
                                               const AttackBudget& budget);

/// Lower estimate of the worst-case loss over the ball: the loss achieved by
/// pgd_maximize_loss. Always >= the clean loss at x0.
double kappa_hat(const Network& net, const Vector& x0, ClassLabel y,
                 const LossKind& kind, const AttackBudget& budget);

}  // namespace confsep
