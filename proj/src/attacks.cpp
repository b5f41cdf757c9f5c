#include "confsep/attacks.hpp"

#include <cmath>
#include <functional>

namespace confsep {

namespace {

// Objective under PGD ascent: value plus the gradient upstream over logits.
struct LogitObjective {
  std::function<double(const LogitsVector&, const PredictionVector&)> value;
  std::function<Vector(const LogitsVector&, const PredictionVector&)> upstream;
};

Vector ascent_direction(const Vector& grad, NormKind norm) {
  if (norm == NormKind::linf) {
    return grad.array().sign().matrix();
  }
  const double n = grad.norm();
  if (n == 0.0) return Vector::Zero(grad.size());
  return grad / n;
}

PointObjective lift(const Network& net, const LogitObjective& objective) {
  return PointObjective{
      [&net, objective](const Vector& z) {
        const LogitsVector logits = forward_logits(net, z);
        return objective.value(logits, softmax(logits));
      },
      [&net, objective](const Vector& z) {
        const ForwardTrace trace = forward_trace(net, z);
        return input_gradient_from_trace(
            net, trace, objective.upstream(trace.logits, softmax(trace.logits)));
      }};
}

SearchOutcome pgd_ascend(const Network& net, const Vector& x0,
                         const LogitObjective& objective, const AttackBudget& budget) {
  return pgd_maximize(x0, lift(net, objective), budget);
}

AttackResult finish_result(const Network& net, SearchOutcome outcome,
                           std::optional<ClassLabel> target) {
  AttackResult result;
  result.point = std::move(outcome.point);
  result.objective = outcome.objective;
  const PredictionVector probs = softmax(forward_logits(net, result.point));
  result.achieved_label = argmax_lowest(probs);
  result.achieved_confidence = confidence(probs);
  result.target = target;
  result.success = target.has_value() && result.achieved_label == *target;
  return result;
}

}  // namespace

SearchOutcome pgd_maximize(const Vector& x0, const PointObjective& objective,
                           const AttackBudget& budget) {
  budget.validate();
  std::mt19937_64 rng(budget.seed);

  // Every evaluated iterate is a candidate and ties keep the earlier
  // candidate, so the start point can never be displaced by an equal or
  // worse point.
  SearchOutcome best{project(x0, x0, budget), 0.0};
  best.objective = objective.value(best.point);

  const double step = budget.step();
  for (int r = 0; r < budget.restarts; ++r) {
    Vector z = (r == 0) ? best.point : sample_in_ball(x0, budget, rng);
    if (r > 0) {
      const double v = objective.value(z);
      if (v > best.objective) best = {z, v};
    }
    if (budget.radius <= 0.0 || step <= 0.0) continue;
    for (int it = 0; it < budget.iterations; ++it) {
      const Vector grad = objective.gradient(z);
      z = project(x0, z + step * ascent_direction(grad, budget.norm), budget);
      const double v = objective.value(z);
      if (v > best.objective) best = {z, v};
    }
  }
  return best;
}

void AttackBudget::validate() const {
  if (radius < 0.0) throw ValidationError("attack radius must be >= 0");
  if (iterations <= 0) throw ValidationError("attack iterations must be positive");
  if (restarts <= 0) throw ValidationError("attack restarts must be positive");
  if (step_size < 0.0) throw ValidationError("attack step size must be >= 0");
  box.validate();
}

Vector project(const Vector& x0, const Vector& z, const AttackBudget& budget) {
  if (x0.size() != z.size()) throw ValidationError("project: dimension mismatch");
  Vector out = z;
  if (budget.norm == NormKind::linf) {
    out = out.array()
              .max(x0.array() - budget.radius)
              .min(x0.array() + budget.radius)
              .matrix();
  } else {
    const Vector d = out - x0;
    const double n = d.norm();
    if (n > budget.radius) {
      out = x0 + d * (budget.radius / n);
    }
  }
  return budget.box.clamp(std::move(out));
}

Vector sample_in_ball(const Vector& x0, const AttackBudget& budget,
                      std::mt19937_64& rng) {
  const auto d = x0.size();
  Vector z(d);
  if (budget.norm == NormKind::linf) {
    std::uniform_real_distribution<double> u(-budget.radius, budget.radius);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = x0[i] + u(rng);
  } else {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector dir(d);
    for (Eigen::Index i = 0; i < d; ++i) dir[i] = g(rng);
    const double n = dir.norm();
    const double r =
        budget.radius * std::pow(u(rng), 1.0 / static_cast<double>(d));
    z = (n == 0.0) ? x0 : Vector(x0 + dir * (r / n));
  }
  return project(x0, z, budget);
}

AttackResult pgd_maximize_loss(const Network& net, const Vector& x0, ClassLabel y,
                               const LossKind& kind, const AttackBudget& budget) {
  LogitObjective objective{
      [&](const LogitsVector& z, const PredictionVector& p) {
        return loss_value(kind, z, p, y);
      },
      [&](const LogitsVector& z, const PredictionVector& p) {
        return loss_logit_grad(kind, z, p, y);
      }};
  SearchOutcome out = pgd_ascend(net, x0, objective, budget);
  AttackResult result = finish_result(net, std::move(out), std::nullopt);
  result.success = result.achieved_label != y;
  return result;
}

AttackResult targeted_confidence_attack(const Network& net, const Vector& x0,
                                        ClassLabel target, const AttackBudget& budget) {
  if (target < 0 || target >= net.num_classes()) {
    throw ValidationError("attack target label out of range");
  }
  // Ascend log F(.)_target; ranking candidates by F(.)_target is equivalent
  // and keeps the reported objective a probability.
  LogitObjective objective{
      [&](const LogitsVector&, const PredictionVector& p) { return p[target]; },
      [&](const LogitsVector&, const PredictionVector& p) {
        return Vector(Vector::Unit(p.size(), target) - p);
      }};
  SearchOutcome out = pgd_ascend(net, x0, objective, budget);
  return finish_result(net, std::move(out), target);
}

std::optional<AttackResult> best_wrong_attack(const Network& net, const Vector& x0,
                                              ClassLabel y, const AttackBudget& budget) {
  std::optional<AttackResult> best;
  for (ClassLabel target = 0; target < net.num_classes(); ++target) {
    if (target == y) continue;
    AttackBudget b = budget;
    b.seed = mix_seed(budget.seed, static_cast<std::uint64_t>(target));
    AttackResult result = targeted_confidence_attack(net, x0, target, b);
    if (!result.success) continue;
    if (!best || result.achieved_confidence > best->achieved_confidence) {
      best = std::move(result);
    }
  }
  return best;
}

std::optional<AttackResult> p_confident_attack(const Network& net, const Vector& x0,
                                               ClassLabel y, double p,
                                               const AttackBudget& budget) {
  if (p < 0.0 || p > 1.0) throw ValidationError("confidence threshold must be in [0,1]");
  std::optional<AttackResult> best = best_wrong_attack(net, x0, y, budget);
  if (best && best->achieved_confidence >= p) return best;
  return std::nullopt;
}

double kappa_hat(const Network& net, const Vector& x0, ClassLabel y,
                 const LossKind& kind, const AttackBudget& budget) {
  return pgd_maximize_loss(net, x0, y, kind, budget).objective;
}

}  // namespace confsep
