#pragma once

#include <string>

#include "confsep/network.hpp"
#include "confsep/types.hpp"

namespace confsep {

/// Loss family: every member is monotonically decreasing in the true-class
/// probability. cw_margin works on logits and carries no usable lower-bound
/// function under the probability parametrization (see tau_informative).
enum class LossFamily { cross_entropy, squared, entropy_regularized, cw_margin };

struct LossKind {
  LossFamily family = LossFamily::cross_entropy;
  /// entropy_regularized: nonnegative regularizer weight.
  double weight = 0.0;
  /// cw_margin: nonnegative clamp kappa.
  double kappa = 0.0;

  static LossKind cross_entropy() { return {LossFamily::cross_entropy, 0.0, 0.0}; }
  static LossKind squared() { return {LossFamily::squared, 0.0, 0.0}; }
  static LossKind entropy_regularized(double weight) {
    if (weight < 0.0) throw ValidationError("entropy regularizer weight must be >= 0");
    return {LossFamily::entropy_regularized, weight, 0.0};
  }
  static LossKind cw_margin(double kappa) {
    if (kappa < 0.0) throw ValidationError("cw margin kappa must be >= 0");
    return {LossFamily::cw_margin, 0.0, kappa};
  }

  void validate() const {
    if (weight < 0.0) throw ValidationError("entropy regularizer weight must be >= 0");
    if (kappa < 0.0) throw ValidationError("cw margin kappa must be >= 0");
  }
};

/// Config-file grammar: cross_entropy | squared | entreg:<weight> | cw:<kappa>
LossKind parse_loss_kind(const std::string& text);
std::string format_loss_kind(const LossKind& kind);

/// Shannon entropy of a probability vector, with 0 log 0 = 0.
double shannon_entropy(const PredictionVector& probs);

/// Loss evaluated from precomputed logits/probs. Probabilities are clamped
/// at 1e-300 before any log so an exactly-zero softmax entry stays finite.
double loss_value(const LossKind& kind, const LogitsVector& logits,
                  const PredictionVector& probs, ClassLabel y);

/// Gradient of the loss with respect to the logits.
Vector loss_logit_grad(const LossKind& kind, const LogitsVector& logits,
                       const PredictionVector& probs, ClassLabel y);

double loss(const LossKind& kind, const Network& net, const Vector& x, ClassLabel y);

/// Exact gradient of the loss w.r.t. input and parameters. cw_margin uses
/// subgradient 0 inside its flat region.
GradientBundle loss_grad(const LossKind& kind, const Network& net, const Vector& x,
                         ClassLabel y);

/// Loss lower bound: if the true-class probability is at most q, the loss is
/// at least tau(kind, q). Monotonically non-increasing in q. For cw_margin
/// there is no usable bound and tau returns 0; check tau_informative first.
/// tau(cross_entropy, 0) is +infinity.
double tau(const LossKind& kind, double q);

/// False for cw_margin, whose tau is a trivial 0 and must not feed bound
/// computations.
bool tau_informative(const LossKind& kind);

}  // namespace confsep
