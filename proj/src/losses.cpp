#include "confsep/losses.hpp"

#include <cmath>
#include <sstream>

namespace confsep {

namespace {

constexpr double kProbFloor = 1e-300;

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

void check_label(const PredictionVector& probs, ClassLabel y) {
  if (y < 0 || y >= probs.size()) {
    throw ValidationError("label " + std::to_string(y) + " out of range");
  }
}

// argmax over logits excluding the true label, ties to the lowest index.
int best_wrong_logit(const LogitsVector& logits, ClassLabel y) {
  int best = -1;
  for (int i = 0; i < logits.size(); ++i) {
    if (i == y) continue;
    if (best < 0 || logits[i] > logits[best]) best = i;
  }
  if (best < 0) throw ValidationError("cw margin needs at least two classes");
  return best;
}

}  // namespace

LossKind parse_loss_kind(const std::string& text) {
  if (text == "cross_entropy") return LossKind::cross_entropy();
  if (text == "squared") return LossKind::squared();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    const std::string arg = text.substr(colon + 1);
    try {
      size_t used = 0;
      const double v = std::stod(arg, &used);
      if (used != arg.size()) throw ValidationError("");
      if (head == "entreg") return LossKind::entropy_regularized(v);
      if (head == "cw") return LossKind::cw_margin(v);
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
  }
  throw ValidationError("unknown loss '" + text +
                        "' (expected cross_entropy | squared | entreg:<weight> | cw:<kappa>)");
}

std::string format_loss_kind(const LossKind& kind) {
  std::ostringstream out;
  switch (kind.family) {
    case LossFamily::cross_entropy: return "cross_entropy";
    case LossFamily::squared: return "squared";
    case LossFamily::entropy_regularized: out << "entreg:" << kind.weight; break;
    case LossFamily::cw_margin: out << "cw:" << kind.kappa; break;
  }
  return out.str();
}

double shannon_entropy(const PredictionVector& probs) {
  double ent = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) ent -= probs[i] * std::log(probs[i]);
  }
  return ent;
}

double loss_value(const LossKind& kind, const LogitsVector& logits,
                  const PredictionVector& probs, ClassLabel y) {
  check_label(probs, y);
  const double py = probs[y];
  switch (kind.family) {
    case LossFamily::cross_entropy:
      return -safe_log(py);
    case LossFamily::squared:
      return (1.0 - py) * (1.0 - py);
    case LossFamily::entropy_regularized:
      return -safe_log(py) + kind.weight * shannon_entropy(probs);
    case LossFamily::cw_margin: {
      const int i = best_wrong_logit(logits, y);
      return std::max(logits[i] - logits[y], -kind.kappa);
    }
  }
  throw ValidationError("unreachable loss family");
}

Vector loss_logit_grad(const LossKind& kind, const LogitsVector& logits,
                       const PredictionVector& probs, ClassLabel y) {
  check_label(probs, y);
  const int n = static_cast<int>(probs.size());
  const double py = probs[y];
  switch (kind.family) {
    case LossFamily::cross_entropy: {
      Vector g = probs;
      g[y] -= 1.0;
      return g;
    }
    case LossFamily::squared: {
      // dL/dpy = -2(1-py); dpy/dz_j = py (1{j=y} - p_j)
      Vector g = -2.0 * (1.0 - py) * py * (Vector::Unit(n, y) - probs);
      return g;
    }
    case LossFamily::entropy_regularized: {
      Vector g = probs;
      g[y] -= 1.0;
      // dEnt/dz_j = -p_j (log p_j + Ent(p))
      const double ent = shannon_entropy(probs);
      for (int j = 0; j < n; ++j) {
        g[j] += kind.weight * (-probs[j] * (safe_log(probs[j]) + ent));
      }
      return g;
    }
    case LossFamily::cw_margin: {
      Vector g = Vector::Zero(n);
      const int i = best_wrong_logit(logits, y);
      if (logits[i] - logits[y] > -kind.kappa) {
        g[i] = 1.0;
        g[y] = -1.0;
      }
      return g;
    }
  }
  throw ValidationError("unreachable loss family");
}

double loss(const LossKind& kind, const Network& net, const Vector& x, ClassLabel y) {
  const LogitsVector z = forward_logits(net, x);
  return loss_value(kind, z, softmax(z), y);
}

GradientBundle loss_grad(const LossKind& kind, const Network& net, const Vector& x,
                         ClassLabel y) {
  const ForwardTrace trace = forward_trace(net, x);
  const PredictionVector probs = softmax(trace.logits);
  return backward_from_trace(net, trace, loss_logit_grad(kind, trace.logits, probs, y));
}

double tau(const LossKind& kind, double q) {
  if (q < 0.0 || q > 1.0) throw ValidationError("tau requires q in [0,1]");
  switch (kind.family) {
    case LossFamily::cross_entropy:
    case LossFamily::entropy_regularized:
      // The regularizer is nonnegative, so the cross-entropy bound holds.
      return -std::log(q);
    case LossFamily::squared:
      return (1.0 - q) * (1.0 - q);
    case LossFamily::cw_margin:
      return 0.0;
  }
  throw ValidationError("unreachable loss family");
}

bool tau_informative(const LossKind& kind) {
  return kind.family != LossFamily::cw_margin;
}

}  // namespace confsep
