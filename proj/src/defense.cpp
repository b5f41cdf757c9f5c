#include "confsep/defense.hpp"

#include <cmath>
#include <sstream>

namespace confsep {

void ObjectiveMode::validate() const {
  if (kind == Kind::renyi) {
    if (!(alpha >= 0.0) || alpha == 1.0)
      throw ValidationError("renyi order must be >= 0 and != 1");
  }
}

ObjectiveMode parse_objective_mode(const std::string& text) {
  if (text == "max_prob") return ObjectiveMode::max_prob();
  if (text == "shannon") return ObjectiveMode::shannon();
  if (text.rfind("renyi:", 0) == 0) {
    double alpha = 0.0;
    try {
      std::size_t used = 0;
      alpha = std::stod(text.substr(6), &used);
      if (used != text.size() - 6) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw ValidationError("bad renyi order in '" + text + "'");
    }
    ObjectiveMode mode = ObjectiveMode::renyi(alpha);
    mode.validate();
    return mode;
  }
  throw ValidationError("unknown objective mode '" + text +
                        "' (expected max_prob | shannon | renyi:<alpha>)");
}

std::string format_objective_mode(const ObjectiveMode& mode) {
  switch (mode.kind) {
    case ObjectiveMode::Kind::max_prob:
      return "max_prob";
    case ObjectiveMode::Kind::shannon:
      return "shannon";
    case ObjectiveMode::Kind::renyi: {
      std::ostringstream out;
      out << "renyi:" << mode.alpha;
      return out.str();
    }
  }
  throw ValidationError("unknown objective mode");
}

EmbedConfig EmbedConfig::defaults(double xi, NormKind search_norm) {
  EmbedConfig cfg;
  cfg.xi = xi;
  cfg.search_norm = search_norm;
  cfg.solver_budget.norm = search_norm;
  cfg.solver_budget.radius = xi;
  cfg.solver_budget.iterations = 100;
  cfg.solver_budget.restarts = 1;
  return cfg;
}

void EmbedConfig::validate() const {
  if (!(xi > 0.0)) throw ValidationError("embed xi must be > 0");
  if (lambda < 0.0) throw ValidationError("embed lambda must be >= 0");
  solver_budget.validate();
  if (solver_budget.radius != xi)
    throw ValidationError("embed solver radius must equal xi");
  if (solver_budget.norm != search_norm)
    throw ValidationError("embed solver norm must equal search_norm");
  objective_mode.validate();
}

EmbedConfig EmbedConfig::with_xi(double new_xi) const {
  EmbedConfig cfg = *this;
  cfg.xi = new_xi;
  cfg.solver_budget.radius = new_xi;
  return cfg;
}

EmbedConfig EmbedConfig::with_lambda(double new_lambda) const {
  EmbedConfig cfg = *this;
  cfg.lambda = new_lambda;
  return cfg;
}

double entropy(const PredictionVector& probs, const ObjectiveMode& mode) {
  mode.validate();
  switch (mode.kind) {
    case ObjectiveMode::Kind::max_prob:
      throw ValidationError("entropy: mode must be shannon or renyi");
    case ObjectiveMode::Kind::shannon: {
      double h = 0.0;
      for (Eigen::Index i = 0; i < probs.size(); ++i)
        if (probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
      return h;
    }
    case ObjectiveMode::Kind::renyi: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < probs.size(); ++i)
        if (probs[i] > 0.0) s += std::pow(probs[i], mode.alpha);
      return std::log(s) / (1.0 - mode.alpha);
    }
  }
  throw ValidationError("unknown objective mode");
}

namespace {

// Subgradient of |z - x| in the given norm; 0 at z = x.
Vector distance_gradient(const Vector& z, const Vector& x, NormKind norm) {
  const Vector d = z - x;
  if (norm == NormKind::l2) {
    const double n = d.norm();
    if (n == 0.0) return Vector::Zero(d.size());
    return d / n;
  }
  Vector g = Vector::Zero(d.size());
  const int j = argmax_lowest(d.cwiseAbs());
  if (d[j] != 0.0) g[j] = d[j] > 0.0 ? 1.0 : -1.0;
  return g;
}

// Gradient of -Ent(F(z)) with respect to the logits.
Vector negated_entropy_upstream(const PredictionVector& p, const ObjectiveMode& mode) {
  Vector up(p.size());
  if (mode.kind == ObjectiveMode::Kind::shannon) {
    double ent = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) ent -= p[i] * std::log(p[i]);
    for (Eigen::Index j = 0; j < p.size(); ++j)
      up[j] = p[j] > 0.0 ? p[j] * (std::log(p[j]) + ent) : 0.0;
    return up;
  }
  const double alpha = mode.alpha;
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) s += std::pow(p[i], alpha);
  const double scale = alpha / (1.0 - alpha);
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double pa = p[j] > 0.0 ? std::pow(p[j], alpha) : 0.0;
    up[j] = scale * (p[j] - pa / s);
  }
  return up;
}

AttackBudget label_budget(const EmbedConfig& cfg, ClassLabel label) {
  AttackBudget b = cfg.solver_budget;
  b.seed = mix_seed(cfg.solver_budget.seed, static_cast<std::uint64_t>(label));
  return b;
}

}  // namespace

std::pair<FeatureVector, double> per_label_embed(const Network& net, const Vector& x,
                                                 ClassLabel label,
                                                 const EmbedConfig& cfg) {
  cfg.validate();
  if (label < 0 || label >= net.num_classes())
    throw ValidationError("embed label out of range");
  PointObjective objective{
      [&](const Vector& z) {
        const PredictionVector p = softmax(forward_logits(net, z));
        return p[label] - cfg.lambda * norm_of(z - x, cfg.dist_norm);
      },
      [&](const Vector& z) {
        const ForwardTrace trace = forward_trace(net, z);
        const PredictionVector p = softmax(trace.logits);
        const Vector upstream = p[label] * (Vector::Unit(p.size(), label) - p);
        Vector g = input_gradient_from_trace(net, trace, upstream);
        if (cfg.lambda > 0.0)
          g -= cfg.lambda * distance_gradient(z, x, cfg.dist_norm);
        return g;
      }};
  SearchOutcome out = pgd_maximize(x, objective, label_budget(cfg, label));
  return {std::move(out.point), out.objective};
}

EmbedResult hcnn(const Network& net, const Vector& x, const EmbedConfig& cfg) {
  cfg.validate();
  const int classes = net.num_classes();
  EmbedResult result;
  result.per_label_points.reserve(static_cast<std::size_t>(classes));

  if (cfg.objective_mode.kind == ObjectiveMode::Kind::max_prob) {
    for (ClassLabel l = 0; l < classes; ++l)
      result.per_label_points.push_back(per_label_embed(net, x, l, cfg));
    Vector objectives(classes);
    for (ClassLabel l = 0; l < classes; ++l)
      objectives[l] = result.per_label_points[static_cast<std::size_t>(l)].second;
    result.chosen_label = argmax_lowest(objectives);
    result.point =
        result.per_label_points[static_cast<std::size_t>(result.chosen_label)].first;
    result.search_objective = objectives[result.chosen_label];
    return result;
  }

  // Entropy modes run one search; the per-label record re-scores its single
  // point under each label so chosen_label stays the argmax of the records.
  PointObjective objective{
      [&](const Vector& z) {
        const PredictionVector p = softmax(forward_logits(net, z));
        return -entropy(p, cfg.objective_mode) -
               cfg.lambda * norm_of(z - x, cfg.dist_norm);
      },
      [&](const Vector& z) {
        const ForwardTrace trace = forward_trace(net, z);
        const PredictionVector p = softmax(trace.logits);
        Vector g = input_gradient_from_trace(
            net, trace, negated_entropy_upstream(p, cfg.objective_mode));
        if (cfg.lambda > 0.0)
          g -= cfg.lambda * distance_gradient(z, x, cfg.dist_norm);
        return g;
      }};
  SearchOutcome out = pgd_maximize(x, objective, cfg.solver_budget);
  const PredictionVector probs = softmax(forward_logits(net, out.point));
  const double penalty = cfg.lambda * norm_of(out.point - x, cfg.dist_norm);
  Vector objectives(classes);
  for (ClassLabel l = 0; l < classes; ++l) {
    objectives[l] = probs[l] - penalty;
    result.per_label_points.emplace_back(out.point, objectives[l]);
  }
  result.chosen_label = argmax_lowest(objectives);
  result.point = std::move(out.point);
  result.search_objective = out.objective;
  return result;
}

EmbedResult mcn(const Network& net, const Vector& x, const EmbedConfig& cfg) {
  return hcnn(net, x, cfg.with_lambda(0.0));
}

std::optional<FeatureVector> ncn(const Network& net, const Vector& x, double p,
                                 double max_radius, const EmbedConfig& cfg,
                                 int stages) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("ncn p must be in (0,1)");
  if (!(max_radius > 0.0)) throw ValidationError("ncn max_radius must be > 0");
  if (stages < 1) throw ValidationError("ncn stages must be >= 1");
  if (confidence(softmax(forward_logits(net, x))) >= p) return x;
  for (int k = 1; k <= stages; ++k) {
    const double r = max_radius * k / stages;
    const EmbedResult result = mcn(net, x, cfg.with_xi(r));
    if (confidence(softmax(forward_logits(net, result.point))) >= p)
      return result.point;
  }
  return std::nullopt;
}

std::pair<ClassLabel, PredictionVector> gamma(const Network& net, const Vector& x,
                                              const EmbedConfig& cfg,
                                              EmbedVariant variant) {
  const EmbedResult embedded =
      variant == EmbedVariant::mcn ? mcn(net, x, cfg) : hcnn(net, x, cfg);
  PredictionVector probs = softmax(forward_logits(net, embedded.point));
  const ClassLabel label = argmax_lowest(probs);
  return {label, std::move(probs)};
}

void RejectionConfig::validate() const {
  if (!(p0 > 0.0 && p0 < 1.0))
    throw ValidationError("rejection threshold p0 must be in (0,1)");
}

std::optional<ClassLabel> reject(const Network& net, const Vector& x,
                                 const RejectionConfig& cfg) {
  cfg.validate();
  const PredictionVector probs = softmax(forward_logits(net, x));
  if (confidence(probs) < cfg.p0) return std::nullopt;
  return argmax_lowest(probs);
}

bool check_mcn_goodness(const Network& net, const Vector& x, ClassLabel y, double p,
                        const EmbedConfig& cfg) {
  if (!(p > 0.0 && p <= 1.0))
    throw ValidationError("goodness threshold p must be in (0,1]");
  const auto [point, objective] = per_label_embed(net, x, y, cfg.with_lambda(0.0));
  (void)point;
  return objective >= p;
}

std::optional<std::string> ParameterBudgetTriple::warning() const {
  if (satisfied()) return std::nullopt;
  std::ostringstream out;
  out << "radius budget violated: delta (" << delta << ") < eta (" << eta
      << ") + xi (" << xi << "); downstream guarantees do not apply";
  return out.str();
}

}  // namespace confsep
