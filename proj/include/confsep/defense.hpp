#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "confsep/attacks.hpp"
#include "confsep/network.hpp"
#include "confsep/types.hpp"

namespace confsep {

/// Surrogate for the confidence term of the embedding objective. max_prob
/// searches per label; the entropy modes run a single search that descends
/// the entropy of the prediction (negated entropy as ascent objective).
struct ObjectiveMode {
  enum class Kind { max_prob, shannon, renyi };
  Kind kind = Kind::max_prob;
  double alpha = 2.0;  // renyi order, >= 0 and != 1

  static ObjectiveMode max_prob() { return {Kind::max_prob, 0.0}; }
  static ObjectiveMode shannon() { return {Kind::shannon, 0.0}; }
  static ObjectiveMode renyi(double alpha) { return {Kind::renyi, alpha}; }
  void validate() const;
};

/// Config-file grammar: max_prob | shannon | renyi:<alpha>
ObjectiveMode parse_objective_mode(const std::string& text);
std::string format_objective_mode(const ObjectiveMode& mode);

struct EmbedConfig {
  double xi = 0.0;                       // search radius, > 0
  double lambda = 0.0;                   // distance penalty weight, >= 0
  NormKind search_norm = NormKind::linf; // ball norm for the search
  NormKind dist_norm = NormKind::l2;     // norm inside the penalty term
  AttackBudget solver_budget;            // radius must equal xi
  ObjectiveMode objective_mode;

  /// Solver defaults: no random start (single restart), 100 iterations.
  static EmbedConfig defaults(double xi, NormKind search_norm = NormKind::linf);
  void validate() const;
  EmbedConfig with_xi(double new_xi) const;
  EmbedConfig with_lambda(double new_lambda) const;
};

struct EmbedResult {
  FeatureVector point;
  /// Per label l: the point found for l and its recorded objective
  /// F(z)_l - lambda * |z - x|.
  std::vector<std::pair<FeatureVector, double>> per_label_points;
  ClassLabel chosen_label = 0;
  /// Value of the search objective at `point` (equals the chosen recorded
  /// objective in max_prob mode; negated entropy minus penalty otherwise).
  double search_objective = 0.0;
};

/// PGD ascent of F(z)_label - lambda * |z - x| over the xi-ball around x.
/// The start z = x is always retained as a candidate, so the returned
/// objective is >= F(x)_label.
std::pair<FeatureVector, double> per_label_embed(const Network& net, const Vector& x,
                                                 ClassLabel label,
                                                 const EmbedConfig& cfg);

/// High-confidence nearby-point embedding: per-label searches (or a single
/// entropy-mode search), picking the label of largest recorded objective
/// (ties: lowest label).
EmbedResult hcnn(const Network& net, const Vector& x, const EmbedConfig& cfg);

/// Most-confident-neighbor embedding: hcnn with lambda forced to 0.
EmbedResult mcn(const Network& net, const Vector& x, const EmbedConfig& cfg);

/// Nearest confident neighbor: if x itself has confidence >= p it is
/// returned unchanged; otherwise mcn runs on the radius schedule
/// {max_radius/stages, ..., max_radius} (balls in cfg.search_norm) and the
/// first stage whose result reaches confidence >= p wins. nullopt if no
/// stage reaches p.
std::optional<FeatureVector> ncn(const Network& net, const Vector& x, double p,
                                 double max_radius, const EmbedConfig& cfg,
                                 int stages = 8);

/// Shannon or Renyi entropy of a probability vector. Renyi order alpha >= 0,
/// != 1; alpha = 0 counts the support. max_prob mode is rejected.
double entropy(const PredictionVector& probs, const ObjectiveMode& mode);

enum class EmbedVariant { hcnn, mcn };

/// End-to-end defended model: prediction of the base model at the embedded
/// point. The predicted label can disagree with the embedding's chosen
/// label; callers that care compare against EmbedResult::chosen_label.
std::pair<ClassLabel, PredictionVector> gamma(const Network& net, const Vector& x,
                                              const EmbedConfig& cfg,
                                              EmbedVariant variant);

struct RejectionConfig {
  double p0 = 0.9;  // in (0,1)
  void validate() const;
};

/// Confidence rejection rule: nullopt (bottom) iff confidence < p0, else the
/// predicted label.
std::optional<ClassLabel> reject(const Network& net, const Vector& x,
                                 const RejectionConfig& cfg);

/// One-sided certificate that some point in the xi-ball around x is
/// p-confident for the label y (per-label search with lambda = 0). true is a
/// certificate; false only means the search found nothing.
bool check_mcn_goodness(const Network& net, const Vector& x, ClassLabel y, double p,
                        const EmbedConfig& cfg);

/// Joint radius constraint delta >= eta + xi for the guarantee chain
/// (training radius, attack radius, search radius). Violations are reported
/// as a warning message, not an error: experiments may exceed it on purpose.
struct ParameterBudgetTriple {
  double delta = 0.0;
  double eta = 0.0;
  double xi = 0.0;

  bool satisfied() const { return delta >= eta + xi; }
  std::optional<std::string> warning() const;
};

}  // namespace confsep
