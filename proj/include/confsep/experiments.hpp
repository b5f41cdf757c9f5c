#pragma once

#include <string>
#include <vector>

#include "confsep/attacks.hpp"
#include "confsep/config.hpp"
#include "confsep/dataset.hpp"
#include "confsep/defense.hpp"
#include "confsep/network.hpp"
#include "confsep/separation.hpp"

namespace confsep {

/// Bundled experiment settings, loadable from `section.key = value` config
/// files. Sections: experiment (dataset, models, out_dir, seed), attack
/// (norm, radius, iters, restarts, step), embed (xi, lambda, mode,
/// search_norm, dist_norm, iters), reject (thresholds), separation (p, q,
/// delta, metric).
struct ExperimentConfig {
  std::string dataset;                  // CSV path or generator spec
  std::vector<std::string> model_paths; // comma-separated under experiment.models
  AttackBudget attack_budget;
  EmbedConfig embed;
  std::vector<double> thresholds;
  SeparationSpec separation;
  std::string out_dir;
  std::uint64_t seed = 0;

  static ExperimentConfig from_entries(const std::vector<ConfigEntry>& entries);
  static ExperimentConfig from_file(const std::string& path);

  /// Referenced files must exist, radii must be nonnegative and thresholds
  /// must lie in (0,1).
  void validate() const;
};

struct RejectionReport {
  double eta = 0.0;
  double p0 = 0.0;
  double awpr_original = 0.0;       // |A| / |N|
  double awpr_with_rejection = 0.0; // surviving attacks / |N|
  double recall_natural = 0.0;      // accepted natural points / |N|
  long long n_natural = 0;          // |N|: correctly classified sample count
  long long n_adversarial = 0;      // |A|: samples with a successful attack
  long long rejected_adv = 0;
  long long rejected_nat = 0;
};

/// Builds N (correctly classified points), attacks each with
/// best_wrong_attack at radius eta (per-sample seeds mix_seed(budget.seed,
/// index)), then scores every threshold p0: a point is rejected iff its
/// confidence is < p0. Throws if no point is correctly classified.
std::vector<RejectionReport> rejection_experiment(const Network& net,
                                                  const Dataset& data, double eta,
                                                  const std::vector<double>& thresholds,
                                                  const AttackBudget& budget,
                                                  int threads = 1);

/// Outcome rows: rank of the true label when the per-label embedded points
/// are sorted by confidence (descending, ties to the lower label).
enum class TaxonomyRow : int {
  first_confident = 0,
  second_confident = 1,
  other_points = 2,
  missing = 3
};
enum class AttackOutcome : int { label_change = 0, confidence_reduction = 1 };

struct McnTaxonomy {
  long long counts[4][2] = {};
  long long n_points = 0;   // |N|
  long long attempted = 0;  // (|C|-1) * |N|

  long long& cell(TaxonomyRow row, AttackOutcome col) {
    return counts[static_cast<int>(row)][static_cast<int>(col)];
  }
  long long cell(TaxonomyRow row, AttackOutcome col) const {
    return counts[static_cast<int>(row)][static_cast<int>(col)];
  }
  long long row_total(TaxonomyRow row) const;
  long long col_total(AttackOutcome col) const;
  long long grand_total() const;
};

/// Table-4 protocol: for every correctly classified point and every wrong
/// target label, run targeted_confidence_attack at radius eta; the outcome
/// is label_change if the prediction moved off the true label, else
/// confidence_reduction. Then embed the attacked point once per label at
/// radius xi, sort the embedded points by confidence, and record where the
/// first correct prediction ranks. Seeds: mix_seed(budget.seed,
/// index * |C| + target).
McnTaxonomy mcn_experiment(const Network& net, const Dataset& data, double eta,
                           double xi, const EmbedConfig& cfg,
                           const AttackBudget& budget, int threads = 1);

struct EmbedSeparationAudit {
  long long n_points = 0;            // dataset points scanned
  long long n_good = 0;              // grid-certified (p,delta)-good points
  long long n_neighbors = 0;         // eta-grid neighbors of good points
  long long n_goodness_failures = 0; // neighbors without an MCN-goodness certificate
  long long n_violations = 0;        // neighbors where the defended model puts >= 1-p on a wrong label
  bool radii_compatible = false;     // eta + xi <= delta
  bool hypothesis_established = false;
  bool conclusion_holds = false;
};

/// Separation-improvement audit on a labeled sample (dimension <= 3): grid
/// certification of (p,delta)-goodness and of per-neighbor MCN-goodness
/// establishes the hypothesis; the conclusion scans the defended model
/// (mcn embedding at radius xi, then predict) over the same eta-grid
/// neighbors and counts wrong labels that reach confidence >= 1-p.
EmbedSeparationAudit audit_embedding_separation(const Network& net,
                                                const Dataset& data, double p,
                                                double delta, double eta, double xi,
                                                double grid_pitch,
                                                const EmbedConfig& cfg);

// Serialization: JSON lines for machines, fixed-layout text tables, and CSV
// for plotting. Formatting is value-deterministic, so regenerating from the
// same JSON lines reproduces tables byte for byte.
std::string rejection_to_jsonl(const std::vector<RejectionReport>& reports);
std::vector<RejectionReport> rejection_from_jsonl(const std::string& text);
std::string rejection_table(const std::vector<RejectionReport>& reports);
std::string rejection_csv(const std::vector<RejectionReport>& reports);

std::string taxonomy_to_json(const McnTaxonomy& tax);
McnTaxonomy taxonomy_from_json(const std::string& text);
std::string taxonomy_table(const McnTaxonomy& tax);
std::string taxonomy_csv(const McnTaxonomy& tax);

std::string estimate_to_json(const SeparationEstimate& est);
SeparationEstimate estimate_from_json(const std::string& text);
std::string separation_table(const SeparationEstimate& est);
std::string separation_csv(const SeparationEstimate& est);

/// Write the three renderings of a result into out_dir; returns the paths.
std::vector<std::string> emit_report(const std::vector<RejectionReport>& reports,
                                     const std::string& out_dir);
std::vector<std::string> emit_report(const McnTaxonomy& tax,
                                     const std::string& out_dir);
std::vector<std::string> emit_report(const SeparationEstimate& est,
                                     const std::string& out_dir);

}  // namespace confsep
