#include "confsep/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "confsep/model_io.hpp"
#include "confsep/parallel.hpp"

namespace confsep {

using json = nlohmann::ordered_json;

namespace {

#if defined(__GNUC__)
__attribute__((format(printf, 1, 2)))
#endif
std::string strfmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError("bad " + what + ": " + e.what());
  }
}

}  // namespace

std::vector<RejectionReport> rejection_experiment(const Network& net,
                                                  const Dataset& data, double eta,
                                                  const std::vector<double>& thresholds,
                                                  const AttackBudget& budget,
                                                  int threads) {
  data.validate();
  if (!(eta >= 0.0)) throw ValidationError("rejection_experiment: eta must be >= 0");
  for (double p0 : thresholds)
    if (!(p0 > 0.0 && p0 < 1.0))
      throw ValidationError("rejection_experiment: thresholds must be in (0,1)");

  std::vector<int> natural;
  for (int i = 0; i < data.size(); ++i)
    if (predict_label(net, data.xs[static_cast<std::size_t>(i)]) ==
        data.ys[static_cast<std::size_t>(i)])
      natural.push_back(i);
  if (natural.empty())
    throw ValidationError("rejection_experiment: no correctly classified points");

  const int n = static_cast<int>(natural.size());
  std::vector<double> clean_conf(static_cast<std::size_t>(n));
  std::vector<double> adv_conf(static_cast<std::size_t>(n),
                               -1.0);  // -1 marks "no successful attack"
  parallel_for(n, threads, [&](int k) {
    const int i = natural[static_cast<std::size_t>(k)];
    const Vector& x = data.xs[static_cast<std::size_t>(i)];
    clean_conf[static_cast<std::size_t>(k)] =
        confidence(softmax(forward_logits(net, x)));
    AttackBudget b = budget;
    b.radius = eta;
    b.seed = mix_seed(budget.seed, static_cast<std::uint64_t>(i));
    const auto best =
        best_wrong_attack(net, x, data.ys[static_cast<std::size_t>(i)], b);
    if (best) adv_conf[static_cast<std::size_t>(k)] = best->achieved_confidence;
  });

  long long found = 0;
  for (double c : adv_conf)
    if (c >= 0.0) ++found;

  std::vector<RejectionReport> reports;
  for (double p0 : thresholds) {
    RejectionReport r;
    r.eta = eta;
    r.p0 = p0;
    r.n_natural = n;
    r.n_adversarial = found;
    for (int k = 0; k < n; ++k) {
      if (adv_conf[static_cast<std::size_t>(k)] >= 0.0 &&
          adv_conf[static_cast<std::size_t>(k)] < p0)
        ++r.rejected_adv;
      if (clean_conf[static_cast<std::size_t>(k)] < p0) ++r.rejected_nat;
    }
    r.awpr_original = static_cast<double>(found) / n;
    r.awpr_with_rejection = static_cast<double>(found - r.rejected_adv) / n;
    r.recall_natural = static_cast<double>(n - r.rejected_nat) / n;
    reports.push_back(r);
  }
  return reports;
}

long long McnTaxonomy::row_total(TaxonomyRow row) const {
  return cell(row, AttackOutcome::label_change) +
         cell(row, AttackOutcome::confidence_reduction);
}

long long McnTaxonomy::col_total(AttackOutcome col) const {
  long long sum = 0;
  for (int r = 0; r < 4; ++r) sum += counts[r][static_cast<int>(col)];
  return sum;
}

long long McnTaxonomy::grand_total() const {
  return col_total(AttackOutcome::label_change) +
         col_total(AttackOutcome::confidence_reduction);
}

McnTaxonomy mcn_experiment(const Network& net, const Dataset& data, double eta,
                           double xi, const EmbedConfig& cfg,
                           const AttackBudget& budget, int threads) {
  data.validate();
  if (!(eta >= 0.0)) throw ValidationError("mcn_experiment: eta must be >= 0");
  const EmbedConfig embed_cfg = cfg.with_xi(xi);
  embed_cfg.validate();
  const int classes = net.num_classes();
  if (classes < 2) throw ValidationError("mcn_experiment: need >= 2 classes");

  std::vector<std::pair<int, ClassLabel>> tasks;
  for (int i = 0; i < data.size(); ++i) {
    if (predict_label(net, data.xs[static_cast<std::size_t>(i)]) !=
        data.ys[static_cast<std::size_t>(i)])
      continue;
    for (ClassLabel target = 0; target < classes; ++target)
      if (target != data.ys[static_cast<std::size_t>(i)])
        tasks.emplace_back(i, target);
  }
  if (tasks.empty())
    throw ValidationError("mcn_experiment: no correctly classified points");

  const int n_tasks = static_cast<int>(tasks.size());
  std::vector<std::pair<TaxonomyRow, AttackOutcome>> outcomes(
      static_cast<std::size_t>(n_tasks));
  parallel_for(n_tasks, threads, [&](int k) {
    const auto [i, target] = tasks[static_cast<std::size_t>(k)];
    const Vector& x = data.xs[static_cast<std::size_t>(i)];
    const ClassLabel y = data.ys[static_cast<std::size_t>(i)];

    AttackBudget b = budget;
    b.radius = eta;
    b.seed = mix_seed(budget.seed, static_cast<std::uint64_t>(i) *
                                           static_cast<std::uint64_t>(classes) +
                                       static_cast<std::uint64_t>(target));
    const AttackResult attack = targeted_confidence_attack(net, x, target, b);
    const AttackOutcome outcome = attack.achieved_label != y
                                      ? AttackOutcome::label_change
                                      : AttackOutcome::confidence_reduction;

    std::vector<double> conf(static_cast<std::size_t>(classes));
    std::vector<ClassLabel> pred(static_cast<std::size_t>(classes));
    for (ClassLabel l = 0; l < classes; ++l) {
      const auto [z, obj] = per_label_embed(net, attack.point, l, embed_cfg);
      (void)obj;
      const PredictionVector probs = softmax(forward_logits(net, z));
      conf[static_cast<std::size_t>(l)] = confidence(probs);
      pred[static_cast<std::size_t>(l)] = argmax_lowest(probs);
    }
    std::vector<int> order(static_cast<std::size_t>(classes));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int bx) {
      if (conf[static_cast<std::size_t>(a)] != conf[static_cast<std::size_t>(bx)])
        return conf[static_cast<std::size_t>(a)] > conf[static_cast<std::size_t>(bx)];
      return a < bx;
    });
    TaxonomyRow row = TaxonomyRow::missing;
    for (int pos = 0; pos < classes; ++pos) {
      if (pred[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] == y) {
        row = pos == 0   ? TaxonomyRow::first_confident
              : pos == 1 ? TaxonomyRow::second_confident
                         : TaxonomyRow::other_points;
        break;
      }
    }
    outcomes[static_cast<std::size_t>(k)] = {row, outcome};
  });

  McnTaxonomy tax;
  std::vector<bool> counted(static_cast<std::size_t>(data.size()), false);
  for (int k = 0; k < n_tasks; ++k) {
    const int i = tasks[static_cast<std::size_t>(k)].first;
    if (!counted[static_cast<std::size_t>(i)]) {
      counted[static_cast<std::size_t>(i)] = true;
      ++tax.n_points;
    }
    ++tax.cell(outcomes[static_cast<std::size_t>(k)].first,
               outcomes[static_cast<std::size_t>(k)].second);
  }
  tax.attempted = tax.n_points * (classes - 1);
  return tax;
}

EmbedSeparationAudit audit_embedding_separation(const Network& net,
                                                const Dataset& data, double p,
                                                double delta, double eta, double xi,
                                                double grid_pitch,
                                                const EmbedConfig& cfg) {
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError("audit: p must be in (0,1)");
  if (!(eta > 0.0 && xi > 0.0 && delta > 0.0))
    throw ValidationError("audit: radii must be positive");
  const EmbedConfig mcn_cfg = cfg.with_xi(xi).with_lambda(0.0);
  mcn_cfg.validate();

  SeparationSpec spec;
  spec.p = p;
  spec.delta = delta;
  spec.metric = mcn_cfg.search_norm;
  const std::vector<bool> good = certify_separation_sample(net, data, spec, grid_pitch);

  EmbedSeparationAudit audit;
  audit.n_points = data.size();
  audit.radii_compatible = eta + xi <= delta;
  for (int i = 0; i < data.size(); ++i) {
    if (!good[static_cast<std::size_t>(i)]) continue;
    ++audit.n_good;
    const Vector& x = data.xs[static_cast<std::size_t>(i)];
    const ClassLabel y = data.ys[static_cast<std::size_t>(i)];
    for (const Vector& z :
         grid_points(x, eta, grid_pitch, spec.metric, data.box)) {
      ++audit.n_neighbors;

      bool certified = false;
      for (const Vector& w :
           grid_points(z, xi, grid_pitch, spec.metric, data.box)) {
        if (softmax(forward_logits(net, w))[y] >= p) {
          certified = true;
          break;
        }
      }
      if (!certified) ++audit.n_goodness_failures;

      const auto [label, probs] = gamma(net, z, mcn_cfg, EmbedVariant::mcn);
      (void)label;
      for (Eigen::Index l = 0; l < probs.size(); ++l) {
        if (static_cast<ClassLabel>(l) != y && probs[l] >= 1.0 - p) {
          ++audit.n_violations;
          break;
        }
      }
    }
  }
  audit.hypothesis_established =
      audit.radii_compatible && audit.n_goodness_failures == 0;
  audit.conclusion_holds = audit.n_violations == 0;
  return audit;
}

std::string rejection_to_jsonl(const std::vector<RejectionReport>& reports) {
  std::ostringstream out;
  for (const RejectionReport& r : reports) {
    json j;
    j["eta"] = r.eta;
    j["p0"] = r.p0;
    j["awpr_original"] = r.awpr_original;
    j["awpr_with_rejection"] = r.awpr_with_rejection;
    j["recall_natural"] = r.recall_natural;
    j["n_natural"] = r.n_natural;
    j["n_adversarial"] = r.n_adversarial;
    j["rejected_adv"] = r.rejected_adv;
    j["rejected_nat"] = r.rejected_nat;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::vector<RejectionReport> rejection_from_jsonl(const std::string& text) {
  std::vector<RejectionReport> reports;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_json(line, "rejection record at line " + std::to_string(line_no));
    RejectionReport r;
    try {
      r.eta = j.at("eta").get<double>();
      r.p0 = j.at("p0").get<double>();
      r.awpr_original = j.at("awpr_original").get<double>();
      r.awpr_with_rejection = j.at("awpr_with_rejection").get<double>();
      r.recall_natural = j.at("recall_natural").get<double>();
      r.n_natural = j.at("n_natural").get<long long>();
      r.n_adversarial = j.at("n_adversarial").get<long long>();
      r.rejected_adv = j.at("rejected_adv").get<long long>();
      r.rejected_nat = j.at("rejected_nat").get<long long>();
    } catch (const std::exception& e) {
      throw ValidationError("rejection record at line " + std::to_string(line_no) +
                            ": " + e.what());
    }
    reports.push_back(r);
  }
  return reports;
}

std::string rejection_table(const std::vector<RejectionReport>& reports) {
  std::ostringstream out;
  out << strfmt("%-9s %-9s %-10s %-21s %s\n", "eta", "p0", "AWPR",
                "AWPR (w/ rejection)", "recall");
  for (const RejectionReport& r : reports) {
    out << strfmt("%-9s %-9s %-10s %-21s %s\n", strfmt("%.4f", r.eta).c_str(),
                  strfmt("%.4f", r.p0).c_str(),
                  strfmt("%.2f%%", 100.0 * r.awpr_original).c_str(),
                  strfmt("%.2f%%", 100.0 * r.awpr_with_rejection).c_str(),
                  strfmt("%.2f%%", 100.0 * r.recall_natural).c_str());
  }
  return out.str();
}

std::string rejection_csv(const std::vector<RejectionReport>& reports) {
  std::ostringstream out;
  out << "eta,p0,awpr_orig,awpr_rej,recall\n";
  for (const RejectionReport& r : reports) {
    out << strfmt("%.17g,%.17g,%.17g,%.17g,%.17g\n", r.eta, r.p0, r.awpr_original,
                  r.awpr_with_rejection, r.recall_natural);
  }
  return out.str();
}

namespace {

constexpr const char* kRowNames[4] = {"first_confident", "second_confident",
                                      "other_points", "missing"};
constexpr const char* kRowTitles[4] = {"first confident", "second confident",
                                       "other points", "missing"};

}  // namespace

std::string taxonomy_to_json(const McnTaxonomy& tax) {
  json cells;
  for (int r = 0; r < 4; ++r) {
    json row;
    row["label_change"] = tax.counts[r][0];
    row["confidence_reduction"] = tax.counts[r][1];
    cells[kRowNames[r]] = row;
  }
  json j;
  j["n_points"] = tax.n_points;
  j["attempted"] = tax.attempted;
  j["cells"] = cells;
  return j.dump() + "\n";
}

McnTaxonomy taxonomy_from_json(const std::string& text) {
  const json j = parse_json(text, "taxonomy record");
  McnTaxonomy tax;
  try {
    tax.n_points = j.at("n_points").get<long long>();
    tax.attempted = j.at("attempted").get<long long>();
    for (int r = 0; r < 4; ++r) {
      const json& row = j.at("cells").at(kRowNames[r]);
      tax.counts[r][0] = row.at("label_change").get<long long>();
      tax.counts[r][1] = row.at("confidence_reduction").get<long long>();
    }
  } catch (const std::exception& e) {
    throw ValidationError(std::string("taxonomy record: ") + e.what());
  }
  return tax;
}

std::string taxonomy_table(const McnTaxonomy& tax) {
  std::ostringstream out;
  out << strfmt("%-18s %-14s %-22s %s\n", "", "label change",
                "confidence reduction", "total");
  for (int r = 0; r < 4; ++r) {
    out << strfmt("%-18s %-14lld %-22lld %lld\n", kRowTitles[r], tax.counts[r][0],
                  tax.counts[r][1],
                  tax.row_total(static_cast<TaxonomyRow>(r)));
  }
  out << strfmt("%-18s %-14lld %-22lld %lld\n", "total",
                tax.col_total(AttackOutcome::label_change),
                tax.col_total(AttackOutcome::confidence_reduction),
                tax.grand_total());
  return out.str();
}

std::string taxonomy_csv(const McnTaxonomy& tax) {
  std::ostringstream out;
  out << "row,label_change,confidence_reduction,total\n";
  for (int r = 0; r < 4; ++r) {
    out << strfmt("%s,%lld,%lld,%lld\n", kRowNames[r], tax.counts[r][0],
                  tax.counts[r][1], tax.row_total(static_cast<TaxonomyRow>(r)));
  }
  out << strfmt("total,%lld,%lld,%lld\n",
                tax.col_total(AttackOutcome::label_change),
                tax.col_total(AttackOutcome::confidence_reduction),
                tax.grand_total());
  return out.str();
}

std::string estimate_to_json(const SeparationEstimate& est) {
  json j;
  j["successes"] = est.successes;
  j["t"] = est.t;
  j["mu_hat"] = est.mu_hat;
  j["epsilon"] = est.epsilon;
  j["alpha"] = est.alpha;
  j["upper"] = est.upper;
  j["lower"] = est.lower;
  return j.dump() + "\n";
}

SeparationEstimate estimate_from_json(const std::string& text) {
  const json j = parse_json(text, "separation record");
  SeparationEstimate est;
  try {
    est.successes = j.at("successes").get<long long>();
    est.t = j.at("t").get<long long>();
    est.mu_hat = j.at("mu_hat").get<double>();
    est.epsilon = j.at("epsilon").get<double>();
    est.alpha = j.at("alpha").get<double>();
    est.upper = j.at("upper").get<double>();
    est.lower = j.at("lower").get<double>();
  } catch (const std::exception& e) {
    throw ValidationError(std::string("separation record: ") + e.what());
  }
  return est;
}

std::string separation_table(const SeparationEstimate& est) {
  std::ostringstream out;
  out << strfmt("%-11s %-8s %-9s %-9s %-9s %s\n", "witnesses", "t", "mu_hat",
                "epsilon", "alpha", "interval");
  out << strfmt("%-11lld %-8lld %-9s %-9s %-9s [%s, %s]\n", est.successes, est.t,
                strfmt("%.4f", est.mu_hat).c_str(),
                strfmt("%.4f", est.epsilon).c_str(),
                strfmt("%.4f", est.alpha).c_str(),
                strfmt("%.4f", est.lower).c_str(),
                strfmt("%.4f", est.upper).c_str());
  return out.str();
}

std::string separation_csv(const SeparationEstimate& est) {
  std::ostringstream out;
  out << "successes,t,mu_hat,epsilon,alpha,lower,upper\n";
  out << strfmt("%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n", est.successes, est.t,
                est.mu_hat, est.epsilon, est.alpha, est.lower, est.upper);
  return out.str();
}

namespace {

std::vector<std::string> write_report_files(
    const std::string& out_dir,
    const std::vector<std::pair<std::string, std::string>>& files) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory '" + out_dir + "': " + ec.message());
  std::vector<std::string> paths;
  for (const auto& [name, content] : files) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    write_text_file(path, content);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace

std::vector<std::string> emit_report(const std::vector<RejectionReport>& reports,
                                     const std::string& out_dir) {
  return write_report_files(out_dir,
                            {{"rejection.jsonl", rejection_to_jsonl(reports)},
                             {"rejection_table.txt", rejection_table(reports)},
                             {"rejection_curve.csv", rejection_csv(reports)}});
}

std::vector<std::string> emit_report(const McnTaxonomy& tax,
                                     const std::string& out_dir) {
  return write_report_files(out_dir, {{"mcn.jsonl", taxonomy_to_json(tax)},
                                      {"mcn_table.txt", taxonomy_table(tax)},
                                      {"mcn_cells.csv", taxonomy_csv(tax)}});
}

std::vector<std::string> emit_report(const SeparationEstimate& est,
                                     const std::string& out_dir) {
  return write_report_files(out_dir,
                            {{"separation.json", estimate_to_json(est)},
                             {"separation_table.txt", separation_table(est)},
                             {"separation.csv", separation_csv(est)}});
}

namespace {

double entry_double(const ConfigEntry& e) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument(e.value);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(e.section + "." + e.key + ": bad number '" + e.value + "'");
  }
}

long long entry_int(const ConfigEntry& e) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument(e.value);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(e.section + "." + e.key + ": bad integer '" + e.value + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(item);
  return items;
}

/// A dataset reference is a file path unless it parses as a generator spec.
bool looks_like_generator_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return false;
  const std::string name = text.substr(0, colon);
  return name == "two_moons" || name == "gaussian_blobs" || name == "ring";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_entries(
    const std::vector<ConfigEntry>& entries) {
  ExperimentConfig cfg;
  double embed_xi = 0.0;
  // Later entries override earlier ones with the same section.key.
  for (const auto& e : entries) {
    const std::string where = e.section + "." + e.key;
    if (e.section == "experiment") {
      if (e.key == "dataset") cfg.dataset = e.value;
      else if (e.key == "models") cfg.model_paths = split_list(e.value);
      else if (e.key == "out_dir") cfg.out_dir = e.value;
      else if (e.key == "seed") cfg.seed = static_cast<std::uint64_t>(entry_int(e));
      else throw ValidationError("unknown config key " + where);
    } else if (e.section == "attack") {
      if (e.key == "norm") cfg.attack_budget.norm = parse_norm(e.value);
      else if (e.key == "radius") cfg.attack_budget.radius = entry_double(e);
      else if (e.key == "iters") cfg.attack_budget.iterations = static_cast<int>(entry_int(e));
      else if (e.key == "restarts") cfg.attack_budget.restarts = static_cast<int>(entry_int(e));
      else if (e.key == "step") cfg.attack_budget.step_size = entry_double(e);
      else throw ValidationError("unknown config key " + where);
    } else if (e.section == "embed") {
      if (e.key == "xi") embed_xi = entry_double(e);
      else if (e.key == "lambda") cfg.embed.lambda = entry_double(e);
      else if (e.key == "mode") cfg.embed.objective_mode = parse_objective_mode(e.value);
      else if (e.key == "search_norm") cfg.embed.search_norm = parse_norm(e.value);
      else if (e.key == "dist_norm") cfg.embed.dist_norm = parse_norm(e.value);
      else if (e.key == "iters") cfg.embed.solver_budget.iterations = static_cast<int>(entry_int(e));
      else throw ValidationError("unknown config key " + where);
    } else if (e.section == "reject") {
      if (e.key == "thresholds") {
        cfg.thresholds.clear();
        for (const auto& item : split_list(e.value)) {
          ConfigEntry v = e;
          v.value = item;
          cfg.thresholds.push_back(entry_double(v));
        }
      } else {
        throw ValidationError("unknown config key " + where);
      }
    } else if (e.section == "separation") {
      if (e.key == "p") cfg.separation.p = entry_double(e);
      else if (e.key == "q") cfg.separation.q = entry_double(e);
      else if (e.key == "delta") cfg.separation.delta = entry_double(e);
      else if (e.key == "metric") cfg.separation.metric = parse_norm(e.value);
      else throw ValidationError("unknown config key " + where);
    } else {
      throw ValidationError("unknown config section " + e.section);
    }
  }
  if (embed_xi > 0.0) {
    cfg.embed.xi = embed_xi;
    cfg.embed.solver_budget.radius = embed_xi;
    cfg.embed.solver_budget.norm = cfg.embed.search_norm;
  }
  cfg.attack_budget.seed = cfg.seed;
  cfg.embed.solver_budget.seed = cfg.seed;
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_entries(parse_config_file(path));
}

void ExperimentConfig::validate() const {
  if (!dataset.empty() && !looks_like_generator_spec(dataset) &&
      !std::filesystem::exists(dataset))
    throw ValidationError("dataset file does not exist: " + dataset);
  for (const auto& path : model_paths)
    if (!std::filesystem::exists(path))
      throw ValidationError("model file does not exist: " + path);
  if (!(attack_budget.radius >= 0.0))
    throw ValidationError("attack.radius must be >= 0");
  if (!(embed.xi >= 0.0)) throw ValidationError("embed.xi must be >= 0");
  if (!(separation.delta >= 0.0)) throw ValidationError("separation.delta must be >= 0");
  for (double p0 : thresholds)
    if (!(p0 > 0.0 && p0 < 1.0))
      throw ValidationError("reject.thresholds must be in (0,1)");
}

}  // namespace confsep
