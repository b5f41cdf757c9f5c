// confsep: train models, run confidence attacks and embedding defenses, and
// estimate separation, from the command line. Subcommands write
// machine-readable JSON/JSONL plus table/CSV reports; everything is
// deterministic under --seed.

#include <cstdint>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "confsep/attacks.hpp"
#include "confsep/config.hpp"
#include "confsep/dataset.hpp"
#include "confsep/defense.hpp"
#include "confsep/experiments.hpp"
#include "confsep/model_io.hpp"
#include "confsep/network.hpp"
#include "confsep/parallel.hpp"
#include "confsep/separation.hpp"
#include "confsep/training.hpp"
#include "confsep/types.hpp"

namespace {

using confsep::AttackBudget;
using confsep::ClassLabel;
using confsep::Dataset;
using confsep::EmbedConfig;
using confsep::EmbedResult;
using confsep::Network;
using confsep::ValidationError;
using confsep::Vector;
using nlohmann::ordered_json;

std::vector<int> parse_arch(const std::string& text) {
  std::vector<int> arch;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      arch.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("bad layer size '" + item + "' in arch '" + text + "'");
    }
  }
  if (arch.size() < 2)
    throw ValidationError("arch needs at least input and output sizes: '" + text + "'");
  for (int v : arch)
    if (v <= 0) throw ValidationError("layer sizes must be positive: '" + text + "'");
  return arch;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("bad " + what + " value '" + item + "' in '" + text + "'");
    }
  }
  if (values.empty()) throw ValidationError(what + " list is empty");
  return values;
}

ordered_json vector_to_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const auto& e : arr) v[i++] = e.get<double>();
  return v;
}

// Config entries are merged onto the command line as `--key=value` tokens,
// skipping any flag already given explicitly. Precedence: command line, then
// the subcommand's section, then [global].
std::vector<std::string> inject_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return args;

  static const std::set<std::string> kSubcommands = {
      "train", "attack", "defend", "reject-eval", "mcn-eval", "separation", "report"};
  std::string sub;
  for (const auto& a : args) {
    if (kSubcommands.count(a)) {
      sub = a;
      break;
    }
  }

  std::set<std::string> present;
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    present.insert(eq == std::string::npos ? a : a.substr(0, eq));
  }

  const auto entries = confsep::parse_config_file(config_path);
  // Later file entries override earlier ones; the subcommand section beats
  // [global] regardless of file order.
  std::vector<std::pair<std::string, std::string>> flags;
  auto put = [&](const std::string& key, const std::string& value) {
    const std::string flag = "--" + key;
    for (auto& [f, v] : flags) {
      if (f == flag) {
        v = value;
        return;
      }
    }
    flags.emplace_back(flag, value);
  };
  for (const auto& e : entries)
    if (e.section == "global") put(e.key, e.value);
  for (const auto& e : entries)
    if (!sub.empty() && e.section == sub) put(e.key, e.value);

  for (const auto& [flag, value] : flags) {
    if (present.count(flag)) continue;
    args.push_back(flag + "=" + value);
  }
  return args;
}

struct TrainArgs {
  std::string data;
  std::string arch;
  std::string loss = "cross_entropy";
  std::string activation = "tanh";
  int epochs = 200;
  int batch = 32;
  double lr = 0.1;
  double adv_radius = 0.0;
  std::string adv_norm = "linf";
  int adv_iters = 10;
  int adv_restarts = 1;
  double adv_step = 0.0;
  std::string out;
  std::string log_path;
};

void run_train(const TrainArgs& a, std::uint64_t seed) {
  const Dataset data = confsep::load_dataset_spec(a.data, seed);
  const std::vector<int> arch = parse_arch(a.arch);

  confsep::TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.loss = confsep::parse_loss_kind(a.loss);
  cfg.activation = confsep::parse_activation(a.activation);
  cfg.seed = seed;
  if (a.adv_radius > 0.0) {
    AttackBudget b = confsep::training_inner_budget(confsep::parse_norm(a.adv_norm),
                                                    a.adv_radius, seed);
    b.iterations = a.adv_iters;
    b.restarts = a.adv_restarts;
    b.step_size = a.adv_step;
    b.box = data.box;
    cfg.inner = b;
  }

  std::ostringstream log;
  cfg.log = [&](const confsep::TrainLogEntry& e) {
    ordered_json j;
    j["epoch"] = e.epoch;
    j["clean_loss"] = e.clean_loss;
    j["adv_loss"] = e.adv_loss;
    j["clean_acc"] = e.clean_acc;
    log << j.dump() << '\n';
  };

  const Network net = confsep::train(data, arch, cfg);
  confsep::save_model(net, a.out);
  if (a.log_path.empty())
    std::cout << log.str();
  else
    confsep::write_text_file(a.log_path, log.str());
}

struct AttackArgs {
  std::string model;
  std::string data;
  std::string norm = "linf";
  double radius = 0.0;
  int iters = 100;
  int restarts = 10;
  double step = 0.0;
  std::string out;
};

void run_attack(const AttackArgs& a, std::uint64_t seed, int threads) {
  const Network net = confsep::load_model(a.model);
  const Dataset data = confsep::load_dataset_spec(a.data, seed);

  AttackBudget budget;
  budget.norm = confsep::parse_norm(a.norm);
  budget.radius = a.radius;
  budget.iterations = a.iters;
  budget.restarts = a.restarts;
  budget.step_size = a.step;
  budget.seed = seed;
  budget.box = data.box;
  budget.validate();

  const int n = data.size();
  std::vector<std::string> rows(static_cast<std::size_t>(n));
  confsep::parallel_for(n, threads, [&](int i) {
    const Vector& x = data.xs[static_cast<std::size_t>(i)];
    const ClassLabel y = data.ys[static_cast<std::size_t>(i)];
    const auto [label, probs] = confsep::predict(net, x);

    ordered_json j;
    j["index"] = i;
    if (label != y) {
      // Already misclassified: the clean point itself is the adversary's win.
      j["success"] = true;
      j["target"] = nullptr;
      j["confidence"] = confsep::confidence(probs);
      j["linf_dist"] = 0.0;
      j["point"] = vector_to_json(x);
    } else {
      AttackBudget b = budget;
      b.seed = confsep::mix_seed(budget.seed, static_cast<std::uint64_t>(i));
      const auto result = confsep::best_wrong_attack(net, x, y, b);
      if (result) {
        j["success"] = true;
        j["target"] = *result->target;
        j["confidence"] = result->achieved_confidence;
        j["linf_dist"] = confsep::norm_of(result->point - x, confsep::NormKind::linf);
        j["point"] = vector_to_json(result->point);
      } else {
        j["success"] = false;
        j["target"] = nullptr;
        j["confidence"] = confsep::confidence(probs);
        j["linf_dist"] = 0.0;
        j["point"] = vector_to_json(x);
      }
    }
    rows[static_cast<std::size_t>(i)] = j.dump();
  });

  std::string out;
  for (const auto& r : rows) {
    out += r;
    out += '\n';
  }
  confsep::write_text_file(a.out, out);
}

struct DefendArgs {
  std::string model;
  std::string data;
  double xi = 0.0;
  double lambda = 0.0;
  std::string mode = "max_prob";
  std::string search_norm = "linf";
  std::string dist_norm = "l2";
  int iters = 100;
  std::string out;
};

void run_defend(const DefendArgs& a, std::uint64_t seed, int threads) {
  const Network net = confsep::load_model(a.model);
  const std::string text = confsep::read_text_file(a.data);

  EmbedConfig cfg = EmbedConfig::defaults(a.xi, confsep::parse_norm(a.search_norm));
  cfg.lambda = a.lambda;
  cfg.dist_norm = confsep::parse_norm(a.dist_norm);
  cfg.objective_mode = confsep::parse_objective_mode(a.mode);
  cfg.solver_budget.iterations = a.iters;
  cfg.solver_budget.seed = seed;
  cfg.validate();

  std::vector<std::pair<int, Vector>> points;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      points.emplace_back(j.at("index").get<int>(), vector_from_json(j.at("point")));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(a.data + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::vector<std::string> rows(points.size());
  confsep::parallel_for(static_cast<int>(points.size()), threads, [&](int k) {
    const auto& [index, z] = points[static_cast<std::size_t>(k)];
    const auto [label_before, probs_before] = confsep::predict(net, z);
    const EmbedResult embedded = confsep::hcnn(net, z, cfg);
    const auto [label_after, probs_after] = confsep::predict(net, embedded.point);

    ordered_json j;
    j["index"] = index;
    j["label_before"] = label_before;
    j["label_after"] = label_after;
    j["conf_before"] = confsep::confidence(probs_before);
    j["conf_after"] = confsep::confidence(probs_after);
    j["chosen_label"] = embedded.chosen_label;
    j["dist"] = confsep::norm_of(embedded.point - z, cfg.dist_norm);
    rows[static_cast<std::size_t>(k)] = j.dump();
  });

  std::string out;
  for (const auto& r : rows) {
    out += r;
    out += '\n';
  }
  confsep::write_text_file(a.out, out);
}

struct RejectArgs {
  std::string model;
  std::string data;
  double eta = 0.0;
  std::string thresholds = "0.9,0.95,0.99";
  std::string norm = "linf";
  int iters = 100;
  int restarts = 10;
  double step = 0.0;
  std::string out_dir;
};

void run_reject(const RejectArgs& a, std::uint64_t seed, int threads) {
  const Network net = confsep::load_model(a.model);
  const Dataset data = confsep::load_dataset_spec(a.data, seed);

  AttackBudget budget;
  budget.norm = confsep::parse_norm(a.norm);
  budget.radius = a.eta;
  budget.iterations = a.iters;
  budget.restarts = a.restarts;
  budget.step_size = a.step;
  budget.seed = seed;
  budget.box = data.box;
  budget.validate();

  const auto thresholds = parse_double_list(a.thresholds, "threshold");
  const auto reports =
      confsep::rejection_experiment(net, data, a.eta, thresholds, budget, threads);
  for (const auto& path : confsep::emit_report(reports, a.out_dir))
    std::cout << path << '\n';
}

struct McnArgs {
  std::string model;
  std::string data;
  double eta = 0.0;
  double xi = 0.0;
  std::string mode = "max_prob";
  std::string search_norm = "linf";
  std::string dist_norm = "l2";
  std::string norm = "linf";
  int iters = 100;
  int restarts = 10;
  double step = 0.0;
  int embed_iters = 100;
  std::string out_dir;
};

void run_mcn(const McnArgs& a, std::uint64_t seed, int threads) {
  const Network net = confsep::load_model(a.model);
  const Dataset data = confsep::load_dataset_spec(a.data, seed);

  AttackBudget budget;
  budget.norm = confsep::parse_norm(a.norm);
  budget.radius = a.eta;
  budget.iterations = a.iters;
  budget.restarts = a.restarts;
  budget.step_size = a.step;
  budget.seed = seed;
  budget.box = data.box;
  budget.validate();

  EmbedConfig cfg = EmbedConfig::defaults(a.xi, confsep::parse_norm(a.search_norm));
  cfg.dist_norm = confsep::parse_norm(a.dist_norm);
  cfg.objective_mode = confsep::parse_objective_mode(a.mode);
  cfg.solver_budget.iterations = a.embed_iters;
  cfg.solver_budget.seed = seed;
  cfg.solver_budget.box = data.box;
  cfg.validate();

  const auto tax = confsep::mcn_experiment(net, data, a.eta, a.xi, cfg, budget, threads);
  for (const auto& path : confsep::emit_report(tax, a.out_dir))
    std::cout << path << '\n';
}

struct SeparationArgs {
  std::string model;
  std::string data;
  double p = 0.9;
  double delta = 0.0;
  double epsilon = 0.1;
  std::string norm = "linf";
  int iters = 100;
  int restarts = 10;
  double step = 0.0;
  std::string out;
};

void run_separation(const SeparationArgs& a, std::uint64_t seed, int threads) {
  const Network net = confsep::load_model(a.model);
  const Dataset data = confsep::load_dataset_spec(a.data, seed);

  AttackBudget budget;
  budget.norm = confsep::parse_norm(a.norm);
  budget.radius = a.delta;
  budget.iterations = a.iters;
  budget.restarts = a.restarts;
  budget.step_size = a.step;
  budget.seed = seed;
  budget.box = data.box;
  budget.validate();

  const auto bad =
      confsep::estimate_bad_event(net, data, a.p, a.delta, budget, threads);
  confsep::verify_witnesses(net, data, bad, a.p, a.delta, budget.norm);
  const auto est = confsep::chebyshev_interval(bad.estimate.successes,
                                               bad.estimate.t, a.epsilon);
  confsep::write_text_file(a.out, confsep::estimate_to_json(est));
}

struct ReportArgs {
  std::string kind;
  std::string in;
  std::string out_dir;
};

void run_report(const ReportArgs& a) {
  const std::string text = confsep::read_text_file(a.in);
  std::vector<std::string> paths;
  if (a.kind == "rejection")
    paths = confsep::emit_report(confsep::rejection_from_jsonl(text), a.out_dir);
  else if (a.kind == "mcn")
    paths = confsep::emit_report(confsep::taxonomy_from_json(text), a.out_dir);
  else
    paths = confsep::emit_report(confsep::estimate_from_json(text), a.out_dir);
  for (const auto& path : paths) std::cout << path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "confsep: adversarial training, confidence attacks and embedding "
      "defenses, and separation estimation for small dense classifiers"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int threads = 1;
  std::string config_path;
  app.add_option("--seed", seed, "base seed; all randomness derives from it")
      ->capture_default_str();
  app.add_option("--threads", threads, "worker threads for per-sample fan-out")
      ->capture_default_str();
  app.add_option("--config", config_path,
                 "config file with `section.key = value` lines; section is a "
                 "subcommand name or `global`, keys are long option names");

  TrainArgs train_args;
  auto* train_cmd =
      app.add_subcommand("train", "train a model (natural or min-max adversarial)");
  train_cmd->fallthrough();
  train_cmd->add_option("--data", train_args.data,
                        "CSV path or generator spec `name:n=..,noise=..`")
      ->required();
  train_cmd->add_option("--arch", train_args.arch, "layer sizes, e.g. 2,16,16,2")
      ->required();
  train_cmd->add_option("--loss", train_args.loss,
                        "cross_entropy | squared | entreg:<w> | cw:<kappa>")
      ->capture_default_str();
  train_cmd->add_option("--activation", train_args.activation, "tanh | relu")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_args.epochs, "training epochs")
      ->capture_default_str();
  train_cmd->add_option("--batch", train_args.batch, "minibatch size")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_args.lr, "learning rate")->capture_default_str();
  train_cmd->add_option("--adv-radius", train_args.adv_radius,
                        "inner maximization radius; 0 trains naturally")
      ->capture_default_str();
  train_cmd->add_option("--adv-norm", train_args.adv_norm, "inner ball norm")
      ->capture_default_str();
  train_cmd->add_option("--adv-iters", train_args.adv_iters, "inner PGD iterations")
      ->capture_default_str();
  train_cmd->add_option("--adv-restarts", train_args.adv_restarts, "inner PGD restarts")
      ->capture_default_str();
  train_cmd->add_option("--adv-step", train_args.adv_step,
                        "inner PGD step size; 0 means radius/4")
      ->capture_default_str();
  train_cmd->add_option("--out", train_args.out, "model output path")->required();
  train_cmd->add_option("--log", train_args.log_path,
                        "training log path (JSON lines); stdout when omitted");

  AttackArgs attack_args;
  auto* attack_cmd = app.add_subcommand(
      "attack", "best wrong-label confidence attack on every sample");
  attack_cmd->fallthrough();
  attack_cmd->add_option("--model", attack_args.model, "model path")->required();
  attack_cmd->add_option("--data", attack_args.data, "CSV path or generator spec")
      ->required();
  attack_cmd->add_option("--norm", attack_args.norm, "ball norm")->capture_default_str();
  attack_cmd->add_option("--radius", attack_args.radius, "attack radius")->required();
  attack_cmd->add_option("--iters", attack_args.iters, "PGD iterations")
      ->capture_default_str();
  attack_cmd->add_option("--restarts", attack_args.restarts, "PGD restarts")
      ->capture_default_str();
  attack_cmd->add_option("--step", attack_args.step, "PGD step size; 0 means radius/4")
      ->capture_default_str();
  attack_cmd->add_option("--out", attack_args.out, "output path (JSON lines)")
      ->required();

  DefendArgs defend_args;
  auto* defend_cmd = app.add_subcommand(
      "defend", "re-embed attacked points with the confidence defense");
  defend_cmd->fallthrough();
  defend_cmd->add_option("--model", defend_args.model, "model path")->required();
  defend_cmd->add_option("--data", defend_args.data,
                         "attack output (JSON lines with index and point)")
      ->required();
  defend_cmd->add_option("--xi", defend_args.xi, "embedding search radius")->required();
  defend_cmd->add_option("--lambda", defend_args.lambda, "distance penalty weight")
      ->capture_default_str();
  defend_cmd->add_option("--mode", defend_args.mode,
                         "confidence surrogate: max_prob | shannon | renyi:<alpha>")
      ->capture_default_str();
  defend_cmd->add_option("--search-norm", defend_args.search_norm, "search ball norm")
      ->capture_default_str();
  defend_cmd->add_option("--dist-norm", defend_args.dist_norm, "distance penalty norm")
      ->capture_default_str();
  defend_cmd->add_option("--iters", defend_args.iters, "embedding solver iterations")
      ->capture_default_str();
  defend_cmd->add_option("--out", defend_args.out, "output path (JSON lines)")
      ->required();

  RejectArgs reject_args;
  auto* reject_cmd = app.add_subcommand(
      "reject-eval", "attack success before/after confidence rejection");
  reject_cmd->fallthrough();
  reject_cmd->add_option("--model", reject_args.model, "model path")->required();
  reject_cmd->add_option("--data", reject_args.data, "CSV path or generator spec")
      ->required();
  reject_cmd->add_option("--eta", reject_args.eta, "attack radius")->required();
  reject_cmd->add_option("--thresholds", reject_args.thresholds,
                         "comma-separated rejection thresholds in (0,1)")
      ->capture_default_str();
  reject_cmd->add_option("--norm", reject_args.norm, "attack ball norm")
      ->capture_default_str();
  reject_cmd->add_option("--iters", reject_args.iters, "PGD iterations")
      ->capture_default_str();
  reject_cmd->add_option("--restarts", reject_args.restarts, "PGD restarts")
      ->capture_default_str();
  reject_cmd->add_option("--step", reject_args.step, "PGD step size; 0 means radius/4")
      ->capture_default_str();
  reject_cmd->add_option("--out-dir", reject_args.out_dir, "report directory")
      ->required();

  McnArgs mcn_args;
  auto* mcn_cmd = app.add_subcommand(
      "mcn-eval", "attack-then-embed taxonomy over every wrong target label");
  mcn_cmd->fallthrough();
  mcn_cmd->add_option("--model", mcn_args.model, "model path")->required();
  mcn_cmd->add_option("--data", mcn_args.data, "CSV path or generator spec")
      ->required();
  mcn_cmd->add_option("--eta", mcn_args.eta, "attack radius")->required();
  mcn_cmd->add_option("--xi", mcn_args.xi, "embedding search radius")->required();
  mcn_cmd->add_option("--mode", mcn_args.mode,
                      "confidence surrogate: max_prob | shannon | renyi:<alpha>")
      ->capture_default_str();
  mcn_cmd->add_option("--search-norm", mcn_args.search_norm, "search ball norm")
      ->capture_default_str();
  mcn_cmd->add_option("--dist-norm", mcn_args.dist_norm, "distance penalty norm")
      ->capture_default_str();
  mcn_cmd->add_option("--norm", mcn_args.norm, "attack ball norm")
      ->capture_default_str();
  mcn_cmd->add_option("--iters", mcn_args.iters, "attack PGD iterations")
      ->capture_default_str();
  mcn_cmd->add_option("--restarts", mcn_args.restarts, "attack PGD restarts")
      ->capture_default_str();
  mcn_cmd->add_option("--step", mcn_args.step, "attack PGD step size; 0 means radius/4")
      ->capture_default_str();
  mcn_cmd->add_option("--embed-iters", mcn_args.embed_iters,
                      "embedding solver iterations")
      ->capture_default_str();
  mcn_cmd->add_option("--out-dir", mcn_args.out_dir, "report directory")->required();

  SeparationArgs separation_args;
  auto* separation_cmd = app.add_subcommand(
      "separation", "estimate the confident-wrong-label event frequency");
  separation_cmd->fallthrough();
  separation_cmd->add_option("--model", separation_args.model, "model path")
      ->required();
  separation_cmd->add_option("--data", separation_args.data,
                             "CSV path or generator spec")
      ->required();
  separation_cmd->add_option("--p", separation_args.p, "confidence threshold")
      ->capture_default_str();
  separation_cmd->add_option("--delta", separation_args.delta, "neighborhood radius")
      ->required();
  separation_cmd->add_option("--epsilon", separation_args.epsilon,
                             "sampling-error half-width")
      ->capture_default_str();
  separation_cmd->add_option("--norm", separation_args.norm, "neighborhood norm")
      ->capture_default_str();
  separation_cmd->add_option("--iters", separation_args.iters, "PGD iterations")
      ->capture_default_str();
  separation_cmd->add_option("--restarts", separation_args.restarts, "PGD restarts")
      ->capture_default_str();
  separation_cmd->add_option("--step", separation_args.step,
                             "PGD step size; 0 means radius/4")
      ->capture_default_str();
  separation_cmd->add_option("--out", separation_args.out, "output path (JSON)")
      ->required();

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand(
      "report", "regenerate table and CSV renderings from a machine-readable result");
  report_cmd->fallthrough();
  report_cmd->add_option("--kind", report_args.kind, "rejection | mcn | separation")
      ->required()
      ->check(CLI::IsMember({"rejection", "mcn", "separation"}));
  report_cmd->add_option("--in", report_args.in, "result file (JSON or JSON lines)")
      ->required();
  report_cmd->add_option("--out-dir", report_args.out_dir, "report directory")
      ->required();

  try {
    auto args = inject_config(std::vector<std::string>(argv + 1, argv + argc));
    // CLI11 consumes reversed argument vectors.
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (threads < 1) throw ValidationError("--threads must be >= 1");
    if (*train_cmd) run_train(train_args, seed);
    if (*attack_cmd) run_attack(attack_args, seed, threads);
    if (*defend_cmd) run_defend(defend_args, seed, threads);
    if (*reject_cmd) run_reject(reject_args, seed, threads);
    if (*mcn_cmd) run_mcn(mcn_args, seed, threads);
    if (*separation_cmd) run_separation(separation_args, seed, threads);
    if (*report_cmd) run_report(report_args);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const confsep::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const confsep::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
