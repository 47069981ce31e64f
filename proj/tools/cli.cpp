// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "atkse/attack.hpp"
#include "atkse/baselines.hpp"
#include "atkse/bundle.hpp"
#include "atkse/errors.hpp"
#include "atkse/eval.hpp"
#include "atkse/perturbation.hpp"
#include "atkse/sbm.hpp"
#include "atkse/surrogate.hpp"

#ifndef ATKSE_VERSION
#define ATKSE_VERSION "0.0.0"
#endif

namespace atkse::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Raised for flag combinations CLI11 cannot validate on its own.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string tsv_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_manifest(const fs::path& dir, const std::string& command, const ordered_json& config,
                    const ordered_json& inputs, const ordered_json& outputs, std::uint64_t seed) {
  ordered_json m;
  m["command"] = command;
  m["config"] = config;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["seed"] = seed;
  m["version"] = ATKSE_VERSION;
  m["timestamp"] = utc_timestamp();
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

// Appends "--key value" for every key of the --config JSON object whose flag
// is not given explicitly, so explicit flags always win.
std::vector<std::string> merge_config_file(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file " + path + " must hold a JSON object");
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) merged.push_back(flag);
    } else if (value.is_string()) {
      merged.push_back(flag);
      merged.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      merged.push_back(flag);
      for (const auto& v : value) merged.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    } else {
      merged.push_back(flag);
      merged.push_back(value.dump());
    }
  }
  return merged;
}

struct TrainFlags {
  TrainConfig config;
  std::string activation;

  void add(CLI::App* app, const TrainConfig& defaults, const std::string& prefix = "") {
    config = defaults;
    activation = std::string(to_string(defaults.activation));
    app->add_option("--" + prefix + "hidden", config.hidden_dim, "GCN hidden units")->capture_default_str();
    app->add_option("--" + prefix + "activation", activation, "relu, tanh or identity")
        ->check(CLI::IsMember({"relu", "tanh", "identity"}))
        ->capture_default_str();
    app->add_option("--" + prefix + "epochs", config.epochs, "training epochs")->capture_default_str();
    app->add_option("--" + prefix + "lr", config.learning_rate, "learning rate")->capture_default_str();
    app->add_option("--" + prefix + "weight-decay", config.weight_decay, "L2 weight decay")->capture_default_str();
  }

  TrainConfig resolve() {
    config.activation = parse_activation(activation);
    return config;
  }
};

ordered_json train_json(const TrainConfig& c) {
  ordered_json j;
  j["hidden"] = c.hidden_dim;
  j["activation"] = std::string(to_string(c.activation));
  j["epochs"] = c.epochs;
  j["lr"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["weight_decay"] = c.weight_decay;
  j["init_scale"] = c.init_scale;
  return j;
}

// ---------------------------------------------------------------- gen-sbm

struct GenSbm {
  SbmConfig config;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen-sbm", "Generate a stochastic block model graph bundle");
    cmd->add_option("--nodes", config.num_nodes, "number of nodes")->capture_default_str();
    cmd->add_option("--classes", config.num_classes, "number of classes (blocks)")->capture_default_str();
    cmd->add_option("--p-in", config.p_in, "intra-block edge probability")->capture_default_str();
    cmd->add_option("--p-out", config.p_out, "inter-block edge probability")->capture_default_str();
    cmd->add_option("--features", config.num_features, "feature dimension")->capture_default_str();
    cmd->add_option("--shift", config.feature_shift, "class mean shift on its feature block")->capture_default_str();
    cmd->add_option("--train-fraction", config.train_fraction, "per-class train fraction")->capture_default_str();
    cmd->add_option("--seed", config.seed, "random seed")->capture_default_str();
    cmd->add_option("--out", out, "output bundle directory")->required();
    cmd->callback([this] { run(); });
  }

  void run() {
    const Graph g = generate_sbm(config);
    save_graph_bundle(g, out);
    ordered_json c;
    c["nodes"] = config.num_nodes;
    c["classes"] = config.num_classes;
    c["p_in"] = config.p_in;
    c["p_out"] = config.p_out;
    c["features"] = config.num_features;
    c["shift"] = config.feature_shift;
    c["train_fraction"] = config.train_fraction;
    write_manifest(out, "gen-sbm", c, ordered_json::object(), {{"bundle", out}}, config.seed);
  }
};

// ---------------------------------------------------------------- attack

struct Attack {
  std::string graph;
  std::string method = "atkse";
  std::string out;
  double budget_rate = 0.05;
  AttackConfig config;
  TrainFlags train;
  int threads = 1;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("attack", "Perturb a graph bundle with AtkSE or a baseline");
    cmd->add_option("--graph", graph, "input graph bundle")->required();
    cmd->add_option("--method", method, "atkse, random, dice or greedy")
        ->check(CLI::IsMember({"atkse", "random", "dice", "greedy"}))
        ->capture_default_str();
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("--budget-rate", budget_rate, "fraction of edges to flip")->capture_default_str();
    cmd->add_option("--lambda", config.lambda, "edge discrete sampling interval")->capture_default_str();
    cmd->add_option("--candidates", config.num_candidates, "candidate set size C")->capture_default_str();
    cmd->add_option("--batch", config.batch_size, "candidates sampled per batch")->capture_default_str();
    cmd->add_option("--momentum", config.momentum, "momentum coefficient p")->capture_default_str();
    cmd->add_option("--si-samples", config.si_samples, "semantic invariance samples n")->capture_default_str();
    cmd->add_option("--si-sigma", config.si_sigma, "feature noise standard deviation")->capture_default_str();
    cmd->add_option("--seed", config.seed, "random seed")->capture_default_str();
    cmd->add_option("--threads", threads, "worker cap")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--config", "JSON file of flag defaults");
    train.add(cmd, TrainConfig::surrogate_defaults());
    cmd->callback([this] { result = run(); });
  }

  int result = kSuccess;

  int run() {
    const Graph g = load_graph_bundle(graph);
    config.budget = edge_budget(g, budget_rate);
    const TrainConfig tc = train.resolve();
    if (method == "greedy") {
      config.lambda = 1.0;
      config.num_candidates = 1;
      config.batch_size = 1;
      config.momentum = 0.0;
      config.si_samples = 1;
      config.si_sigma = 0.0;
    }

    AttackResult res;
    if (method == "atkse" || method == "greedy") {
      config.validate();
      res = run_atkse(g, config, tc);
      res.log.method = method;
      res.log.config["train"] = train_json(tc);
    } else if (method == "random") {
      Rng rng = make_rng(config.seed, "baseline");
      res = random_attack(g, config.budget, rng);
      res.log.config["seed"] = config.seed;
    } else {
      TrainConfig label_config = tc;
      label_config.seed = config.seed;
      const std::vector<int> labels = attacker_labels(g, label_config);
      Rng rng = make_rng(config.seed, "baseline");
      res = dice_attack(g, config.budget, labels, rng);
      res.log.config["seed"] = config.seed;
      res.log.config["train"] = train_json(tc);
    }

    ensure_dir(out);
    save_graph_bundle(res.perturbed, out);
    write_jsonl(res.log, fs::path(out) / "log.jsonl");
    ordered_json c = res.log.config;
    c["method"] = method;
    c["threads"] = threads;
    write_manifest(out, "attack", c, {{"graph", graph}}, {{"bundle", out}, {"log", (fs::path(out) / "log.jsonl").string()}},
                   config.seed);
    if (!res.completed) {
      throw NumericalError("attack aborted with a partial log: " + res.abort_reason);
    }
    return kSuccess;
  }
};

// ---------------------------------------------------------------- eval

struct Eval {
  std::string clean;
  std::string perturbed;
  std::string out;
  std::string method;
  int trials = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  TrainFlags victim;
  std::ostream* stdout_ = nullptr;

  void add(CLI::App& app, std::ostream& os) {
    stdout_ = &os;
    auto* cmd = app.add_subcommand("eval", "Retrain the victim on clean and perturbed graphs");
    cmd->add_option("--clean", clean, "clean graph bundle")->required();
    cmd->add_option("--perturbed", perturbed, "perturbed graph bundle")->required();
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("--method", method, "method label (default: from the perturbed log)");
    cmd->add_option("--trials", trials, "victim retraining trials (>= 2)")->capture_default_str();
    cmd->add_option("--seed", seed, "first victim seed")->capture_default_str();
    cmd->add_option("--threads", threads, "parallel trials")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--config", "JSON file of flag defaults");
    victim.add(cmd, TrainConfig::victim_defaults());
    cmd->callback([this] { run(); });
  }

  void run() {
    if (trials < 2) throw UsageError("--trials must be at least 2 to report a standard deviation");
    const Graph g_clean = load_graph_bundle(clean);
    const Graph g_pert = load_graph_bundle(perturbed);
    if (g_clean.num_nodes() != g_pert.num_nodes()) {
      throw InfeasibleConfig("clean bundle has " + std::to_string(g_clean.num_nodes()) +
                             " nodes, perturbed has " + std::to_string(g_pert.num_nodes()));
    }
    double rate = 0.0;
    std::string label = method;
    const fs::path log_path = fs::path(perturbed) / "log.jsonl";
    if (fs::exists(log_path)) {
      std::ifstream in(log_path);
      std::stringstream buf;
      buf << in.rdbuf();
      const PerturbationLog log = parse_jsonl(buf.str());
      if (label.empty()) label = log.method;
      rate = log.config.value("budget_rate", 0.0);
    }
    if (label.empty()) label = "unknown";
    const TrainConfig vc = victim.resolve();
    const EvalReport report = run_trials(g_clean, g_pert, vc, trials, seed, label, rate, threads);
    ensure_dir(out);
    write_text(fs::path(out) / "report.json", report.to_json().dump(2) + "\n");
    write_text(fs::path(out) / "report.txt", report.to_table());
    *stdout_ << report.to_table();
    ordered_json c;
    c["trials"] = trials;
    c["method"] = label;
    c["threads"] = threads;
    c["victim"] = train_json(vc);
    write_manifest(out, "eval", c, {{"clean", clean}, {"perturbed", perturbed}},
                   {{"report_json", (fs::path(out) / "report.json").string()},
                    {"report_txt", (fs::path(out) / "report.txt").string()}},
                   seed);
  }
};

// ---------------------------------------------------------------- gradcheck

struct GradCheck {
  std::string graph;
  std::string out;
  int entries = 50;
  double h = 1e-4;
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
  int max_reseeds = 10;
  bool corrupt = false;
  TrainFlags train;
  std::ostream* stdout_ = nullptr;
  int result = kSuccess;

  void add(CLI::App& app, std::ostream& os) {
    stdout_ = &os;
    auto* cmd = app.add_subcommand("gradcheck", "Compare analytic adjacency gradients with central differences");
    cmd->add_option("--graph", graph, "graph bundle")->required();
    cmd->add_option("--entries", entries, "random off-diagonal entries to check")->capture_default_str();
    cmd->add_option("--fd-step", h, "central difference step")->capture_default_str();
    cmd->add_option("--tol", tolerance, "maximum relative error")->capture_default_str();
    cmd->add_option("--seed", seed, "training and sampling seed")->capture_default_str();
    cmd->add_option("--max-reseeds", max_reseeds, "retrain attempts when a ReLU kink is hit")->capture_default_str();
    cmd->add_option("--out", out, "optional directory for gradcheck.json and a manifest");
    cmd->add_option("--config", "JSON file of flag defaults");
    // Negative-control hook for tests: perturbs the analytic gradient.
    cmd->add_flag("--corrupt-gradient", corrupt)->group("");
    train.add(cmd, TrainConfig::surrogate_defaults());
    cmd->callback([this] { result = run(); });
  }

  int run() {
    if (entries < 1) throw UsageError("--entries must be at least 1");
    if (!(h > 0.0)) throw UsageError("--fd-step must be positive");
    const Graph g = load_graph_bundle(graph);
    const int n = g.num_nodes();
    if (n < 2) throw InfeasibleConfig("gradcheck needs at least two nodes");

    Rng rng = make_rng(seed, "gradcheck");
    std::uniform_int_distribution<NodeId> node(0, n - 1);
    std::vector<std::pair<NodeId, NodeId>> picked;
    while (static_cast<int>(picked.size()) < entries) {
      const NodeId u = node(rng);
      const NodeId v = node(rng);
      if (u != v) picked.emplace_back(u, v);
    }

    TrainConfig tc = train.resolve();
    SurrogateParams params;
    int reseeds = 0;
    for (;; ++reseeds) {
      tc.seed = seed + static_cast<std::uint64_t>(reseeds);
      params = train_surrogate(g, tc);
      const bool kink = std::any_of(picked.begin(), picked.end(), [&](const auto& e) {
        return crosses_activation_kink(params, g.adjacency, g.features, e.first, e.second, h);
      });
      if (!kink) break;
      if (reseeds >= max_reseeds) throw NumericalError("every reseed hit a ReLU kink");
    }

    Matrix analytic = adjacency_gradient(params, g.adjacency, g.features, g.labels, g.split.train);
    if (corrupt) analytic *= 1.01;
    const auto numeric =
        finite_diff_adjacency_gradient(params, g.adjacency, g.features, g.labels, g.split.train, h, picked);
    double max_rel = 0.0;
    for (std::size_t k = 0; k < picked.size(); ++k) {
      const double a = analytic(picked[k].first, picked[k].second);
      max_rel = std::max(max_rel, std::abs(a - numeric[k]) / std::max(std::abs(a), 1e-8));
    }
    const bool pass = max_rel < tolerance;
    *stdout_ << "entries " << entries << " activation " << to_string(tc.activation) << " seed " << tc.seed
             << " reseeds " << reseeds << "\nmax relative error " << tsv_real(max_rel) << " (tolerance "
             << tsv_real(tolerance) << ")\n"
             << (pass ? "PASS" : "FAIL") << "\n";
    if (!out.empty()) {
      ensure_dir(out);
      ordered_json r;
      r["entries"] = entries;
      r["max_relative_error"] = max_rel;
      r["tolerance"] = tolerance;
      r["pass"] = pass;
      r["train_seed"] = tc.seed;
      r["reseeds"] = reseeds;
      write_text(fs::path(out) / "gradcheck.json", r.dump(2) + "\n");
      ordered_json c;
      c["entries"] = entries;
      c["h"] = h;
      c["tol"] = tolerance;
      c["train"] = train_json(tc);
      write_manifest(out, "gradcheck", c, {{"graph", graph}},
                     {{"result", (fs::path(out) / "gradcheck.json").string()}}, seed);
    }
    return pass ? kSuccess : kFailure;
  }
};

// ---------------------------------------------------------------- trace

struct Trace {
  std::string graph;
  std::string kind = "edge-interval";
  std::string out;
  std::string params_path;
  NodeId u = -1;
  NodeId v = -1;
  double step = 0.01;
  int runs = 10;
  double sigma_max = 2e-3;
  int sigma_steps = 20;
  int samples = 1;
  std::uint64_t seed = 0;
  TrainFlags train;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("trace", "Write diagnostic gradient series as TSV");
    cmd->add_option("--graph", graph, "graph bundle")->required();
    cmd->add_option("--kind", kind, "edge-interval, retrain-hist or noise-sweep")
        ->check(CLI::IsMember({"edge-interval", "retrain-hist", "noise-sweep"}))
        ->capture_default_str();
    cmd->add_option("--u", u, "edge endpoint")->required();
    cmd->add_option("--v", v, "edge endpoint")->required();
    cmd->add_option("--out", out, "output directory for trace.tsv and a manifest")->required();
    cmd->add_option("--params", params_path, "surrogate checkpoint to use instead of training");
    cmd->add_option("--step", step, "edge-interval grid step")->capture_default_str();
    cmd->add_option("--runs", runs, "retrain-hist: number of retrained surrogates")->capture_default_str();
    cmd->add_option("--sigma-max", sigma_max, "noise-sweep: largest standard deviation")->capture_default_str();
    cmd->add_option("--sigma-steps", sigma_steps, "noise-sweep: number of increments")->capture_default_str();
    cmd->add_option("--samples", samples, "noise-sweep: noise draws averaged per point")->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--config", "JSON file of flag defaults");
    train.add(cmd, TrainConfig::surrogate_defaults());
    cmd->callback([this] { run(); });
  }

  SurrogateParams model(const Graph& g, const TrainConfig& tc) const {
    if (!params_path.empty()) return load_params(params_path);
    return train_surrogate(g, tc);
  }

  void run() {
    Graph g = load_graph_bundle(graph);
    const int n = g.num_nodes();
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) {
      throw UsageError("unknown edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    TrainConfig tc = train.resolve();
    tc.seed = seed;
    std::string tsv;
    if (kind == "edge-interval") {
      if (!(step > 0.0 && step <= 1.0)) throw UsageError("--step must lie in (0,1]");
      const SurrogateParams p = model(g, tc);
      const int points = static_cast<int>(std::llround(1.0 / step));
      tsv = "weight\tgradient\n";
      Matrix a = g.adjacency;
      for (int s = 0; s <= points; ++s) {
        const double w = std::min(1.0, s * step);
        a(u, v) = w;
        a(v, u) = w;
        const Matrix grad = structural_gradient(p, a, g.features, g.labels, g.split.train);
        tsv += tsv_real(w) + "\t" + tsv_real(grad(u, v)) + "\n";
      }
    } else if (kind == "retrain-hist") {
      if (runs < 1) throw UsageError("--runs must be at least 1");
      const EnsembleGradient ens = retrain_ensemble_gradient(g, tc, runs);
      tsv = "run\tseed\tgradient\n";
      for (int r = 0; r < runs; ++r) {
        tsv += std::to_string(r) + "\t" + std::to_string(seed + static_cast<std::uint64_t>(r)) + "\t" +
               tsv_real(ens.runs[static_cast<std::size_t>(r)](u, v)) + "\n";
      }
    } else {
      if (sigma_steps < 0 || !(sigma_max >= 0.0) || samples < 1) throw UsageError("invalid noise-sweep range");
      const SurrogateParams p = model(g, tc);
      tsv = "sigma\tgradient\n";
      for (int s = 0; s <= sigma_steps; ++s) {
        const double sigma = sigma_steps == 0 ? 0.0 : sigma_max * s / sigma_steps;
        Rng rng = make_rng(seed, "noise", static_cast<std::uint64_t>(s));
        const Matrix grad = semantic_invariant_gradient(p, g, sigma, samples, rng);
        tsv += tsv_real(sigma) + "\t" + tsv_real(grad(u, v)) + "\n";
      }
    }
    ensure_dir(out);
    write_text(fs::path(out) / "trace.tsv", tsv);
    ordered_json c;
    c["kind"] = kind;
    c["u"] = u;
    c["v"] = v;
    c["step"] = step;
    c["runs"] = runs;
    c["sigma_max"] = sigma_max;
    c["sigma_steps"] = sigma_steps;
    c["samples"] = samples;
    c["params"] = params_path;
    c["train"] = train_json(tc);
    write_manifest(out, "trace", c, {{"graph", graph}}, {{"trace", (fs::path(out) / "trace.tsv").string()}}, seed);
  }
};

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gray-box graph structure poisoning: AtkSE attack, baselines and evaluation", "atkse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ATKSE_VERSION);

  GenSbm gen;
  Attack attack;
  Eval eval;
  GradCheck gradcheck;
  Trace trace;
  gen.add(app);
  attack.add(app);
  eval.add(app, out);
  gradcheck.add(app, out);
  trace.add(app);

  try {
    std::vector<std::string> args = merge_config_file(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const InfeasibleConfig& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  if (app.got_subcommand("gradcheck")) return gradcheck.result;
  if (app.got_subcommand("attack")) return attack.result;
  return kSuccess;
}

}  // namespace atkse::cli
