#include "ugp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "CLI11.hpp"

#include "ugp/error.hpp"
#include "ugp/io.hpp"
#include "ugp/scorers.hpp"
#include "ugp/stats.hpp"

namespace ugp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log(const std::string& message) { std::cerr << "[ugp] " << message << '\n'; }

void add_train_flags(CLI::App* cmd, TrainConfig& cfg, const std::string& prefix) {
  cmd->add_option("--" + prefix + "hidden", cfg.hidden_dim, "GCN hidden units")->capture_default_str();
  cmd->add_option("--" + prefix + "epochs", cfg.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--" + prefix + "lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--" + prefix + "weight-decay", cfg.weight_decay, "L2 on the first layer")->capture_default_str();
  cmd->add_option("--" + prefix + "dropout", cfg.dropout_rate, "hidden dropout rate")->capture_default_str();
  cmd->add_option("--" + prefix + "train-patience", cfg.patience, "early-stopping patience (epochs)")
      ->capture_default_str();
}

/// "t" alone picks the scorer's default threshold.
JudgeSpec resolve_judge(const std::string& text, ScorerKind scorer) {
  if (text != "t") return parse_judge(text);
  switch (scorer) {
    case ScorerKind::Jaccard: return JudgeSpec::threshold(kDefaultJaccardThreshold);
    case ScorerKind::Cosine: return JudgeSpec::threshold(kDefaultCosineThreshold);
    case ScorerKind::Kld: return JudgeSpec::threshold(kDefaultKldThreshold);
    default: break;
  }
  throw Error(ErrorCode::InvalidConfig, "no default threshold for scorer " + to_string(scorer) + "; use t:FLOAT");
}

TrainConfig train_from_json(const json& j, TrainConfig cfg) {
  try {
    if (j.contains("hidden_dim")) cfg.hidden_dim = j.at("hidden_dim").get<int>();
    if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
    if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("weight_decay")) cfg.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("dropout_rate")) cfg.dropout_rate = j.at("dropout_rate").get<double>();
    if (j.contains("patience")) cfg.patience = j.at("patience").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("train config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

PurifyVariant variant_from_json(const json& j, const TrainConfig& surrogate) {
  PurifyVariant v;
  try {
    const std::string scorer = j.value("scorer", std::string("none"));
    if (scorer == "none") return v;
    v.enabled = true;
    PurifyConfig& c = v.config;
    c.scorer = parse_scorer(scorer);
    c.judge = resolve_judge(j.value("judge", std::string("p:0.02")), c.scorer);
    c.filter = parse_filter(j.value("filter", std::string("s")));
    c.iterate = j.value("iterate", false);
    c.residual = j.value("residual", false);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.patience = j.value("patience", c.patience);
    c.min_edges_fraction = j.value("min_edges_fraction", c.min_edges_fraction);
    c.svd_rank = j.value("svd_rank", c.svd_rank);
    c.kld_feature_weight = j.value("kld_feature_weight", c.kld_feature_weight);
    c.surrogate = surrogate;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("purify entry: ") + e.what());
  }
  validate(v.config);
  return v;
}

struct Cell {
  std::size_t dataset;
  std::string attack;
  double rate;
  std::size_t variant;
  std::uint64_t seed;
};

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  }
  return s;
}

unsigned worker_count(std::size_t cells) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("UGP_THREADS")) {
    const int requested = std::atoi(env);
    if (requested > 0) n = static_cast<unsigned>(requested);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(cells, 1)));
}

// Runs one purification / attack / evaluation cell.
ResultRow run_cell(const RunManifest& m, const std::vector<Dataset>& datasets, const Cell& cell,
                   json* report_out) {
  Dataset d = datasets[cell.dataset];
  if (m.resplit) d.split = make_split(d.num_nodes(), 0.2, 0.1, cell.seed);

  ResultRow row;
  row.dataset = d.name;
  row.attack = cell.attack;
  row.rate = cell.rate;
  row.seed = cell.seed;
  row.phase = cell.attack == "none" ? "clean" : "poisoned";
  const PurifyVariant& variant = m.purify[cell.variant];
  row.scorer = variant.label();
  if (variant.enabled) {
    row.judge = to_string(variant.config.judge);
    row.filter = to_string(variant.config.filter);
    row.residual = variant.config.residual;
  }

  if (cell.attack != "none") {
    AttackSpec spec;
    spec.method = parse_attack(cell.attack);
    spec.rate = cell.rate;
    spec.seed = cell.seed;
    spec.dice_remove_fraction = m.dice_remove_fraction;
    spec.recompute_every = m.recompute_every;
    d = run_attack(d, spec, m.train).dataset;
  }
  if (variant.enabled) {
    PurifyResult purified = purify(d, variant.config, cell.seed);
    row.edges_deleted = static_cast<std::int64_t>(purified.report.all_deleted().size());
    if (report_out) *report_out = report_to_json(purified.report);
    d = std::move(purified.dataset);
  }
  TrainConfig final_cfg = m.train;
  final_cfg.seed = cell.seed;
  const GcnInputs inputs = prepare_inputs(d);
  const SurrogateModel model = train_surrogate(inputs, d, final_cfg);
  row.accuracy = accuracy(predict(model, inputs), d.labels, d.split.test);
  return row;
}

int cmd_experiment(const fs::path& manifest_path) {
  RunManifest m;
  try {
    m = load_manifest(manifest_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::vector<Dataset> datasets;
  for (const auto& dir : m.datasets) datasets.push_back(load_dataset(dir));

  std::vector<Cell> grid;
  for (std::size_t di = 0; di < datasets.size(); ++di) {
    for (const auto& attack : m.attacks) {
      const std::vector<double> rates = attack == "none" ? std::vector<double>{0.0} : m.rates;
      for (double rate : rates) {
        for (std::size_t vi = 0; vi < m.purify.size(); ++vi) {
          for (std::uint64_t seed : m.seeds) grid.push_back({di, attack, rate, vi, seed});
        }
      }
    }
  }

  fs::create_directories(m.output_dir / "reports");
  const fs::path results_path = m.output_dir / "results.csv";
  std::vector<ResultRow> existing = read_results(results_path);
  std::map<std::string, ResultRow> done;
  for (const auto& r : existing) done.emplace(r.key(), r);

  auto template_row = [&](const Cell& c) {
    ResultRow r;
    r.dataset = datasets[c.dataset].name;
    r.attack = c.attack;
    r.rate = c.rate;
    const PurifyVariant& v = m.purify[c.variant];
    r.scorer = v.label();
    if (v.enabled) {
      r.judge = to_string(v.config.judge);
      r.filter = to_string(v.config.filter);
      r.residual = v.config.residual;
    }
    r.seed = c.seed;
    r.phase = c.attack == "none" ? "clean" : "poisoned";
    return r;
  };

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!done.count(template_row(grid[i]).key())) pending.push_back(i);
  }
  log("experiment: " + std::to_string(grid.size()) + " cells, " + std::to_string(pending.size()) + " to run");

  // Incremental appends keep interrupted runs resumable.
  if (!fs::exists(results_path)) write_results({}, results_path);
  std::mutex writer;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  auto worker = [&] {
    while (!failed) {
      const std::size_t k = next++;
      if (k >= pending.size()) return;
      const Cell& cell = grid[pending[k]];
      try {
        json report;
        const ResultRow row = run_cell(m, datasets, cell, &report);
        std::lock_guard lock(writer);
        std::ofstream(results_path, std::ios::app | std::ios::binary) << format_row(row) << '\n';
        if (!report.is_null()) {
          const std::string name = sanitize(row.key()) + ".json";
          std::ofstream(m.output_dir / "reports" / name, std::ios::binary) << report.dump(2) << '\n';
        }
        done.emplace(row.key(), row);
        log("cell " + row.key() + " accuracy " + format_double(row.accuracy));
      } catch (const std::exception& e) {
        std::lock_guard lock(writer);
        failed = true;
        failure = e.what();
      }
    }
  };
  const unsigned workers = worker_count(pending.size());
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < workers; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failed) {
    std::cerr << "error: " << failure << '\n';
    return kExitFailure;
  }

  // Canonical order: grid rows first, then any foreign rows already on disk.
  std::vector<ResultRow> rows;
  std::set<std::string> in_grid;
  for (const Cell& c : grid) {
    const std::string key = template_row(c).key();
    rows.push_back(done.at(key));
    in_grid.insert(key);
  }
  for (const auto& r : existing) {
    if (!in_grid.count(r.key())) rows.push_back(r);
  }
  write_results(rows, results_path);
  log("wrote " + results_path.string());
  return kExitOk;
}

}  // namespace

std::string PurifyVariant::label() const {
  if (!enabled) return "none";
  const std::string base = to_string(config.scorer);
  if (!config.iterate) return base;
  return (config.residual ? "ri-" : "i-") + base;
}

RunManifest load_manifest(const fs::path& path) {
  json j;
  {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, path.string());
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  RunManifest m;
  try {
    for (const auto& d : j.at("datasets")) m.datasets.push_back(resolve(d.get<std::string>()));
    m.attacks = j.value("attacks", std::vector<std::string>{"none"});
    m.rates = j.value("rates", std::vector<double>{});
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.output_dir = resolve(j.at("output_dir").get<std::string>());
    m.resplit = j.value("resplit", true);
    m.recompute_every = j.value("recompute_every", m.recompute_every);
    m.dice_remove_fraction = j.value("dice_remove_fraction", m.dice_remove_fraction);
    if (j.contains("train")) m.train = train_from_json(j.at("train"), m.train);
    const TrainConfig surrogate = j.contains("surrogate") ? train_from_json(j.at("surrogate"), m.train) : m.train;
    if (j.contains("purify")) {
      for (const auto& p : j.at("purify")) m.purify.push_back(variant_from_json(p, surrogate));
    } else {
      m.purify.push_back(PurifyVariant{});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  for (const auto& a : m.attacks) {
    if (a != "none") {
      parse_attack(a);
      if (m.rates.empty()) throw Error(ErrorCode::InvalidConfig, "attack '" + a + "' needs a non-empty rates list");
    }
  }
  for (double r : m.rates) {
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidConfig, "rates must lie in (0, 1)");
  }
  if (m.datasets.empty() || m.attacks.empty() || m.seeds.empty() || m.purify.empty()) {
    throw Error(ErrorCode::InvalidConfig, "experiment grid is empty");
  }
  return m;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Unified graph purification: score, judge and filter graph edges"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  // purify
  std::string input, output, scorer_name, judge_text = "p:0.02", filter_text = "s";
  bool iterate = false, residual = false, timings = false;
  std::uint64_t seed = 0;
  PurifyConfig pcfg;
  auto* purify_cmd = app.add_subcommand("purify", "Purify a dataset's graph");
  purify_cmd->add_option("--input", input, "dataset directory")->required();
  purify_cmd->add_option("--output", output, "output dataset directory")->required();
  purify_cmd->add_option("--scorer", scorer_name, "jaccard|cosine|svd|entropy|kld")->required();
  purify_cmd->add_option("--judge", judge_text, "p:FLOAT (percentage) or t:FLOAT (threshold)")->capture_default_str();
  purify_cmd->add_option("--filter", filter_text, "s|c|none")->capture_default_str();
  purify_cmd->add_flag("--iterate", iterate, "iterate with a retrained surrogate");
  purify_cmd->add_flag("--residual", residual, "residual-iteration (requires --iterate)");
  purify_cmd->add_option("--max-iters", pcfg.max_iterations, "iteration cap")->capture_default_str();
  purify_cmd->add_option("--patience", pcfg.patience, "iterations without validation gain")->capture_default_str();
  purify_cmd->add_option("--min-edges-fraction", pcfg.min_edges_fraction, "edge floor")->capture_default_str();
  purify_cmd->add_option("--seed", seed, "seed")->capture_default_str();
  purify_cmd->add_option("--svd-rank", pcfg.svd_rank, "rank for the svd scorer")->capture_default_str();
  purify_cmd->add_option("--kld-feature-weight", pcfg.kld_feature_weight, "feature term weight for kld")
      ->capture_default_str();
  purify_cmd->add_flag("--timings", timings, "include wall times in report.json");
  add_train_flags(purify_cmd, pcfg.surrogate, "");

  // attack
  std::string method;
  AttackSpec aspec;
  TrainConfig attack_train;
  auto* attack_cmd = app.add_subcommand("attack", "Perturb a dataset's graph");
  attack_cmd->add_option("--input", input, "dataset directory")->required();
  attack_cmd->add_option("--output", output, "output dataset directory")->required();
  attack_cmd->add_option("--method", method, "dice|random|grad")->required();
  attack_cmd->add_option("--rate", aspec.rate, "perturbation rate")->required();
  attack_cmd->add_option("--seed", aspec.seed, "seed")->capture_default_str();
  attack_cmd->add_option("--remove-fraction", aspec.dice_remove_fraction, "dice deletion share")->capture_default_str();
  attack_cmd->add_option("--recompute-every", aspec.recompute_every, "grad: flips per gradient")->capture_default_str();
  add_train_flags(attack_cmd, attack_train, "");

  // eval
  std::vector<std::string> seed_texts;
  bool resplit = false;
  TrainConfig eval_train;
  ResultRow meta;
  std::string dataset_name;
  auto* eval_cmd = app.add_subcommand("eval", "Train the final GCN and record test accuracy");
  eval_cmd->add_option("--input", input, "dataset directory")->required();
  eval_cmd->add_option("--output", output, "results CSV (rows are appended)")->required();
  eval_cmd->add_option("--seeds", seed_texts, "one or more seeds")->delimiter(',')->expected(0, -1)->required();
  eval_cmd->add_flag("--resplit", resplit, "draw a fresh 20%/10% split per seed");
  eval_cmd->add_option("--dataset-name", dataset_name, "dataset column (default: name in meta.json)");
  eval_cmd->add_option("--attack", meta.attack, "attack column")->capture_default_str();
  eval_cmd->add_option("--rate", meta.rate, "rate column")->capture_default_str();
  eval_cmd->add_option("--scorer", meta.scorer, "scorer column")->capture_default_str();
  eval_cmd->add_option("--judge", meta.judge, "judge column")->capture_default_str();
  eval_cmd->add_option("--filter", meta.filter, "filter column")->capture_default_str();
  eval_cmd->add_flag("--residual", meta.residual, "residual column");
  eval_cmd->add_option("--phase", meta.phase, "clean|poisoned")->capture_default_str();
  eval_cmd->add_option("--edges-deleted", meta.edges_deleted, "edges_deleted column")->capture_default_str();
  add_train_flags(eval_cmd, eval_train, "");

  // experiment
  std::string manifest;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a resumable experiment grid");
  exp_cmd->add_option("manifest", manifest, "manifest JSON")->required();

  // scores
  std::string sidecar, summary;
  PurifyConfig scfg;
  auto* scores_cmd = app.add_subcommand("scores", "Write per-edge scores and group quartiles");
  scores_cmd->add_option("--input", input, "dataset directory")->required();
  scores_cmd->add_option("--output", output, "per-edge scores CSV")->required();
  scores_cmd->add_option("--scorer", scorer_name, "jaccard|cosine|svd|entropy|kld")->required();
  scores_cmd->add_option("--sidecar", sidecar, "perturbation sidecar (default: INPUT/perturbations.json if present)");
  scores_cmd->add_option("--summary", summary, "quartile summary JSON (default: OUTPUT with .summary.json)");
  scores_cmd->add_option("--seed", seed, "surrogate seed")->capture_default_str();
  scores_cmd->add_option("--svd-rank", scfg.svd_rank, "rank for the svd scorer")->capture_default_str();
  scores_cmd->add_option("--kld-feature-weight", scfg.kld_feature_weight, "feature term weight for kld")
      ->capture_default_str();
  add_train_flags(scores_cmd, scfg.surrogate, "");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*purify_cmd) {
      pcfg.scorer = parse_scorer(scorer_name);
      pcfg.judge = resolve_judge(judge_text, pcfg.scorer);
      pcfg.filter = parse_filter(filter_text);
      pcfg.iterate = iterate;
      pcfg.residual = residual;
      pcfg.surrogate.seed = seed;
      validate(pcfg);
      const Dataset d = load_dataset(input);
      log("purify " + d.name + ": " + std::to_string(d.graph.num_edges()) + " edges");
      const PurifyResult r = purify(d, pcfg, seed);
      save_dataset(r.dataset, output);
      std::ofstream(fs::path(output) / "report.json", std::ios::binary) << report_to_json(r.report, timings).dump(2) << '\n';
      log("deleted " + std::to_string(r.report.all_deleted().size()) + " edges, stop: " +
          to_string(r.report.stopping_reason));
      return kExitOk;
    }
    if (*attack_cmd) {
      aspec.method = parse_attack(method);
      const Dataset d = load_dataset(input);
      const std::int64_t budget = attack_budget(aspec, d.graph.num_edges());
      log(to_string(aspec.method) + " on " + d.name + ": " + std::to_string(budget) + " perturbations");
      const AttackResult r = run_attack(d, aspec, attack_train);
      save_dataset(r.dataset, output);
      save_sidecar({to_string(aspec.method), aspec.rate, aspec.seed, r.injected, r.removed},
                   fs::path(output) / kSidecarFile);
      return kExitOk;
    }
    if (*eval_cmd) {
      std::vector<std::uint64_t> seeds;
      for (const auto& text : seed_texts) {
        std::uint64_t s = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), s);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
          throw Error(ErrorCode::InvalidConfig, "bad seed '" + text + "'");
        }
        seeds.push_back(s);
      }
      if (seeds.empty()) throw Error(ErrorCode::InvalidConfig, "--seeds needs at least one seed");
      validate(eval_train);
      const Dataset base = load_dataset(input);
      std::vector<ResultRow> rows = read_results(output);
      std::vector<double> accs;
      for (std::uint64_t s : seeds) {
        Dataset d = base;
        if (resplit) d.split = make_split(d.num_nodes(), 0.2, 0.1, s);
        TrainConfig cfg = eval_train;
        cfg.seed = s;
        const GcnInputs inputs = prepare_inputs(d);
        const SurrogateModel model = train_surrogate(inputs, d, cfg);
        ResultRow row = meta;
        row.dataset = dataset_name.empty() ? d.name : dataset_name;
        row.seed = s;
        row.accuracy = accuracy(predict(model, inputs), d.labels, d.split.test);
        accs.push_back(row.accuracy);
        rows.push_back(row);
        log("seed " + std::to_string(s) + " test accuracy " + format_double(row.accuracy));
      }
      write_results(rows, output);
      std::cout << "mean_accuracy " << format_double(stats::mean(accs)) << " stderr "
                << format_double(stats::standard_error(accs)) << '\n';
      return kExitOk;
    }
    if (*exp_cmd) return cmd_experiment(manifest);
    if (*scores_cmd) {
      scfg.scorer = parse_scorer(scorer_name);
      const Dataset d = load_dataset(input);
      if (sidecar.empty() && fs::exists(fs::path(input) / kSidecarFile)) sidecar = (fs::path(input) / kSidecarFile).string();
      EdgeList injected;
      if (!sidecar.empty()) {
        injected = load_sidecar(sidecar).injected;
        std::sort(injected.begin(), injected.end());
      }
      DenseMatrix pred;
      double val_acc = 0.0;
      if (needs_predictions(scfg.scorer)) {
        scfg.surrogate.seed = seed;
        const GcnInputs inputs = prepare_inputs(d);
        const SurrogateModel model = train_surrogate(inputs, d, scfg.surrogate);
        pred = predict(model, inputs);
        val_acc = model.val_accuracy;
      }
      const EdgeScores s = score_edges(d, d.graph, d.graph, scfg, pred.size() ? &pred : nullptr, val_acc);
      std::vector<double> original, attacked;
      {
        std::ofstream out(output, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + output);
        out << "u,v,score,is_injected\n";
        for (std::size_t e = 0; e < s.edges.size(); ++e) {
          const bool is_injected = std::binary_search(injected.begin(), injected.end(), s.edges[e]);
          (is_injected ? attacked : original).push_back(s.scores[e]);
          out << s.edges[e].u << ',' << s.edges[e].v << ',' << format_double(s.scores[e]) << ','
              << (is_injected ? "true" : "false") << '\n';
        }
      }
      auto group = [](const std::vector<double>& xs) {
        json g = {{"count", xs.size()}};
        if (!xs.empty()) {
          const auto q = stats::quartiles(xs);
          g.update({{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max},
                    {"mean", stats::mean(xs)}});
        }
        return g;
      };
      json sum = {{"scorer", s.scorer}, {"original", group(original)}, {"injected", group(attacked)}};
      if (!original.empty() && !attacked.empty()) sum["rank_separation"] = stats::rank_separation(original, attacked);
      if (summary.empty()) summary = (fs::path(output).replace_extension(".summary.json")).string();
      std::ofstream(summary, std::ios::binary) << sum.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ugp::cli
