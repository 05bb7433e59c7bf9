#include "ugp/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "ugp/error.hpp"

namespace ugp {

void validate(const PurifyConfig& cfg) {
  if (cfg.residual && !cfg.iterate) throw Error(ErrorCode::InvalidConfig, "residual requires iterate");
  if (cfg.max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max_iterations must be >= 1");
  if (cfg.patience < 1) throw Error(ErrorCode::InvalidConfig, "patience must be >= 1");
  if (!(cfg.min_edges_fraction >= 0.0 && cfg.min_edges_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "min_edges_fraction must lie in [0, 1]");
  }
  if (cfg.judge.kind == JudgeKind::Percentage && !(cfg.judge.p > 0.0 && cfg.judge.p <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "percentage must lie in (0, 1]");
  }
  if (cfg.svd_rank < 1) throw Error(ErrorCode::InvalidConfig, "svd rank must be >= 1");
  if (!(cfg.kld_feature_weight >= 0.0)) throw Error(ErrorCode::InvalidConfig, "kld feature weight must be >= 0");
  if (needs_predictions(cfg.scorer)) validate(cfg.surrogate);
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::Patience: return "patience";
    case StopReason::EdgeFloor: return "edge_floor";
    case StopReason::NoCandidates: return "no_candidates";
  }
  return "unknown";
}

EdgeList PurifyReport::all_deleted() const {
  EdgeList out;
  for (const auto& r : iterations) out.insert(out.end(), r.deleted.begin(), r.deleted.end());
  std::sort(out.begin(), out.end());
  return out;
}

PurifyState initial_state(const Dataset& d) {
  PurifyState s;
  s.current = d.graph;
  s.previous = d.graph;
  s.initial_edges = d.graph.num_edges();
  return s;
}

EdgeScores score_edges(const Dataset& d, const Graph& g, const Graph& context, const PurifyConfig& cfg,
                       const DenseMatrix* pred, double val_accuracy) {
  if (needs_predictions(cfg.scorer) && pred == nullptr) {
    throw Error(ErrorCode::InvalidConfig, to_string(cfg.scorer) + " scorer needs surrogate predictions");
  }
  switch (cfg.scorer) {
    case ScorerKind::Jaccard: return score_jaccard(g, d.features);
    case ScorerKind::Cosine: return score_cosine(g, d.features);
    case ScorerKind::Svd: return score_svd(g, std::min<int>(cfg.svd_rank, g.num_nodes()));
    case ScorerKind::Entropy: return score_entropy(g, context, d.features, *pred, val_accuracy);
    case ScorerKind::Kld: return score_kld(g, *pred, d.features, cfg.kld_feature_weight);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown scorer");
}

PurifyState iterate_step(const Dataset& d, PurifyState state, const PurifyConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  IterationRecord record;
  record.iteration = static_cast<int>(state.records.size());

  DenseMatrix pred;
  double val_acc = 0.0;
  if (needs_predictions(cfg.scorer)) {
    const Dataset current = with_graph(d, state.current);
    const GcnInputs inputs = prepare_inputs(current);
    const SurrogateModel model = train_surrogate(inputs, current, cfg.surrogate);
    pred = predict(model, inputs);
    val_acc = model.val_accuracy;
    if (!d.split.val.empty()) record.val_accuracy = val_acc;
  }

  const Graph& context = cfg.residual ? state.previous : state.current;
  const EdgeScores scores =
      score_edges(d, state.current, context, cfg, pred.size() ? &pred : nullptr, val_acc);
  JudgeFilterResult result = apply_judge_filter(state.current, scores, cfg.judge, cfg.filter);

  record.deleted = std::move(result.deleted);
  record.edges_after = result.graph.num_edges();
  record.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  state.previous = std::move(state.current);
  state.current = std::move(result.graph);
  state.records.push_back(std::move(record));
  return state;
}

std::optional<StopReason> stopping_check(const PurifyState& state, const PurifyConfig& cfg) {
  if (static_cast<double>(state.current.num_edges()) <
      cfg.min_edges_fraction * static_cast<double>(state.initial_edges)) {
    return StopReason::EdgeFloor;
  }
  if (static_cast<int>(state.records.size()) >= cfg.max_iterations) return StopReason::MaxIterations;

  int best_index = -1;
  double best = -1.0;
  int seen = 0;
  for (const auto& r : state.records) {
    if (!r.val_accuracy) continue;
    if (*r.val_accuracy > best) {
      best = *r.val_accuracy;
      best_index = seen;
    }
    ++seen;
  }
  if (best_index >= 0 && seen - 1 - best_index >= cfg.patience) return StopReason::Patience;

  if (!state.records.empty() && state.records.back().deleted.empty()) return StopReason::NoCandidates;
  return std::nullopt;
}

PurifyResult purify(const Dataset& d, const PurifyConfig& cfg, std::uint64_t seed) {
  PurifyConfig run = cfg;
  run.surrogate.seed = seed;
  validate(run);
  if (!run.iterate) run.max_iterations = 1;

  PurifyState state = initial_state(d);
  std::optional<StopReason> stop;
  while (!stop) {
    state = iterate_step(d, std::move(state), run);
    stop = stopping_check(state, run);
  }
  PurifyResult out;
  out.report.initial_edges = state.initial_edges;
  out.report.iterations = std::move(state.records);
  out.report.stopping_reason = *stop;
  out.dataset = with_graph(d, std::move(state.current));
  return out;
}

}  // namespace ugp
