#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ugp/dataset.hpp"
#include "ugp/gcn.hpp"
#include "ugp/judge_filter.hpp"
#include "ugp/scorers.hpp"

namespace ugp {

struct PurifyConfig {
  ScorerKind scorer{ScorerKind::Kld};
  JudgeSpec judge{JudgeSpec::percentage(0.02)};
  FilterSpec filter{FilterKind::Singleton};
  bool iterate{false};
  /// Score with the previous iteration's adjacency as neighborhood context.
  bool residual{false};
  int max_iterations{20};
  /// Stop once fewer than this fraction of the initial edges remain.
  double min_edges_fraction{0.5};
  /// Iterations without a new best surrogate validation accuracy.
  int patience{3};
  int svd_rank{kDefaultSvdRank};
  double kld_feature_weight{1.0};
  TrainConfig surrogate{};
};

/// Throws InvalidConfig (e.g. residual without iterate).
void validate(const PurifyConfig& cfg);

enum class StopReason { MaxIterations, Patience, EdgeFloor, NoCandidates };
std::string to_string(StopReason r);

struct IterationRecord {
  int iteration{0};
  EdgeList deleted;
  std::int64_t edges_after{0};
  /// Present when a surrogate was trained in this iteration.
  std::optional<double> val_accuracy;
  double wall_time_ms{0.0};
};

struct PurifyReport {
  std::int64_t initial_edges{0};
  std::vector<IterationRecord> iterations;
  StopReason stopping_reason{StopReason::MaxIterations};

  EdgeList all_deleted() const;
};

/// Iteration state: A_t, A_{t-1} and the history so far.
struct PurifyState {
  Graph current;
  Graph previous;
  std::int64_t initial_edges{0};
  std::vector<IterationRecord> records;
};

PurifyState initial_state(const Dataset& d);

/// Scores the edges of `g` for `d`'s features. `context` supplies entropy
/// neighborhoods; `pred` / `val_accuracy` are the surrogate outputs
/// (required by the entropy and KLD scorers).
EdgeScores score_edges(const Dataset& d, const Graph& g, const Graph& context, const PurifyConfig& cfg,
                       const DenseMatrix* pred, double val_accuracy);

/// One Scorer -> Judge -> Filter round: (re)train the surrogate on A_t when
/// the scorer needs it, score, select, veto, delete, record.
PurifyState iterate_step(const Dataset& d, PurifyState state, const PurifyConfig& cfg);

/// Checked after every step, in order: edge floor, iteration cap,
/// validation patience, empty deletion.
std::optional<StopReason> stopping_check(const PurifyState& state, const PurifyConfig& cfg);

struct PurifyResult {
  Dataset dataset;
  PurifyReport report;
};

/// Purified dataset (same nodes, subset of edges) plus report. `seed`
/// drives the surrogate.
PurifyResult purify(const Dataset& d, const PurifyConfig& cfg, std::uint64_t seed);

}  // namespace ugp
