#pragma once

#include <string>

#include "ugp/graph.hpp"
#include "ugp/scorers.hpp"

namespace ugp {

enum class JudgeKind { Percentage, Threshold };

struct JudgeSpec {
  JudgeKind kind{JudgeKind::Percentage};
  /// Fraction of the current edges to select (percentage judge), in (0, 1].
  double p{0.02};
  /// Edges scoring at or below tau are selected (threshold judge).
  double tau{0.0};

  static JudgeSpec percentage(double p) { return {JudgeKind::Percentage, p, 0.0}; }
  static JudgeSpec threshold(double tau) { return {JudgeKind::Threshold, 0.0, tau}; }
};

enum class FilterKind { None, Singleton, Connectivity };

struct FilterSpec {
  FilterKind kind{FilterKind::None};
};

/// "p:0.05" or "t:-2.3". Throws InvalidConfig.
JudgeSpec parse_judge(const std::string& text);
std::string to_string(const JudgeSpec& j);
/// "s", "c" or "none". Throws InvalidConfig.
FilterSpec parse_filter(const std::string& text);
std::string to_string(FilterSpec f);

/// Edges in ascending (score, canonical index) order.
EdgeList rank_ascending(const EdgeScores& scores);

/// The floor(p * K) lowest-scoring edges, lowest first.
EdgeList judge_percentage(const EdgeScores& scores, double p);

/// All edges with score <= tau, lowest first.
EdgeList judge_threshold(const EdgeScores& scores, double tau);

EdgeList apply_judge(const EdgeScores& scores, const JudgeSpec& j);

/// Accepts candidates in the given order while both endpoints still have
/// degree >= 2 after the deletions accepted so far.
EdgeList filter_singleton(const Graph& g, const EdgeList& candidates);

/// Weights non-candidates 1 and candidates 1 + minmax(score), takes a
/// per-component MST and returns the candidates outside it. The component
/// partition of g survives the deletion.
EdgeList filter_connectivity(const Graph& g, const EdgeList& candidates, const EdgeScores& scores);

EdgeList apply_filter(const Graph& g, const EdgeList& candidates, const EdgeScores& scores,
                      FilterSpec f);

struct JudgeFilterResult {
  Graph graph;
  EdgeList deleted;
};

JudgeFilterResult apply_judge_filter(const Graph& g, const EdgeScores& scores, const JudgeSpec& j,
                                     FilterSpec f);

}  // namespace ugp
