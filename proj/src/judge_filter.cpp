#include "ugp/judge_filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ugp/error.hpp"

namespace ugp {

namespace {

double parse_number(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidConfig, "bad number '" + text + "' in " + context);
  }
  return value;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

void check_aligned(const EdgeScores& scores) {
  if (scores.edges.size() != scores.scores.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scores not aligned with edges");
  }
}

}  // namespace

JudgeSpec parse_judge(const std::string& text) {
  if (text.size() < 3 || text[1] != ':' || (text[0] != 'p' && text[0] != 't')) {
    throw Error(ErrorCode::InvalidConfig, "judge must be p:FLOAT or t:FLOAT, got '" + text + "'");
  }
  const double value = parse_number(text.substr(2), "judge");
  if (text[0] == 'p') {
    if (!(value > 0.0 && value <= 1.0)) throw Error(ErrorCode::InvalidConfig, "percentage must lie in (0, 1]");
    return JudgeSpec::percentage(value);
  }
  return JudgeSpec::threshold(value);
}

std::string to_string(const JudgeSpec& j) {
  return j.kind == JudgeKind::Percentage ? "p:" + format_number(j.p) : "t:" + format_number(j.tau);
}

FilterSpec parse_filter(const std::string& text) {
  if (text == "s") return {FilterKind::Singleton};
  if (text == "c") return {FilterKind::Connectivity};
  if (text == "none") return {FilterKind::None};
  throw Error(ErrorCode::InvalidConfig, "filter must be s, c or none, got '" + text + "'");
}

std::string to_string(FilterSpec f) {
  switch (f.kind) {
    case FilterKind::Singleton: return "s";
    case FilterKind::Connectivity: return "c";
    case FilterKind::None: return "none";
  }
  return "none";
}

namespace {

std::vector<std::size_t> ascending_order(const EdgeScores& scores) {
  check_aligned(scores);
  std::vector<std::size_t> order(scores.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores.scores[a] < scores.scores[b]; });
  return order;
}

}  // namespace

EdgeList rank_ascending(const EdgeScores& scores) {
  EdgeList out;
  for (std::size_t i : ascending_order(scores)) out.push_back(scores.edges[i]);
  return out;
}

EdgeList judge_percentage(const EdgeScores& scores, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidConfig, "percentage must lie in (0, 1]");
  const auto order = ascending_order(scores);
  const auto count = static_cast<std::size_t>(std::floor(p * static_cast<double>(order.size())));
  EdgeList out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(scores.edges[order[i]]);
  return out;
}

EdgeList judge_threshold(const EdgeScores& scores, double tau) {
  EdgeList out;
  for (std::size_t i : ascending_order(scores)) {
    if (scores.scores[i] <= tau) out.push_back(scores.edges[i]);
  }
  return out;
}

EdgeList apply_judge(const EdgeScores& scores, const JudgeSpec& j) {
  return j.kind == JudgeKind::Percentage ? judge_percentage(scores, j.p) : judge_threshold(scores, j.tau);
}

EdgeList filter_singleton(const Graph& g, const EdgeList& candidates) {
  std::vector<std::int64_t> degree(static_cast<std::size_t>(g.num_nodes()));
  for (NodeId u = 0; u < g.num_nodes(); ++u) degree[u] = g.degree(u);
  EdgeList accepted;
  for (const Edge& e : candidates) {
    if (!g.has_edge(e.u, e.v)) throw Error(ErrorCode::MissingEdge, "candidate not in graph");
    if (degree[e.u] >= 2 && degree[e.v] >= 2) {
      --degree[e.u];
      --degree[e.v];
      accepted.push_back(e);
    }
  }
  return accepted;
}

EdgeList filter_connectivity(const Graph& g, const EdgeList& candidates, const EdgeScores& scores) {
  check_aligned(scores);
  std::vector<std::int64_t> candidate_ids;
  candidate_ids.reserve(candidates.size());
  std::vector<double> candidate_scores;
  for (const Edge& e : candidates) {
    auto id = g.edge_index(e.u, e.v);
    if (!id) throw Error(ErrorCode::MissingEdge, "candidate not in graph");
    candidate_ids.push_back(*id);
    // Scores may come from a different edge list; look the edge up by value.
    auto it = std::lower_bound(scores.edges.begin(), scores.edges.end(), Edge::canonical(e.u, e.v));
    if (it == scores.edges.end() || *it != Edge::canonical(e.u, e.v)) {
      throw Error(ErrorCode::MissingEdge, "candidate has no score");
    }
    candidate_scores.push_back(scores.scores[static_cast<std::size_t>(it - scores.edges.begin())]);
  }
  const std::vector<double> normalized = min_max_normalize(candidate_scores);

  WeightedGraph wg{g, std::vector<double>(static_cast<std::size_t>(g.num_edges()), 1.0)};
  for (std::size_t i = 0; i < candidate_ids.size(); ++i) {
    wg.weights[candidate_ids[i]] = 1.0 + normalized[i];
  }
  const EdgeList tree = minimum_spanning_forest(wg);

  EdgeList out;
  for (const Edge& e : candidates) {
    if (!std::binary_search(tree.begin(), tree.end(), Edge::canonical(e.u, e.v))) out.push_back(e);
  }
  return out;
}

EdgeList apply_filter(const Graph& g, const EdgeList& candidates, const EdgeScores& scores,
                      FilterSpec f) {
  switch (f.kind) {
    case FilterKind::Singleton: return filter_singleton(g, candidates);
    case FilterKind::Connectivity: return filter_connectivity(g, candidates, scores);
    case FilterKind::None: break;
  }
  return candidates;
}

JudgeFilterResult apply_judge_filter(const Graph& g, const EdgeScores& scores, const JudgeSpec& j,
                                     FilterSpec f) {
  if (scores.edges != g.edges()) {
    throw Error(ErrorCode::DimensionMismatch, "scores do not cover the graph's edges");
  }
  const EdgeList candidates = apply_judge(scores, j);
  JudgeFilterResult out;
  out.deleted = apply_filter(g, candidates, scores, f);
  out.graph = remove_edges(g, out.deleted);
  return out;
}

}  // namespace ugp
