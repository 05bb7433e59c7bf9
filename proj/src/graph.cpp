#include "ugp/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <tuple>

#include "ugp/error.hpp"

namespace ugp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::MissingEdge: return "MissingEdge";
    case ErrorCode::NonBinaryFeatures: return "NonBinaryFeatures";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::ZeroProbability: return "ZeroProbability";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::BudgetInfeasible: return "BudgetInfeasible";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Graph Graph::build(NodeId num_nodes, std::span<const Edge> edges) {
  if (num_nodes < 0) throw Error(ErrorCode::IndexOutOfRange, "negative node count");
  EdgeList canon;
  canon.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= num_nodes || e.v >= num_nodes) {
      throw Error(ErrorCode::IndexOutOfRange, "edge (" + std::to_string(e.u) + ", " +
                                                  std::to_string(e.v) + ") with " +
                                                  std::to_string(num_nodes) + " nodes");
    }
    if (e.u == e.v) throw Error(ErrorCode::SelfLoop, "node " + std::to_string(e.u));
    canon.push_back(Edge::canonical(e.u, e.v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  Graph g;
  g.num_nodes_ = num_nodes;
  g.row_offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (const Edge& e : canon) {
    ++g.row_offsets_[e.u + 1];
    ++g.row_offsets_[e.v + 1];
  }
  for (NodeId u = 0; u < num_nodes; ++u) g.row_offsets_[u + 1] += g.row_offsets_[u];

  g.col_indices_.resize(2 * canon.size());
  g.slot_edge_ids_.resize(2 * canon.size());
  std::vector<std::int64_t> cursor(g.row_offsets_.begin(), g.row_offsets_.end() - 1);
  // Edges are sorted by (u, v), so filling both directions in this order leaves
  // every neighbor list sorted: lower neighbors arrive (as the v side) before
  // higher ones (as the u side).
  for (std::size_t k = 0; k < canon.size(); ++k) {
    const Edge& e = canon[k];
    g.col_indices_[cursor[e.v]] = e.u;
    g.slot_edge_ids_[cursor[e.v]++] = static_cast<std::int64_t>(k);
  }
  for (std::size_t k = 0; k < canon.size(); ++k) {
    const Edge& e = canon[k];
    g.col_indices_[cursor[e.u]] = e.v;
    g.slot_edge_ids_[cursor[e.u]++] = static_cast<std::int64_t>(k);
  }
  g.edges_ = std::move(canon);
  return g;
}

std::optional<std::int64_t> Graph::edge_index(NodeId u, NodeId v) const noexcept {
  if (u < 0 || v < 0 || u >= num_nodes_ || v >= num_nodes_ || u == v) return std::nullopt;
  auto nb = neighbors(u);
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return std::nullopt;
  return neighbor_edge_ids(u)[static_cast<std::size_t>(it - nb.begin())];
}

Components connected_components(const Graph& g) {
  Components out;
  out.component_of.assign(static_cast<std::size_t>(g.num_nodes()), -1);
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (out.component_of[s] >= 0) continue;
    const NodeId id = out.count++;
    out.component_of[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : g.neighbors(u)) {
        if (out.component_of[v] < 0) {
          out.component_of[v] = id;
          stack.push_back(v);
        }
      }
    }
  }
  return out;
}

namespace {

// Grows one tree from `root`, appending its edges to `out`.
void prim_from(const WeightedGraph& wg, NodeId root, std::vector<char>& in_tree, EdgeList& out) {
  const Graph& g = wg.graph;
  // (weight, edge index, target node); smallest first.
  using Item = std::tuple<double, std::int64_t, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;

  auto push_neighbors = [&](NodeId u) {
    auto nb = g.neighbors(u);
    auto ids = g.neighbor_edge_ids(u);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (!in_tree[nb[i]]) frontier.emplace(wg.weights[ids[i]], ids[i], nb[i]);
    }
  };

  in_tree[root] = 1;
  push_neighbors(root);
  while (!frontier.empty()) {
    auto [w, id, target] = frontier.top();
    frontier.pop();
    if (in_tree[target]) continue;
    in_tree[target] = 1;
    out.push_back(g.edges()[id]);
    push_neighbors(target);
  }
}

void check_weights(const WeightedGraph& wg) {
  if (wg.weights.size() != static_cast<std::size_t>(wg.graph.num_edges())) {
    throw Error(ErrorCode::DimensionMismatch, "weights not aligned with edges");
  }
}

}  // namespace

EdgeList minimum_spanning_tree(const WeightedGraph& wg) {
  check_weights(wg);
  const NodeId n = wg.graph.num_nodes();
  EdgeList out;
  if (n == 0) return out;
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  prim_from(wg, 0, in_tree, out);
  if (out.size() + 1 != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::Disconnected, "graph has more than one connected component");
  }
  std::sort(out.begin(), out.end());
  return out;
}

EdgeList minimum_spanning_forest(const WeightedGraph& wg) {
  check_weights(wg);
  const NodeId n = wg.graph.num_nodes();
  EdgeList out;
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  for (NodeId root = 0; root < n; ++root) {
    if (!in_tree[root]) prim_from(wg, root, in_tree, out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Graph remove_edges(const Graph& g, std::span<const Edge> to_delete) {
  std::vector<char> removed(static_cast<std::size_t>(g.num_edges()), 0);
  for (const Edge& e : to_delete) {
    auto id = g.edge_index(e.u, e.v);
    if (!id || removed[*id]) {
      throw Error(ErrorCode::MissingEdge,
                  "(" + std::to_string(e.u) + ", " + std::to_string(e.v) + ") not in graph");
    }
    removed[*id] = 1;
  }
  EdgeList kept;
  kept.reserve(g.edges().size() - to_delete.size());
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    if (!removed[k]) kept.push_back(g.edges()[k]);
  }
  return Graph::build(g.num_nodes(), kept);
}

Graph add_edges(const Graph& g, std::span<const Edge> to_add) {
  EdgeList all = g.edges();
  all.insert(all.end(), to_add.begin(), to_add.end());
  return Graph::build(g.num_nodes(), all);
}

}  // namespace ugp
