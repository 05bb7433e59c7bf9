#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ugp {

using NodeId = std::int32_t;

/// Undirected edge. Canonical form has u < v.
struct Edge {
  NodeId u{0};
  NodeId v{0};

  static Edge canonical(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

  auto operator<=>(const Edge&) const = default;
};

using EdgeList = std::vector<Edge>;

/// Immutable undirected, unweighted graph in CSR form.
///
/// Every undirected edge is stored twice (once per endpoint). Neighbor lists
/// are sorted ascending and contain no self-loops or duplicates. Canonical
/// edge indices enumerate (u, v), u < v, in lexicographic order; the same
/// index is used by every scorer, judge and filter.
class Graph {
 public:
  Graph() = default;

  /// Builds the canonical CSR from an arbitrary (possibly duplicated or
  /// unordered) pair list. Throws IndexOutOfRange or SelfLoop.
  static Graph build(NodeId num_nodes, std::span<const Edge> edges);

  NodeId num_nodes() const noexcept { return num_nodes_; }
  std::int64_t num_edges() const noexcept { return static_cast<std::int64_t>(edges_.size()); }

  std::span<const std::int64_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const NodeId> col_indices() const noexcept { return col_indices_; }

  std::span<const NodeId> neighbors(NodeId u) const noexcept {
    return {col_indices_.data() + row_offsets_[u],
            static_cast<std::size_t>(row_offsets_[u + 1] - row_offsets_[u])};
  }
  /// Canonical edge index for every CSR slot, aligned with neighbors(u).
  std::span<const std::int64_t> neighbor_edge_ids(NodeId u) const noexcept {
    return {slot_edge_ids_.data() + row_offsets_[u],
            static_cast<std::size_t>(row_offsets_[u + 1] - row_offsets_[u])};
  }
  std::int64_t degree(NodeId u) const noexcept { return row_offsets_[u + 1] - row_offsets_[u]; }

  const EdgeList& edges() const noexcept { return edges_; }
  bool has_edge(NodeId u, NodeId v) const noexcept { return edge_index(u, v).has_value(); }
  std::optional<std::int64_t> edge_index(NodeId u, NodeId v) const noexcept;

  bool operator==(const Graph& other) const {
    return num_nodes_ == other.num_nodes_ && edges_ == other.edges_;
  }

 private:
  NodeId num_nodes_{0};
  std::vector<std::int64_t> row_offsets_{0};
  std::vector<NodeId> col_indices_;
  std::vector<std::int64_t> slot_edge_ids_;
  EdgeList edges_;
};

/// Graph plus one finite weight per canonical edge.
struct WeightedGraph {
  Graph graph;
  std::vector<double> weights;
};

struct Components {
  std::vector<NodeId> component_of;
  NodeId count{0};
};

/// Component ids are dense and assigned in order of each component's
/// lowest node index.
Components connected_components(const Graph& g);

/// Prim's algorithm. Frontier ties resolve by canonical edge index, so the
/// result is the unique MST under the (weight, edge index) order.
/// Throws Disconnected when the graph has more than one component.
EdgeList minimum_spanning_tree(const WeightedGraph& wg);

/// Per-component Prim; returns a spanning forest (N - components edges).
EdgeList minimum_spanning_forest(const WeightedGraph& wg);

/// Throws MissingEdge when an edge is absent (or listed twice).
Graph remove_edges(const Graph& g, std::span<const Edge> to_delete);

Graph add_edges(const Graph& g, std::span<const Edge> to_add);

}  // namespace ugp
