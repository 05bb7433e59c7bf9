#include "ugp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ugp/error.hpp"

namespace ugp {

FeatureMatrix::FeatureMatrix(DenseMatrix values) : values_(std::move(values)) {
  binary_ = true;
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double x = values_.data()[i];
    if (!std::isfinite(x)) throw Error(ErrorCode::ParseError, "non-finite feature value");
    if (x != 0.0 && x != 1.0) binary_ = false;
  }
}

Dataset with_graph(const Dataset& d, Graph g) {
  Dataset out = d;
  out.graph = std::move(g);
  return out;
}

void validate(const Dataset& d) {
  const NodeId n = d.num_nodes();
  if (d.features.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows " + std::to_string(d.features.rows()) +
                                                  " != nodes " + std::to_string(n));
  }
  if (static_cast<NodeId>(d.labels.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "label count != nodes");
  }
  for (int y : d.labels) {
    if (y < 0 || y >= d.num_classes) {
      throw Error(ErrorCode::IndexOutOfRange, "label " + std::to_string(y) + " outside [0, " +
                                                  std::to_string(d.num_classes) + ")");
    }
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto* part : {&d.split.train, &d.split.val, &d.split.test}) {
    for (NodeId u : *part) {
      if (u < 0 || u >= n) throw Error(ErrorCode::IndexOutOfRange, "split node out of range");
      if (seen[u]++) throw Error(ErrorCode::DimensionMismatch, "split sets overlap");
    }
  }
}

Subgraph largest_component(const Dataset& d) {
  const Components cc = connected_components(d.graph);
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(cc.count), 0);
  for (NodeId c : cc.component_of) ++sizes[c];
  // Component ids follow lowest node index, so the first maximum wins ties.
  const NodeId best = static_cast<NodeId>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  Subgraph out;
  std::vector<NodeId> new_index(static_cast<std::size_t>(d.num_nodes()), -1);
  for (NodeId u = 0; u < d.num_nodes(); ++u) {
    if (cc.component_of[u] == best) {
      new_index[u] = static_cast<NodeId>(out.node_index_map.size());
      out.node_index_map.push_back(u);
    }
  }
  const auto m = static_cast<NodeId>(out.node_index_map.size());

  EdgeList edges;
  for (const Edge& e : d.graph.edges()) {
    if (new_index[e.u] >= 0) edges.push_back({new_index[e.u], new_index[e.v]});
  }
  DenseMatrix x(m, d.features.cols());
  std::vector<int> labels(static_cast<std::size_t>(m));
  for (NodeId i = 0; i < m; ++i) {
    x.row(i) = d.features.values().row(out.node_index_map[i]);
    labels[i] = d.labels[out.node_index_map[i]];
  }
  auto remap = [&](const std::vector<NodeId>& nodes) {
    std::vector<NodeId> r;
    for (NodeId u : nodes) {
      if (new_index[u] >= 0) r.push_back(new_index[u]);
    }
    std::sort(r.begin(), r.end());
    return r;
  };

  Dataset& sub = out.dataset;
  sub.name = d.name;
  sub.graph = Graph::build(m, edges);
  sub.features = FeatureMatrix(std::move(x));
  sub.labels = std::move(labels);
  sub.num_classes = d.num_classes;
  sub.split = {remap(d.split.train), remap(d.split.val), remap(d.split.test)};
  return out;
}

Split make_split(NodeId num_nodes, double train_fraction, double val_fraction_of_train,
                 std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0) ||
      !(val_fraction_of_train > 0.0 && val_fraction_of_train < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "split fractions must lie in (0, 1)");
  }
  std::vector<NodeId> order(static_cast<std::size_t>(num_nodes));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto labelled = static_cast<std::size_t>(std::floor(train_fraction * num_nodes));
  const auto n_val = static_cast<std::size_t>(std::floor(val_fraction_of_train * static_cast<double>(labelled)));
  Split s;
  s.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                 order.begin() + static_cast<std::ptrdiff_t>(labelled));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(labelled), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<char> to_mask(NodeId num_nodes, const std::vector<NodeId>& nodes) {
  std::vector<char> mask(static_cast<std::size_t>(num_nodes), 0);
  for (NodeId u : nodes) mask[u] = 1;
  return mask;
}

}  // namespace ugp
