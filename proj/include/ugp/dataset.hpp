#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ugp/graph.hpp"

namespace ugp {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Node feature matrix X (one row per node).
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(DenseMatrix values);

  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }
  const DenseMatrix& values() const noexcept { return values_; }
  /// True iff every entry is exactly 0 or 1.
  bool is_binary() const noexcept { return binary_; }

  bool operator==(const FeatureMatrix& other) const { return values_ == other.values_; }

 private:
  DenseMatrix values_;
  bool binary_{true};
};

/// Disjoint train / validation / test node sets, each sorted ascending.
struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  bool operator==(const Split&) const = default;
};

struct Dataset {
  std::string name;
  Graph graph;
  FeatureMatrix features;
  std::vector<int> labels;
  int num_classes{0};
  Split split;

  NodeId num_nodes() const noexcept { return graph.num_nodes(); }
  bool operator==(const Dataset&) const = default;
};

/// Same dataset with a different edge set.
Dataset with_graph(const Dataset& d, Graph g);

/// Checks dimension agreement, label range and split disjointness.
/// Throws DimensionMismatch / IndexOutOfRange.
void validate(const Dataset& d);

struct Subgraph {
  Dataset dataset;
  /// new index -> original index
  std::vector<NodeId> node_index_map;
};

/// Induced sub-dataset on the largest connected component (ties go to the
/// component containing the lowest original node index).
Subgraph largest_component(const Dataset& d);

/// Random split: floor(train_fraction * N) labelled nodes, of which
/// floor(val_fraction_of_train * labelled) are validation; the rest is test.
Split make_split(NodeId num_nodes, double train_fraction, double val_fraction_of_train,
                 std::uint64_t seed);

/// Per-node membership flags for a node subset.
std::vector<char> to_mask(NodeId num_nodes, const std::vector<NodeId>& nodes);

}  // namespace ugp
