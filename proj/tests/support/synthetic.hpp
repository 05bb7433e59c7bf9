#pragma once

#include <cstdint>
#include <random>

#include "ugp/dataset.hpp"

namespace ugp::testing {

/// Planted-partition citation-like benchmark: skewed class sizes, heavy-tailed
/// degrees, homophilous links and sparse binary bag-of-words features with
/// class topics.
struct PlantedSpec {
  NodeId nodes{2700};
  std::int64_t edges{5500};
  int classes{7};
  int features{800};
  int words_per_node{18};
  int topic_words{60};
  double topic_prob{0.18};
  double homophily{0.81};
  double activity_exponent{2.2};
  std::uint64_t seed{2024};
};

/// Largest connected component of the planted graph, with a 20%/10% split.
Dataset planted_citation_graph(const PlantedSpec& spec = {});

/// Erdos-Renyi G(n, p).
Graph random_graph(NodeId n, double p, std::mt19937_64& rng);

/// Random spanning tree plus G(n, p) extras, so always connected.
Graph random_connected_graph(NodeId n, double p, std::mt19937_64& rng);

/// Small random dataset with binary features and a split covering every node.
Dataset random_dataset(NodeId n, double p, int num_features, int num_classes, std::mt19937_64& rng);

/// The checked-in toy dataset (tests/data/toy).
Dataset toy_dataset();

/// Two triangles (one per class) joined by the bridge (2, 3); 4 features.
Dataset six_node_toy();

/// Ring 0-1-2-3-4-5-0 with the six_node_toy features and classes 000|111.
Dataset six_cycle_toy();

/// Two 5-node paths, one per class, joined by (4, 5); feature 0 marks class
/// 0, feature 1 class 1, the rest is noise.
Dataset separable_toy();

}  // namespace ugp::testing
