#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "ugp/error.hpp"
#include "ugp/scorers.hpp"

using namespace ugp;
using testing::dense_adjacency;
using testing::dense_low_rank;
using testing::permute_rows;
using testing::relabel;
using testing::score_at;
using testing::oracle_entropy_raw;
using testing::oracle_min_max;
using testing::Relabeled;

namespace {

Graph single_edge() { return Graph::build(2, EdgeList{{0, 1}}); }

FeatureMatrix rows(std::initializer_list<std::initializer_list<double>> r) {
  DenseMatrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return FeatureMatrix(m);
}

double kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double s = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

DenseMatrix random_distributions(Eigen::Index n, Eigen::Index c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  DenseMatrix p(n, c);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = unit(rng);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) /= p.row(i).sum();
  return p;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ugp::Error");
  return ErrorCode::IoError;
}


}  // namespace

TEST_CASE("jaccard: examples") {
  CHECK(score_jaccard(single_edge(), rows({{1, 1, 0}, {1, 0, 1}})).scores[0] == doctest::Approx(1.0 / 3.0));
  CHECK(score_jaccard(single_edge(), rows({{1, 0, 1}, {1, 0, 1}})).scores[0] == 1.0);
  CHECK(score_jaccard(single_edge(), rows({{0, 0}, {0, 0}})).scores[0] == 0.0);
  CHECK(code_of([] { score_jaccard(single_edge(), rows({{0.5, 0}, {0, 1}})); }) == ErrorCode::NonBinaryFeatures);
}

TEST_CASE("cosine: examples") {
  CHECK(score_cosine(single_edge(), rows({{3, 4}, {3, 4}})).scores[0] == doctest::Approx(1.0));
  CHECK(score_cosine(single_edge(), rows({{1, 0}, {0, 1}})).scores[0] == 0.0);
  CHECK(score_cosine(single_edge(), rows({{1, 1}, {1, 0}})).scores[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(score_cosine(single_edge(), rows({{0, 0}, {1, 0}})).scores[0] == 0.0);
}

TEST_CASE("jaccard: invariant under feature column permutation") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = testing::random_dataset(10, 0.4, 8, 3, rng);
    std::vector<int> cols(8);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), rng);
    DenseMatrix shuffled(10, 8);
    for (int j = 0; j < 8; ++j) shuffled.col(j) = d.features.values().col(cols[j]);
    CHECK(score_jaccard(d.graph, d.features).scores == score_jaccard(d.graph, FeatureMatrix(shuffled)).scores);
  }
}

TEST_CASE("svd: rank N on K3 reproduces A") {
  const Graph k3 = Graph::build(3, EdgeList{{0, 1}, {1, 2}, {0, 2}});
  const DenseMatrix a_hat = truncated_svd(k3, 3).dense();
  CHECK((a_hat - dense_adjacency(k3)).cwiseAbs().maxCoeff() < 1e-9);
  for (double s : score_svd(k3, 3).scores) CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("svd: rank 1 on two disjoint edges matches the dense oracle's error") {
  const Graph g = Graph::build(4, EdgeList{{0, 1}, {2, 3}});
  const LowRankApproximation approx = truncated_svd(g, 1);
  CHECK(approx.eigenvalues.size() == 1);
  CHECK(std::abs(approx.eigenvalues[0]) == doctest::Approx(1.0));
  const DenseMatrix a = dense_adjacency(g);
  const double err = (a - approx.dense()).norm();
  const double oracle = (a - dense_low_rank(g, 1).first).norm();
  CHECK(err == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(err == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("svd: K3 rank 1 scores all edges equally") {
  const Graph k3 = Graph::build(3, EdgeList{{0, 1}, {1, 2}, {0, 2}});
  const EdgeScores s = score_svd(k3, 1);
  CHECK(s.scores[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(s.scores[1] == doctest::Approx(s.scores[0]).epsilon(1e-12));
  CHECK(s.scores[2] == doctest::Approx(s.scores[0]).epsilon(1e-12));
}

TEST_CASE("svd: star rank 1 spokes equal and match dense oracle") {
  for (NodeId leaves : {3, 4}) {
    EdgeList spokes;
    for (NodeId v = 1; v <= leaves; ++v) spokes.push_back({0, v});
    const Graph star = Graph::build(leaves + 1, spokes);
    const EdgeScores s = score_svd(star, 1);
    const DenseMatrix oracle = dense_low_rank(star, 1).first;
    for (NodeId v = 1; v <= leaves; ++v) {
      CHECK(s.scores[v - 1] == doctest::Approx(s.scores[0]).epsilon(1e-9));
      CHECK(s.scores[v - 1] == doctest::Approx(std::clamp(oracle(0, v), 0.0, 1.0)).epsilon(1e-9));
    }
  }
}

TEST_CASE("svd: random graphs agree with dense eigendecomposition") {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Graph g = testing::random_connected_graph(12, 0.35, rng);
    for (int k : {1, 3, 6}) {
      const auto [oracle, gap] = dense_low_rank(g, k);
      if (gap < 1e-6) continue;  // best rank-k approximation not unique
      ++checked;
      CHECK((truncated_svd(g, k).dense() - oracle).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  CHECK(checked > 60);
}

TEST_CASE("svd: rank outside [1, N] throws") {
  const Graph k3 = Graph::build(3, EdgeList{{0, 1}, {1, 2}, {0, 2}});
  CHECK(code_of([&] { truncated_svd(k3, 0); }) == ErrorCode::RankOutOfRange);
  CHECK(code_of([&] { truncated_svd(k3, 4); }) == ErrorCode::RankOutOfRange);
}

TEST_CASE("node_entropy: examples") {
  const Graph isolated = Graph::build(1, EdgeList{});
  CHECK(node_entropy(isolated, one_hot({2}, 3), 0) == 0.0);

  const Graph fan = Graph::build(3, EdgeList{{0, 1}, {0, 2}});
  CHECK(node_entropy(fan, one_hot({0, 1, 2}, 3), 0) == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  const Graph path = Graph::build(3, EdgeList{{0, 1}, {1, 2}});
  // closed neighborhood of 1: counts [2, 1] / sqrt(3), renormalized [2/3, 1/3]
  const double expected = -(2.0 / 3.0) * std::log(2.0 / 3.0) - (1.0 / 3.0) * std::log(1.0 / 3.0);
  CHECK(node_entropy(path, one_hot({0, 0, 1}, 2), 1) == doctest::Approx(expected).epsilon(1e-12));

  CHECK(code_of([&] { node_entropy(path, DenseMatrix::Constant(3, 2, -1.0), 0); }) == ErrorCode::NegativeEntry);
}

TEST_CASE("entropy: one shared label leaves ordering to the feature part") {
  std::mt19937_64 rng(5);
  const Dataset d = testing::random_dataset(10, 0.4, 6, 2, rng);
  const DenseMatrix y = one_hot(std::vector<int>(10, 1), 2);
  const EntropyParts parts = entropy_variation(d.graph, d.graph, d.features.values(), y);
  for (double r : parts.label_raw) CHECK(r == doctest::Approx(parts.label_raw[0]).epsilon(1e-12));
  const EdgeScores full = score_entropy(d.graph, d.features, y, 0.4);
  const EdgeScores features_only = score_entropy(d.graph, d.features, y, 0.0);
  for (std::size_t e = 0; e < full.scores.size(); ++e) {
    CHECK(full.scores[e] == doctest::Approx(0.6 * features_only.scores[e] + 0.4 * 0.5).epsilon(1e-12));
  }
}

TEST_CASE("entropy: combine weight 0 gives the normalized feature score") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = testing::random_dataset(9, 0.4, 5, 3, rng);
    if (d.graph.num_edges() == 0) continue;
    const EdgeScores s = score_entropy(d.graph, d.features, one_hot(d.labels, 3), 0.0);
    const auto expected = oracle_min_max(oracle_entropy_raw(d.graph, d.features.values()));
    for (std::size_t e = 0; e < expected.size(); ++e) CHECK(s.scores[e] == doctest::Approx(expected[e]).epsilon(1e-9));
  }
}

TEST_CASE("entropy: cross-class edge of a 4-node graph has the lowest label score") {
  // two triangles' worth of classes: 0-1 and 2-3 same class, 1-2 crosses
  const Graph g = Graph::build(4, EdgeList{{0, 1}, {1, 2}, {2, 3}, {0, 2}});
  const DenseMatrix y = one_hot({0, 0, 1, 1}, 2);
  const FeatureMatrix x = rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
  const EdgeScores s = score_entropy(g, x, y, 1.0);
  const auto raw = oracle_entropy_raw(g, y);
  const auto expected = oracle_min_max(raw);
  for (std::size_t e = 0; e < expected.size(); ++e) CHECK(s.scores[e] == doctest::Approx(expected[e]).epsilon(1e-9));
  // cross-class edges are (0,2) and (1,2); same-class ones must score strictly higher
  const auto idx = [&](NodeId u, NodeId v) { return static_cast<std::size_t>(*g.edge_index(u, v)); };
  const double worst_cross = std::max(s.scores[idx(0, 2)], s.scores[idx(1, 2)]);
  CHECK(s.scores[idx(0, 1)] > worst_cross);
  CHECK(s.scores[idx(2, 3)] > worst_cross);

  const Graph single_cross = Graph::build(4, EdgeList{{0, 1}, {1, 2}, {2, 3}});
  const EdgeScores t = score_entropy(single_cross, x, y, 1.0);
  CHECK(t.scores[1] < t.scores[0]);
  CHECK(t.scores[1] < t.scores[2]);
}

TEST_CASE("entropy: context graph supplies neighborhoods") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = testing::random_dataset(10, 0.45, 5, 3, rng);
    EdgeList keep;
    for (const Edge& e : d.graph.edges())
      if (rng() % 4 != 0) keep.push_back(e);
    const Graph current = Graph::build(10, keep);
    const DenseMatrix y = one_hot(d.labels, 3);
    const EntropyParts parts = entropy_variation(current, d.graph, d.features.values(), y);
    // variation of each current edge measured inside the context graph
    const auto context_raw = oracle_entropy_raw(d.graph, y);
    for (std::size_t e = 0; e < keep.size(); ++e) {
      const auto ci = static_cast<std::size_t>(*d.graph.edge_index(keep[e].u, keep[e].v));
      CHECK(parts.label_raw[e] == doctest::Approx(context_raw[ci]).epsilon(1e-9));
    }
  }
  const Graph g = Graph::build(3, EdgeList{{0, 1}, {1, 2}});
  CHECK(code_of([&] {
          entropy_variation(g, Graph::build(3, EdgeList{{0, 1}}), DenseMatrix::Ones(3, 2), DenseMatrix::Ones(3, 2));
        }) == ErrorCode::MissingEdge);
}

TEST_CASE("kld: examples") {
  const FeatureMatrix x = rows({{1, 0, 1}, {1, 0, 1}});
  DenseMatrix same(2, 2);
  same << 0.3, 0.7, 0.3, 0.7;
  CHECK(score_kld(single_edge(), same, x).scores[0] == 0.0);

  DenseMatrix opposite(2, 2);
  opposite << 0.9, 0.1, 0.1, 0.9;
  const double s = score_kld(single_edge(), opposite, x, 0.0).scores[0];
  CHECK(std::abs(s - (-1.6 * std::log(9.0))) <= 1e-9);
  CHECK(s == doctest::Approx(-3.5156).epsilon(1e-4));

  DenseMatrix swapped(2, 2);
  swapped << 0.1, 0.9, 0.9, 0.1;
  CHECK(score_kld(single_edge(), swapped, x, 0.0).scores[0] == s);
}

TEST_CASE("kld: non-positive, zero exactly for identical distributions") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset d = testing::random_dataset(9, 0.5, 5, 3, rng);
    DenseMatrix pred = random_distributions(9, 3, rng);
    pred.row(1) = pred.row(0);
    const EdgeScores s = score_kld(d.graph, pred, d.features, 0.7);
    const DenseMatrix pf = floor_probabilities(pred);
    const DenseMatrix xf = feature_distributions(d.features.values());
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
      const auto [u, v] = s.edges[e];
      CHECK(s.scores[e] <= 0.0);
      const double expected = -(kl(pf.row(u), pf.row(v)) + kl(pf.row(v), pf.row(u))) -
                              0.7 * (kl(xf.row(u), xf.row(v)) + kl(xf.row(v), xf.row(u)));
      CHECK(s.scores[e] == doctest::Approx(expected).epsilon(1e-12));
      const bool identical = pf.row(u) == pf.row(v) && xf.row(u) == xf.row(v);
      CHECK((s.scores[e] == 0.0) == identical);
    }
  }
}

TEST_CASE("kld: smoothing keeps zero probabilities finite") {
  DenseMatrix hard(2, 2);
  hard << 1.0, 0.0, 0.0, 1.0;
  const DenseMatrix floored = floor_probabilities(hard);
  CHECK(floored.minCoeff() > 0.0);
  CHECK(floored.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
  const double s = score_kld(single_edge(), hard, rows({{0, 0}, {1, 1}}), 1.0).scores[0];
  CHECK(std::isfinite(s));
  CHECK(s < 0.0);
  CHECK(code_of([] { floor_probabilities(DenseMatrix::Zero(1, 0)); }) == ErrorCode::ZeroProbability);
}

TEST_CASE("scorers: bounds and node-relabeling equivariance") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const Dataset d = testing::random_dataset(11, 0.4, 6, 3, rng);
    if (d.graph.num_edges() == 0) continue;
    const DenseMatrix pred = random_distributions(11, 3, rng);
    const Relabeled r = relabel(d.graph, rng);
    const FeatureMatrix x2(permute_rows(d.features.values(), r.perm));
    const DenseMatrix pred2 = permute_rows(pred, r.perm);

    const EdgeScores scores[] = {score_jaccard(d.graph, d.features), score_cosine(d.graph, d.features),
                                 score_svd(d.graph, 3), score_entropy(d.graph, d.features, pred, 0.6),
                                 score_kld(d.graph, pred, d.features)};
    const EdgeScores moved[] = {score_jaccard(r.graph, x2), score_cosine(r.graph, x2), score_svd(r.graph, 3),
                                score_entropy(r.graph, x2, pred2, 0.6), score_kld(r.graph, pred2, x2)};
    const bool svd_unique = dense_low_rank(d.graph, 3).second > 1e-6;
    for (int k = 0; k < 5; ++k) {
      const EdgeScores& s = scores[k];
      REQUIRE(s.scores.size() == static_cast<std::size_t>(d.graph.num_edges()));
      CHECK(s.edges == d.graph.edges());
      for (double v : s.scores) {
        CHECK(std::isfinite(v));
        if (k <= 3) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        } else {
          CHECK(v <= 0.0);
        }
      }
      if (k == 2 && !svd_unique) continue;
      for (std::size_t e = 0; e < s.edges.size(); ++e) {
        const auto [u, v] = s.edges[e];
        CHECK(score_at(r.graph, moved[k], r.perm[u], r.perm[v]) == doctest::Approx(s.scores[e]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("min_max_normalize and one_hot") {
  CHECK(min_max_normalize({2.0, 4.0, 3.0}) == std::vector<double>{0.0, 1.0, 0.5});
  CHECK(min_max_normalize({7.0, 7.0}) == std::vector<double>{0.5, 0.5});
  const DenseMatrix y = one_hot({1, 0}, 3);
  CHECK(y.row(0).sum() == 1.0);
  CHECK(y(0, 1) == 1.0);
  CHECK(code_of([] { one_hot({3}, 3); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("parse_scorer round trip") {
  for (ScorerKind k : {ScorerKind::Jaccard, ScorerKind::Cosine, ScorerKind::Svd, ScorerKind::Entropy, ScorerKind::Kld}) {
    CHECK(parse_scorer(to_string(k)) == k);
  }
  CHECK(needs_predictions(ScorerKind::Kld));
  CHECK(needs_predictions(ScorerKind::Entropy));
  CHECK_FALSE(needs_predictions(ScorerKind::Jaccard));
  CHECK(code_of([] { parse_scorer("pagerank"); }) == ErrorCode::InvalidConfig);
}
