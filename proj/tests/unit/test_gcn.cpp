#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "ugp/error.hpp"
#include "ugp/gcn.hpp"

using namespace ugp;
using testing::separable_toy;

namespace {

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

TEST_CASE("normalize_adjacency: examples") {
  const SparseMatrix one = normalize_adjacency(Graph::build(1, EdgeList{}));
  CHECK(one.rows() == 1);
  CHECK(DenseMatrix(one)(0, 0) == 1.0);
  const DenseMatrix pair = DenseMatrix(normalize_adjacency(Graph::build(2, EdgeList{{0, 1}})));
  CHECK((pair.array() == 0.5).all());
}

TEST_CASE("normalize_adjacency: symmetric with spectral radius at most 1") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = testing::random_graph(10, 0.3, rng);
    const DenseMatrix a = DenseMatrix(normalize_adjacency(g));
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // power iteration on A^2 for the largest |eigenvalue|
    Eigen::VectorXd v = Eigen::VectorXd::Ones(10);
    double rho = 0;
    for (int it = 0; it < 500; ++it) {
      const Eigen::VectorXd w = a * (a * v);
      rho = std::sqrt(w.norm() / v.norm());
      v = w / w.norm();
    }
    CHECK(rho <= 1.0 + 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("row_normalized_features leaves zero rows alone") {
  DenseMatrix x(2, 3);
  x << 1, 1, 2, 0, 0, 0;
  const DenseMatrix r = DenseMatrix(row_normalized_features(FeatureMatrix(x)));
  CHECK(r(0, 2) == 0.5);
  CHECK(r.row(1).sum() == 0.0);
}

TEST_CASE("gcn_forward: zero W2 gives uniform rows") {
  const Dataset d = separable_toy();
  const GcnInputs in = prepare_inputs(d);
  GcnParams p = init_params(6, 4, 3, 1);
  p.w2.setZero();
  const ForwardCache c = gcn_forward(p, in.features, in.a_hat, 0.0, nullptr);
  CHECK((c.probs.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("gcn_forward: rows sum to one for random parameters") {
  std::mt19937_64 rng(2);
  const Dataset d = separable_toy();
  const GcnInputs in = prepare_inputs(d);
  for (int trial = 0; trial < 50; ++trial) {
    GcnParams p = init_params(6, 8, 4, rng());
    p.w2 *= 25.0;
    std::mt19937_64 drop(trial);
    const ForwardCache c = gcn_forward(p, in.features, in.a_hat, 0.5, &drop);
    for (Eigen::Index i = 0; i < c.probs.rows(); ++i) CHECK(std::abs(c.probs.row(i).sum() - 1.0) <= 1e-9);
  }
}

TEST_CASE("gcn_forward: single node matches a hand-computed softmax") {
  // A_hat = [1]; X = [2]; W1 = [[0.5, -1]]; relu -> [1, 0]; W2 = [[1, 2, 0], [3, 0, 0]]
  const SparseMatrix a_hat = normalize_adjacency(Graph::build(1, EdgeList{}));
  DenseMatrix x(1, 1);
  x << 2.0;
  GcnParams p;
  p.w1.resize(1, 2);
  p.w1 << 0.5, -1.0;
  p.w2.resize(2, 3);
  p.w2 << 1, 2, 0, 3, 0, 0;
  const ForwardCache c = gcn_forward(p, x.sparseView(), a_hat, 0.0, nullptr);
  const double z = std::exp(1.0) + std::exp(2.0) + 1.0;
  CHECK(c.probs(0, 0) == doctest::Approx(std::exp(1.0) / z).epsilon(1e-15));
  CHECK(c.probs(0, 1) == doctest::Approx(std::exp(2.0) / z).epsilon(1e-15));
  CHECK(c.probs(0, 2) == doctest::Approx(1.0 / z).epsilon(1e-15));
  GcnParams bad = p;
  bad.w2.resize(3, 3);
  CHECK(code_of([&] { gcn_forward(bad, x.sparseView(), a_hat, 0.0, nullptr); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("gcn_backward: central differences on random instances") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const auto r = testing::random_gradient_check(rng);
    CHECK(r.max_relative_error < 1e-5);
  }
}

TEST_CASE("gcn_backward: six-node instance entrywise within 1e-5 at step 1e-4") {
  std::mt19937_64 rng(6);
  const auto r = testing::random_gradient_check(rng, 6, 1e-4);
  CHECK(r.max_relative_error < 1e-5);
}

TEST_CASE("gcn_backward: saturated perfect fit has near-zero gradient") {
  const SparseMatrix a_hat = normalize_adjacency(Graph::build(1, EdgeList{}));
  DenseMatrix x(1, 1);
  x << 1.0;
  GcnParams p;
  p.w1 = DenseMatrix::Constant(1, 1, 1.0);
  p.w2.resize(1, 2);
  p.w2 << 40.0, -40.0;
  const std::vector<int> labels = {0};
  const std::vector<double> w = {1.0};
  const ForwardCache c = gcn_forward(p, x.sparseView(), a_hat, 0.0, nullptr);
  const GcnGradients g = gcn_backward(p, c, x.sparseView(), a_hat, labels, w, 0.0);
  CHECK(g.w1.cwiseAbs().maxCoeff() < 1e-30);
  CHECK(g.w2.cwiseAbs().maxCoeff() < 1e-30);
}

TEST_CASE("gcn_backward: doubling the loss weights doubles the gradient") {
  const Dataset d = separable_toy();
  const GcnInputs in = prepare_inputs(d);
  const GcnParams p = init_params(6, 4, 2, 9);
  std::vector<double> w = mean_weights(10, d.split.train), w2 = w;
  for (double& v : w2) v *= 2.0;
  const ForwardCache c = gcn_forward(p, in.features, in.a_hat, 0.0, nullptr);
  const GcnGradients g1 = gcn_backward(p, c, in.features, in.a_hat, d.labels, w, 0.0);
  const GcnGradients g2 = gcn_backward(p, c, in.features, in.a_hat, d.labels, w2, 0.0);
  CHECK((g2.w1 - 2.0 * g1.w1).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((g2.w2 - 2.0 * g1.w2).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(gcn_loss(p, c, d.labels, w2, 0.0) == doctest::Approx(2.0 * gcn_loss(p, c, d.labels, w, 0.0)));
}

TEST_CASE("train_surrogate: separable toy reaches high train accuracy") {
  const Dataset d = separable_toy();
  TrainConfig cfg;
  cfg.seed = 4;
  const SurrogateModel m = train_surrogate(d, cfg);
  CHECK(accuracy(predict(m, d), d.labels, d.split.train) >= 0.9);
  CHECK(m.val_accuracy == 1.0);
  CHECK(m.history.best_epoch >= 0);
}

TEST_CASE("train_surrogate: mean loss never rises between consecutive 20-epoch windows") {
  const Dataset d = separable_toy();
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.patience = 1000;
  const SurrogateModel m = train_surrogate(d, cfg);
  const auto& loss = m.history.train_loss;
  REQUIRE(loss.size() == 200);
  auto window_mean = [&](std::size_t start) {
    double s = 0;
    for (std::size_t t = start; t < start + 20; ++t) s += loss[t];
    return s / 20.0;
  };
  for (std::size_t t = 0; t + 40 <= loss.size(); t += 20) CHECK(window_mean(t + 20) <= window_mean(t));
}

TEST_CASE("train_surrogate: same seed gives bit-identical parameters") {
  std::mt19937_64 rng(6);
  const Dataset d = testing::random_dataset(30, 0.15, 8, 3, rng);
  TrainConfig cfg;
  cfg.seed = 77;
  const SurrogateModel a = train_surrogate(d, cfg), b = train_surrogate(d, cfg);
  CHECK(a.params == b.params);
  CHECK(a.history.train_loss == b.history.train_loss);
  cfg.seed = 78;
  CHECK_FALSE(train_surrogate(d, cfg).params == a.params);
}

TEST_CASE("predict: deterministic and mostly right on train nodes") {
  const Dataset d = separable_toy();
  TrainConfig cfg;
  cfg.seed = 8;
  const SurrogateModel m = train_surrogate(d, cfg);
  const DenseMatrix p1 = predict(m, d), p2 = predict(m, d);
  CHECK(p1 == p2);
  CHECK(accuracy(p1, d.labels, d.split.train) >= 0.8);
}

TEST_CASE("accuracy: examples") {
  DenseMatrix perfect = DenseMatrix::Zero(3, 2);
  perfect(0, 1) = perfect(1, 0) = perfect(2, 1) = 1.0;
  const std::vector<int> labels = {1, 0, 1};
  CHECK(accuracy(perfect, labels, {0, 1, 2}) == 1.0);

  const DenseMatrix uniform = DenseMatrix::Constant(3, 2, 0.5);
  CHECK(accuracy(uniform, std::vector<int>{1, 1, 1}, {0, 1, 2}) == 0.0);
  CHECK(code_of([&] { accuracy(uniform, labels, {}); }) == ErrorCode::EmptyMask);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix pred(20, 4);
    for (Eigen::Index i = 0; i < pred.size(); ++i) pred.data()[i] = unit(rng);
    std::vector<int> y(20);
    for (int& v : y) v = cls(rng);
    std::vector<NodeId> nodes;
    for (NodeId i = 0; i < 20; ++i)
      if (unit(rng) < 0.5) nodes.push_back(i);
    if (nodes.empty()) nodes.push_back(0);
    int hits = 0;
    for (NodeId i : nodes) {
      int best = 0;
      for (int k = 1; k < 4; ++k)
        if (pred(i, k) > pred(i, best)) best = k;
      hits += best == y[i];
    }
    CHECK(accuracy(pred, y, nodes) == static_cast<double>(hits) / static_cast<double>(nodes.size()));
  }
}

TEST_CASE("validate(TrainConfig) and mean_weights") {
  TrainConfig cfg;
  validate(cfg);
  cfg.learning_rate = 0.0;
  CHECK(code_of([&] { validate(cfg); }) == ErrorCode::InvalidConfig);
  cfg = {};
  cfg.dropout_rate = 1.0;
  CHECK(code_of([&] { validate(cfg); }) == ErrorCode::InvalidConfig);
  cfg = {};
  cfg.hidden_dim = 0;
  CHECK(code_of([&] { validate(cfg); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { mean_weights(3, {}); }) == ErrorCode::EmptyMask);
  const auto w = mean_weights(4, {1, 3});
  CHECK(w == std::vector<double>{0.0, 0.5, 0.0, 0.5});
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  const GcnParams p = init_params(7, 5, 3, 123);
  const auto path = std::filesystem::temp_directory_path() / "ugp_test_checkpoint.txt";
  save_checkpoint(p, path);
  CHECK(load_checkpoint(path) == p);
  std::filesystem::remove(path);
  CHECK(code_of([&] { load_checkpoint(path); }) == ErrorCode::MissingFile);
}
