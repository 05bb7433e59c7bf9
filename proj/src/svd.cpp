// Truncated SVD of a symmetric adjacency matrix by orthogonal iteration.
//
// For a symmetric matrix the singular triplets are (|lambda|, x, sign(lambda) x),
// so the best rank-k approximation keeps the k eigenpairs of largest magnitude.
// A block of k + oversampling vectors is iterated as Q <- orth(A Q); the
// Rayleigh-Ritz projection Q^T A Q then yields the eigenpairs. Iteration stops
// once the leading k Ritz values settle.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "ugp/error.hpp"
#include "ugp/scorers.hpp"

namespace ugp {

double LowRankApproximation::at(NodeId u, NodeId v) const {
  return (basis.row(u).array() * eigenvalues.transpose().array() * basis.row(v).array()).sum();
}

DenseMatrix LowRankApproximation::dense() const {
  return basis * eigenvalues.asDiagonal() * basis.transpose();
}

namespace {

// A * m for the 0/1 adjacency of g.
DenseMatrix adjacency_times(const Graph& g, const DenseMatrix& m) {
  DenseMatrix out = DenseMatrix::Zero(m.rows(), m.cols());
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) out.row(u) += m.row(v);
  }
  return out;
}

DenseMatrix orthonormalize(const DenseMatrix& z) {
  Eigen::HouseholderQR<DenseMatrix> qr(z);
  return qr.householderQ() * DenseMatrix::Identity(z.rows(), z.cols());
}

// Indices of the `rank` Ritz values of largest magnitude, ties toward the
// larger signed value.
std::vector<Eigen::Index> leading(const Eigen::VectorXd& values, int rank) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(values[a]), mb = std::abs(values[b]);
    if (ma != mb) return ma > mb;
    return values[a] > values[b];
  });
  idx.resize(static_cast<std::size_t>(rank));
  return idx;
}

}  // namespace

LowRankApproximation truncated_svd(const Graph& g, int rank, const SvdOptions& opts) {
  const NodeId n = g.num_nodes();
  if (rank < 1 || rank > n) {
    throw Error(ErrorCode::RankOutOfRange,
                "rank " + std::to_string(rank) + " not in [1, " + std::to_string(n) + "]");
  }
  const Eigen::Index block = std::min<Eigen::Index>(n, rank + std::max(0, opts.oversampling));

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix start(n, block);
  for (Eigen::Index i = 0; i < start.size(); ++i) start.data()[i] = normal(rng);
  DenseMatrix q = orthonormalize(start);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz;
  auto project = [&](const DenseMatrix& aq) {
    Eigen::MatrixXd t = q.transpose() * aq;
    t = 0.5 * (t + t.transpose());
    ritz.compute(t);
  };

  int iterations = 0;
  DenseMatrix aq = adjacency_times(g, q);
  project(aq);
  // With a full block the projection is already exact.
  if (block < n) {
    Eigen::VectorXd previous = ritz.eigenvalues();
    int settled = 0;
    while (iterations < opts.max_iterations) {
      q = orthonormalize(aq);
      aq = adjacency_times(g, q);
      project(aq);
      ++iterations;

      const Eigen::VectorXd& current = ritz.eigenvalues();
      double scale = std::max(1.0, current.cwiseAbs().maxCoeff());
      double change = 0.0;
      for (Eigen::Index i : leading(current, rank)) {
        change = std::max(change, std::abs(current[i] - previous[i]));
      }
      previous = current;
      settled = change <= opts.tolerance * scale ? settled + 1 : 0;
      if (settled >= 3) break;
    }
  }

  const std::vector<Eigen::Index> keep = leading(ritz.eigenvalues(), rank);
  LowRankApproximation out;
  out.iterations = iterations;
  out.basis.resize(n, rank);
  out.eigenvalues.resize(rank);
  const DenseMatrix vectors = q * ritz.eigenvectors();
  for (int j = 0; j < rank; ++j) {
    out.basis.col(j) = vectors.col(keep[j]);
    out.eigenvalues[j] = ritz.eigenvalues()[keep[j]];
  }
  return out;
}

}  // namespace ugp
