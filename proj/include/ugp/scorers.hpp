#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ugp/dataset.hpp"
#include "ugp/graph.hpp"

namespace ugp {

/// One score per canonical edge. Lower score = more likely redundant.
struct EdgeScores {
  EdgeList edges;
  std::vector<double> scores;
  std::string scorer;
};

enum class ScorerKind { Jaccard, Cosine, Svd, Entropy, Kld };

std::string to_string(ScorerKind kind);
/// Throws InvalidConfig on an unknown name.
ScorerKind parse_scorer(const std::string& name);
/// True for scorers that consume surrogate predictions.
bool needs_predictions(ScorerKind kind);

/// Probability floor used for predicted distributions and the additive
/// smoothing used for feature distributions.
inline constexpr double kSmoothingEpsilon = 1e-9;

// Default thresholds for the threshold judge when none is given; starting
// points only, thresholds are dataset-specific.
inline constexpr double kDefaultJaccardThreshold = 0.01;
inline constexpr double kDefaultCosineThreshold = 0.01;
inline constexpr double kDefaultKldThreshold = -2.3;

/// Feature-overlap score M11 / (M01 + M10 + M11); 0 when both rows are empty.
/// Throws NonBinaryFeatures.
EdgeScores score_jaccard(const Graph& g, const FeatureMatrix& x);

/// X_u . X_v / (|X_u| |X_v|); 0 when either row has zero norm.
EdgeScores score_cosine(const Graph& g, const FeatureMatrix& x);

/// Rank-k approximation of a symmetric matrix held as eigenpairs:
/// A_hat = basis * diag(eigenvalues) * basis^T. Singular values are |eigenvalues|.
struct LowRankApproximation {
  DenseMatrix basis;
  Eigen::VectorXd eigenvalues;
  int iterations{0};

  double at(NodeId u, NodeId v) const;
  DenseMatrix dense() const;
};

struct SvdOptions {
  int oversampling{10};
  int max_iterations{2000};
  double tolerance{1e-13};
  std::uint64_t seed{0x5eedULL};
};

/// Best rank-k approximation of the adjacency matrix by seeded orthogonal
/// (subspace) iteration with a Rayleigh-Ritz projection. Throws RankOutOfRange.
LowRankApproximation truncated_svd(const Graph& g, int rank, const SvdOptions& opts = {});

inline constexpr int kDefaultSvdRank = 10;

/// Entry of the rank-k reconstruction at each edge, clamped to [0, 1].
EdgeScores score_svd(const Graph& g, int rank, const SvdOptions& opts = {});

/// Entropy of the closed-neighborhood aggregate of rows of `m` at node u.
/// Natural log, 0 log 0 = 0; an all-zero aggregate has entropy 0.
/// Throws NegativeEntry.
double node_entropy(const Graph& g, const DenseMatrix& m, NodeId u);

struct EntropyParts {
  std::vector<double> feature_raw;
  std::vector<double> label_raw;
};

/// Raw entropy variation per scored edge: [NE(u) + NE(v)] without the edge
/// minus the same with it, for features and labels separately. Neighborhoods
/// come from `context`, which must contain every edge of `g`.
EntropyParts entropy_variation(const Graph& g, const Graph& context, const DenseMatrix& x,
                               const DenseMatrix& y);

/// (1 - w) * minmax(feature part) + w * minmax(label part).
/// `y` is a probability matrix or one-hot labels.
EdgeScores score_entropy(const Graph& g, const FeatureMatrix& x, const DenseMatrix& y,
                         double combine_weight);
EdgeScores score_entropy(const Graph& g, const Graph& context, const FeatureMatrix& x,
                         const DenseMatrix& y, double combine_weight);

/// Floors every entry at kSmoothingEpsilon and renormalizes each row.
/// Throws ZeroProbability if a row cannot be made a distribution.
DenseMatrix floor_probabilities(const DenseMatrix& pred);

/// Clamps negatives to 0, adds kSmoothingEpsilon and renormalizes each row.
DenseMatrix feature_distributions(const DenseMatrix& x);

/// -[KL(p_u||p_v) + KL(p_v||p_u)] on predictions plus feature_weight times
/// the same on feature distributions. Always <= 0.
EdgeScores score_kld(const Graph& g, const DenseMatrix& pred, const FeatureMatrix& x,
                     double feature_weight = 1.0);

/// Min-max scaling to [0, 1]; a constant input maps to 0.5.
std::vector<double> min_max_normalize(const std::vector<double>& values);

/// One-hot encoding of integer labels.
DenseMatrix one_hot(const std::vector<int>& labels, int num_classes);

}  // namespace ugp
