#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "ugp/dataset.hpp"

namespace ugp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Two-layer GCN weights, no biases: W1 is D x H, W2 is H x C.
struct GcnParams {
  DenseMatrix w1;
  DenseMatrix w2;

  bool operator==(const GcnParams& o) const { return w1 == o.w1 && w2 == o.w2; }
};

struct TrainConfig {
  int hidden_dim{16};
  int epochs{200};
  double learning_rate{0.01};
  double weight_decay{5e-4};
  double dropout_rate{0.5};
  std::uint64_t seed{0};
  int patience{30};
};

/// Throws InvalidConfig on non-positive sizes, lr <= 0 or dropout outside [0, 1).
void validate(const TrainConfig& cfg);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
SparseMatrix normalize_adjacency(const Graph& g);

/// Each row divided by its sum; zero-sum rows are left untouched.
SparseMatrix row_normalized_features(const FeatureMatrix& x);

/// Everything the network consumes besides the weights.
struct GcnInputs {
  SparseMatrix a_hat;
  SparseMatrix features;
};

GcnInputs prepare_inputs(const Dataset& d);

struct ForwardCache {
  DenseMatrix xw;           // X W1
  DenseMatrix pre_hidden;   // A_hat X W1
  DenseMatrix hidden;       // dropout(relu(pre_hidden))
  DenseMatrix keep_scale;   // dropout multipliers (0 or 1/keep); empty when off
  DenseMatrix a_hidden;     // A_hat hidden
  DenseMatrix logits;       // A_hat hidden W2
  DenseMatrix probs;        // row softmax of logits
};

/// softmax(A_hat relu(A_hat X W1) W2). Dropout on the hidden layer is applied
/// only when `rng` is non-null. Throws ShapeMismatch.
ForwardCache gcn_forward(const GcnParams& params, const SparseMatrix& features,
                         const SparseMatrix& a_hat, double dropout_rate, std::mt19937_64* rng);

struct GcnGradients {
  DenseMatrix w1;
  DenseMatrix w2;
};

/// Loss = sum_i node_weight[i] * CE_i + weight_decay / 2 * |W1|^2.
/// Training uses node_weight = 1/|train| on train nodes and 0 elsewhere.
double gcn_loss(const GcnParams& params, const ForwardCache& cache, std::span<const int> labels,
                std::span<const double> node_weights, double weight_decay);

/// Exact gradient of gcn_loss for the cached forward pass.
GcnGradients gcn_backward(const GcnParams& params, const ForwardCache& cache,
                          const SparseMatrix& features, const SparseMatrix& a_hat,
                          std::span<const int> labels, std::span<const double> node_weights,
                          double weight_decay);

/// Uniform 1/|nodes| weights on `nodes`, 0 elsewhere. Throws EmptyMask.
std::vector<double> mean_weights(NodeId num_nodes, const std::vector<NodeId>& nodes);

/// Glorot-uniform initial weights from the seeded generator.
GcnParams init_params(Eigen::Index in_dim, int hidden_dim, int num_classes, std::uint64_t seed);

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_accuracy;
  int best_epoch{-1};
};

struct SurrogateModel {
  GcnParams params;
  TrainConfig config;
  TrainHistory history;
  /// Validation accuracy of the retained parameters (0 without a validation set).
  double val_accuracy{0.0};
};

/// Adam (0.9, 0.999, 1e-8) on the masked mean cross-entropy; keeps the
/// parameters from the epoch with the best validation accuracy (lower
/// validation loss breaks ties) and stops after `patience` epochs in which
/// neither validation accuracy nor validation loss improved. Deterministic in (data, config).
SurrogateModel train_surrogate(const Dataset& d, const TrainConfig& cfg);
SurrogateModel train_surrogate(const GcnInputs& inputs, const Dataset& d, const TrainConfig& cfg);

/// Forward pass without dropout.
DenseMatrix predict(const SurrogateModel& model, const Dataset& d);
DenseMatrix predict(const SurrogateModel& model, const GcnInputs& inputs);

/// Fraction of `nodes` whose argmax (lowest class on ties) equals the label.
/// Throws EmptyMask.
double accuracy(const DenseMatrix& pred, std::span<const int> labels, const std::vector<NodeId>& nodes);

/// Text checkpoint: header line, then "w1 ROWS COLS" and "w2 ROWS COLS"
/// blocks with one row per line in hexadecimal floating point, which
/// round-trips bit-exactly.
void save_checkpoint(const GcnParams& params, const std::filesystem::path& path);
GcnParams load_checkpoint(const std::filesystem::path& path);

}  // namespace ugp
