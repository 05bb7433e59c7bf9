#include "ugp/gcn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ugp/error.hpp"

namespace ugp {

void validate(const TrainConfig& cfg) {
  if (cfg.hidden_dim <= 0 || cfg.epochs <= 0 || cfg.patience <= 0) {
    throw Error(ErrorCode::InvalidConfig, "hidden_dim, epochs and patience must be positive");
  }
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be > 0");
  if (!(cfg.weight_decay >= 0.0)) throw Error(ErrorCode::InvalidConfig, "weight decay must be >= 0");
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "dropout rate must lie in [0, 1)");
  }
}

SparseMatrix normalize_adjacency(const Graph& g) {
  const NodeId n = g.num_nodes();
  std::vector<double> deg(static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u) deg[u] = static_cast<double>(g.degree(u) + 1);

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n + 2 * g.num_edges()));
  for (NodeId u = 0; u < n; ++u) {
    entries.emplace_back(u, u, 1.0 / deg[u]);
    for (NodeId v : g.neighbors(u)) entries.emplace_back(u, v, 1.0 / std::sqrt(deg[u] * deg[v]));
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

SparseMatrix row_normalized_features(const FeatureMatrix& x) {
  const DenseMatrix& m = x.values();
  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double total = m.row(i).sum();
    const double scale = total != 0.0 ? 1.0 / total : 1.0;
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (m(i, k) != 0.0) entries.emplace_back(i, k, m(i, k) * scale);
    }
  }
  SparseMatrix out(m.rows(), m.cols());
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

GcnInputs prepare_inputs(const Dataset& d) {
  return {normalize_adjacency(d.graph), row_normalized_features(d.features)};
}

namespace {

DenseMatrix row_softmax(const DenseMatrix& logits) {
  DenseMatrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - top).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

}  // namespace

ForwardCache gcn_forward(const GcnParams& params, const SparseMatrix& features,
                         const SparseMatrix& a_hat, double dropout_rate, std::mt19937_64* rng) {
  if (features.cols() != params.w1.rows() || params.w1.cols() != params.w2.rows() ||
      a_hat.rows() != features.rows() || a_hat.cols() != features.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "gcn forward: incompatible shapes");
  }
  ForwardCache c;
  c.xw = features * params.w1;
  c.pre_hidden = a_hat * c.xw;
  c.hidden = c.pre_hidden.cwiseMax(0.0);
  if (rng != nullptr && dropout_rate > 0.0) {
    const double keep = 1.0 - dropout_rate;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    c.keep_scale.resize(c.hidden.rows(), c.hidden.cols());
    for (Eigen::Index i = 0; i < c.keep_scale.size(); ++i) {
      c.keep_scale.data()[i] = unit(*rng) < keep ? 1.0 / keep : 0.0;
    }
    c.hidden = c.hidden.cwiseProduct(c.keep_scale);
  }
  c.a_hidden = a_hat * c.hidden;
  c.logits = c.a_hidden * params.w2;
  c.probs = row_softmax(c.logits);
  return c;
}

double gcn_loss(const GcnParams& params, const ForwardCache& cache, std::span<const int> labels,
                std::span<const double> node_weights, double weight_decay) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < cache.logits.rows(); ++i) {
    if (node_weights[i] == 0.0) continue;
    const double top = cache.logits.row(i).maxCoeff();
    const double log_norm = top + std::log((cache.logits.row(i).array() - top).exp().sum());
    loss += node_weights[i] * (log_norm - cache.logits(i, labels[i]));
  }
  return loss + 0.5 * weight_decay * params.w1.squaredNorm();
}

GcnGradients gcn_backward(const GcnParams& params, const ForwardCache& cache,
                          const SparseMatrix& features, const SparseMatrix& a_hat,
                          std::span<const int> labels, std::span<const double> node_weights,
                          double weight_decay) {
  DenseMatrix d_logits = DenseMatrix::Zero(cache.probs.rows(), cache.probs.cols());
  for (Eigen::Index i = 0; i < d_logits.rows(); ++i) {
    if (node_weights[i] == 0.0) continue;
    d_logits.row(i) = node_weights[i] * cache.probs.row(i);
    d_logits(i, labels[i]) -= node_weights[i];
  }
  GcnGradients g;
  g.w2 = cache.a_hidden.transpose() * d_logits;
  // A_hat is symmetric, so its transpose is itself.
  DenseMatrix d_hidden = a_hat * (d_logits * params.w2.transpose());
  if (cache.keep_scale.size() != 0) d_hidden = d_hidden.cwiseProduct(cache.keep_scale);
  const DenseMatrix d_pre = (cache.pre_hidden.array() > 0.0).select(d_hidden, 0.0);
  g.w1 = features.transpose() * (a_hat * d_pre) + weight_decay * params.w1;
  return g;
}

std::vector<double> mean_weights(NodeId num_nodes, const std::vector<NodeId>& nodes) {
  if (nodes.empty()) throw Error(ErrorCode::EmptyMask, "no nodes in loss mask");
  std::vector<double> w(static_cast<std::size_t>(num_nodes), 0.0);
  for (NodeId u : nodes) w[u] = 1.0 / static_cast<double>(nodes.size());
  return w;
}

GcnParams init_params(Eigen::Index in_dim, int hidden_dim, int num_classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseMatrix w(rows, cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    return w;
  };
  GcnParams p;
  p.w1 = glorot(in_dim, hidden_dim);
  p.w2 = glorot(hidden_dim, num_classes);
  return p;
}

namespace {

struct AdamState {
  DenseMatrix m, v;
  explicit AdamState(const DenseMatrix& like)
      : m(DenseMatrix::Zero(like.rows(), like.cols())), v(DenseMatrix::Zero(like.rows(), like.cols())) {}

  void step(DenseMatrix& w, const DenseMatrix& grad, double lr, int t) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

// Seeds for the init and dropout streams are derived from one user seed.
constexpr std::uint64_t kDropoutStream = 0x9e3779b97f4a7c15ULL;

}  // namespace

SurrogateModel train_surrogate(const Dataset& d, const TrainConfig& cfg) {
  return train_surrogate(prepare_inputs(d), d, cfg);
}

SurrogateModel train_surrogate(const GcnInputs& inputs, const Dataset& d, const TrainConfig& cfg) {
  validate(cfg);
  const NodeId n = d.num_nodes();
  const std::vector<double> weights = mean_weights(n, d.split.train);
  const bool has_val = !d.split.val.empty();
  const std::vector<double> val_weights = has_val ? mean_weights(n, d.split.val) : std::vector<double>{};

  SurrogateModel model;
  model.config = cfg;
  GcnParams params = init_params(inputs.features.cols(), cfg.hidden_dim, d.num_classes, cfg.seed);
  AdamState adam1(params.w1), adam2(params.w2);
  std::mt19937_64 dropout_rng(cfg.seed ^ kDropoutStream);

  GcnParams best = params;
  double best_acc = -1.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  double lowest_val_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const ForwardCache train_pass = gcn_forward(params, inputs.features, inputs.a_hat, cfg.dropout_rate, &dropout_rng);
    model.history.train_loss.push_back(gcn_loss(params, train_pass, d.labels, weights, cfg.weight_decay));
    const GcnGradients grad =
        gcn_backward(params, train_pass, inputs.features, inputs.a_hat, d.labels, weights, cfg.weight_decay);
    adam1.step(params.w1, grad.w1, cfg.learning_rate, epoch + 1);
    adam2.step(params.w2, grad.w2, cfg.learning_rate, epoch + 1);

    if (!has_val) {
      best = params;
      model.history.best_epoch = epoch;
      continue;
    }
    const ForwardCache eval = gcn_forward(params, inputs.features, inputs.a_hat, 0.0, nullptr);
    const double acc = accuracy(eval.probs, d.labels, d.split.val);
    const double val_loss = gcn_loss(params, eval, d.labels, val_weights, 0.0);
    model.history.val_accuracy.push_back(acc);
    if (acc > best_acc || (acc == best_acc && val_loss < best_val_loss)) {
      best_acc = acc;
      best_val_loss = val_loss;
      best = params;
      model.history.best_epoch = epoch;
      since_best = 0;
    } else if (val_loss < lowest_val_loss) {
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
    lowest_val_loss = std::min(lowest_val_loss, val_loss);
  }
  model.params = std::move(best);
  model.val_accuracy = has_val ? best_acc : 0.0;
  return model;
}

DenseMatrix predict(const SurrogateModel& model, const Dataset& d) {
  return predict(model, prepare_inputs(d));
}

DenseMatrix predict(const SurrogateModel& model, const GcnInputs& inputs) {
  return gcn_forward(model.params, inputs.features, inputs.a_hat, 0.0, nullptr).probs;
}

double accuracy(const DenseMatrix& pred, std::span<const int> labels, const std::vector<NodeId>& nodes) {
  if (nodes.empty()) throw Error(ErrorCode::EmptyMask, "accuracy over an empty node set");
  std::size_t correct = 0;
  for (NodeId u : nodes) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < pred.cols(); ++k) {
      if (pred(u, k) > pred(u, best)) best = k;
    }
    if (best == labels[u]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

namespace {

constexpr const char* kCheckpointHeader = "ugp-gcn-checkpoint 1";

void write_block(std::ostream& out, const char* name, const DenseMatrix& w) {
  out << name << ' ' << w.rows() << ' ' << w.cols() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%a", w(i, j));
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

DenseMatrix read_block(std::istream& in, const std::string& name) {
  std::string tag;
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != name || rows < 0 || cols < 0) {
    throw Error(ErrorCode::ParseError, "checkpoint: expected '" + name + " ROWS COLS'");
  }
  DenseMatrix w(rows, cols);
  std::string token;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(in >> token)) throw Error(ErrorCode::ParseError, "checkpoint: truncated " + name);
    char* end = nullptr;
    w.data()[i] = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw Error(ErrorCode::ParseError, "checkpoint: bad value " + token);
  }
  return w;
}

}  // namespace

void save_checkpoint(const GcnParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << kCheckpointHeader << '\n';
  write_block(out, "w1", params.w1);
  write_block(out, "w2", params.w2);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

GcnParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::string header;
  std::getline(in, header);
  if (header != kCheckpointHeader) throw Error(ErrorCode::ParseError, "checkpoint: bad header");
  GcnParams p;
  p.w1 = read_block(in, "w1");
  p.w2 = read_block(in, "w2");
  if (p.w1.cols() != p.w2.rows()) throw Error(ErrorCode::DimensionMismatch, "checkpoint: hidden sizes differ");
  return p;
}

}  // namespace ugp
