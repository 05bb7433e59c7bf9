#include "ugp/scorers.hpp"

#include <algorithm>
#include <cmath>

#include "ugp/error.hpp"

namespace ugp {

std::string to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::Jaccard: return "jaccard";
    case ScorerKind::Cosine: return "cosine";
    case ScorerKind::Svd: return "svd";
    case ScorerKind::Entropy: return "entropy";
    case ScorerKind::Kld: return "kld";
  }
  return "unknown";
}

ScorerKind parse_scorer(const std::string& name) {
  for (ScorerKind k : {ScorerKind::Jaccard, ScorerKind::Cosine, ScorerKind::Svd,
                       ScorerKind::Entropy, ScorerKind::Kld}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown scorer '" + name + "'");
}

bool needs_predictions(ScorerKind kind) {
  return kind == ScorerKind::Entropy || kind == ScorerKind::Kld;
}

namespace {

EdgeScores make_scores(const Graph& g, std::string name) {
  EdgeScores s;
  s.edges = g.edges();
  s.scores.assign(s.edges.size(), 0.0);
  s.scorer = std::move(name);
  return s;
}

void check_rows(const Graph& g, Eigen::Index rows, const char* what) {
  if (rows != g.num_nodes()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + " rows " + std::to_string(rows) +
                                              " != nodes " + std::to_string(g.num_nodes()));
  }
}

}  // namespace

EdgeScores score_jaccard(const Graph& g, const FeatureMatrix& x) {
  if (!x.is_binary()) throw Error(ErrorCode::NonBinaryFeatures, "jaccard needs a 0/1 feature matrix");
  check_rows(g, x.rows(), "feature");

  // Sorted support of each row.
  std::vector<std::vector<Eigen::Index>> support(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      if (x.values()(i, k) != 0.0) support[i].push_back(k);
    }
  }
  EdgeScores out = make_scores(g, "jaccard");
  for (std::size_t e = 0; e < out.edges.size(); ++e) {
    const auto& a = support[out.edges[e].u];
    const auto& b = support[out.edges[e].v];
    std::size_t i = 0, j = 0, both = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] == b[j]) {
        ++both, ++i, ++j;
      } else if (a[i] < b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
    const std::size_t either = a.size() + b.size() - both;
    out.scores[e] = either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
  }
  return out;
}

EdgeScores score_cosine(const Graph& g, const FeatureMatrix& x) {
  check_rows(g, x.rows(), "feature");
  const DenseMatrix& m = x.values();
  Eigen::VectorXd norms = m.rowwise().norm();
  EdgeScores out = make_scores(g, "cosine");
  for (std::size_t e = 0; e < out.edges.size(); ++e) {
    const auto [u, v] = out.edges[e];
    if (norms[u] == 0.0 || norms[v] == 0.0) continue;
    const double c = m.row(u).dot(m.row(v)) / (norms[u] * norms[v]);
    // Negative similarity (possible with signed features) counts as none.
    out.scores[e] = std::clamp(c, 0.0, 1.0);
  }
  return out;
}

EdgeScores score_svd(const Graph& g, int rank, const SvdOptions& opts) {
  const LowRankApproximation approx = truncated_svd(g, rank, opts);
  EdgeScores out = make_scores(g, "svd");
  for (std::size_t e = 0; e < out.edges.size(); ++e) {
    out.scores[e] = std::clamp(approx.at(out.edges[e].u, out.edges[e].v), 0.0, 1.0);
  }
  return out;
}

namespace {

void check_nonnegative(const DenseMatrix& m) {
  if ((m.array() < 0.0).any()) throw Error(ErrorCode::NegativeEntry, "entropy input has negative entries");
}

// Entropy of p / sum(p); 0 for an all-zero vector.
double normalized_entropy(const Eigen::Ref<const Eigen::VectorXd>& p) {
  const double total = p.sum();
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (Eigen::Index l = 0; l < p.size(); ++l) {
    const double q = p[l] / total;
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

Eigen::VectorXd closed_neighborhood_sum(const Graph& g, const DenseMatrix& m, NodeId u) {
  Eigen::VectorXd s = m.row(u).transpose();
  for (NodeId v : g.neighbors(u)) s += m.row(v).transpose();
  return s;
}

// Aggregate p(u) = sum / sqrt(|N(u)| + 1), given the closed-neighborhood sum
// and neighbor count.
double entropy_of_aggregate(const Eigen::VectorXd& sum, std::int64_t neighbor_count) {
  const Eigen::VectorXd p = sum / std::sqrt(static_cast<double>(neighbor_count + 1));
  return normalized_entropy(p);
}

}  // namespace

double node_entropy(const Graph& g, const DenseMatrix& m, NodeId u) {
  check_rows(g, m.rows(), "entropy input");
  check_nonnegative(m);
  return entropy_of_aggregate(closed_neighborhood_sum(g, m, u), g.degree(u));
}

EntropyParts entropy_variation(const Graph& g, const Graph& context, const DenseMatrix& x,
                               const DenseMatrix& y) {
  check_rows(context, x.rows(), "feature");
  check_rows(context, y.rows(), "label");
  if (g.num_nodes() != context.num_nodes()) throw Error(ErrorCode::ShapeMismatch, "context node count");
  check_nonnegative(x);
  check_nonnegative(y);

  const NodeId n = context.num_nodes();
  std::vector<Eigen::VectorXd> xsum(static_cast<std::size_t>(n)), ysum(static_cast<std::size_t>(n));
  std::vector<double> xh(static_cast<std::size_t>(n)), yh(static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u) {
    xsum[u] = closed_neighborhood_sum(context, x, u);
    ysum[u] = closed_neighborhood_sum(context, y, u);
    xh[u] = entropy_of_aggregate(xsum[u], context.degree(u));
    yh[u] = entropy_of_aggregate(ysum[u], context.degree(u));
  }

  EntropyParts parts;
  parts.feature_raw.resize(g.edges().size());
  parts.label_raw.resize(g.edges().size());
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const auto [u, v] = g.edges()[e];
    if (!context.has_edge(u, v)) {
      throw Error(ErrorCode::MissingEdge, "scored edge absent from the context graph");
    }
    auto without = [&](const std::vector<Eigen::VectorXd>& sums, const DenseMatrix& m, NodeId a, NodeId b) {
      Eigen::VectorXd s = sums[a] - m.row(b).transpose();
      // Cancellation can leave tiny negatives where the sum should be zero.
      s = s.cwiseMax(0.0);
      return entropy_of_aggregate(s, context.degree(a) - 1);
    };
    const double x_without = without(xsum, x, u, v) + without(xsum, x, v, u);
    const double y_without = without(ysum, y, u, v) + without(ysum, y, v, u);
    parts.feature_raw[e] = x_without - (xh[u] + xh[v]);
    parts.label_raw[e] = y_without - (yh[u] + yh[v]);
  }
  return parts;
}

std::vector<double> min_max_normalize(const std::vector<double>& values) {
  std::vector<double> out(values.size(), 0.5);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

EdgeScores score_entropy(const Graph& g, const FeatureMatrix& x, const DenseMatrix& y,
                         double combine_weight) {
  return score_entropy(g, g, x, y, combine_weight);
}

EdgeScores score_entropy(const Graph& g, const Graph& context, const FeatureMatrix& x,
                         const DenseMatrix& y, double combine_weight) {
  if (!(combine_weight >= 0.0 && combine_weight <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "entropy combine weight outside [0, 1]");
  }
  const EntropyParts parts = entropy_variation(g, context, x.values(), y);
  const std::vector<double> feature = min_max_normalize(parts.feature_raw);
  const std::vector<double> label = min_max_normalize(parts.label_raw);
  EdgeScores out = make_scores(g, "entropy");
  for (std::size_t e = 0; e < out.scores.size(); ++e) {
    out.scores[e] = (1.0 - combine_weight) * feature[e] + combine_weight * label[e];
  }
  return out;
}

namespace {

// Sequential sum, so equal rows give equal totals wherever they sit in memory.
double row_sum(const DenseMatrix& m, Eigen::Index i) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < m.cols(); ++k) total += m(i, k);
  return total;
}

}  // namespace

DenseMatrix floor_probabilities(const DenseMatrix& pred) {
  DenseMatrix p = pred.cwiseMax(kSmoothingEpsilon);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double total = row_sum(p, i);
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw Error(ErrorCode::ZeroProbability, "prediction row " + std::to_string(i));
    }
    p.row(i) /= total;
  }
  return p;
}

DenseMatrix feature_distributions(const DenseMatrix& x) {
  DenseMatrix p = x.cwiseMax(0.0).array() + kSmoothingEpsilon;
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= row_sum(p, i);
  return p;
}

namespace {

// -[KL(a||b) + KL(b||a)] = -sum (a - b)(log a - log b), given logs.
double negative_symmetric_kl(const DenseMatrix& p, const DenseMatrix& logp, NodeId u, NodeId v) {
  return -((p.row(u) - p.row(v)).array() * (logp.row(u) - logp.row(v)).array()).sum();
}

DenseMatrix checked_log(const DenseMatrix& p) {
  if ((p.array() <= 0.0).any()) throw Error(ErrorCode::ZeroProbability, "zero entry after smoothing");
  return p.array().log().matrix();
}

}  // namespace

EdgeScores score_kld(const Graph& g, const DenseMatrix& pred, const FeatureMatrix& x,
                     double feature_weight) {
  check_rows(g, pred.rows(), "prediction");
  check_rows(g, x.rows(), "feature");
  if (!(feature_weight >= 0.0)) throw Error(ErrorCode::InvalidConfig, "kld feature weight must be >= 0");

  const DenseMatrix p = floor_probabilities(pred);
  const DenseMatrix logp = checked_log(p);
  DenseMatrix q, logq;
  if (feature_weight > 0.0) {
    q = feature_distributions(x.values());
    logq = checked_log(q);
  }
  EdgeScores out = make_scores(g, "kld");
  for (std::size_t e = 0; e < out.edges.size(); ++e) {
    const auto [u, v] = out.edges[e];
    double s = negative_symmetric_kl(p, logp, u, v);
    if (feature_weight > 0.0) s += feature_weight * negative_symmetric_kl(q, logq, u, v);
    out.scores[e] = s;
  }
  return out;
}

DenseMatrix one_hot(const std::vector<int>& labels, int num_classes) {
  DenseMatrix y = DenseMatrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw Error(ErrorCode::IndexOutOfRange, "label");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

}  // namespace ugp
