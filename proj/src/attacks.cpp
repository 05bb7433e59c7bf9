#include "ugp/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "ugp/error.hpp"

namespace ugp {

std::string to_string(AttackMethod m) {
  switch (m) {
    case AttackMethod::Dice: return "dice";
    case AttackMethod::RandomInsert: return "random";
    case AttackMethod::GradSaliency: return "grad";
  }
  return "unknown";
}

AttackMethod parse_attack(const std::string& name) {
  if (name == "dice") return AttackMethod::Dice;
  if (name == "random" || name == "random_insert") return AttackMethod::RandomInsert;
  if (name == "grad" || name == "grad_saliency") return AttackMethod::GradSaliency;
  throw Error(ErrorCode::InvalidConfig, "unknown attack method '" + name + "'");
}

std::int64_t attack_budget(const AttackSpec& spec, std::int64_t num_edges) {
  if (!(spec.rate > 0.0 && spec.rate < 1.0)) throw Error(ErrorCode::InvalidConfig, "attack rate must lie in (0, 1)");
  const auto budget = static_cast<std::int64_t>(std::floor(spec.rate * static_cast<double>(num_edges)));
  if (budget < 1) throw Error(ErrorCode::BudgetInfeasible, "rate gives a zero perturbation budget");
  return budget;
}

namespace {

// Draws `count` distinct non-edges (u < v) accepted by `allowed`, given how
// many such pairs exist. Dense enumeration when the pool is small relative
// to the request, rejection sampling otherwise.
template <typename Allowed>
EdgeList sample_non_edges(const Graph& g, std::int64_t count, std::int64_t pool, Allowed allowed,
                          std::mt19937_64& rng) {
  if (pool < count) {
    throw Error(ErrorCode::BudgetInfeasible, "need " + std::to_string(count) + " non-edges, only " +
                                                 std::to_string(pool) + " available");
  }
  const NodeId n = g.num_nodes();
  EdgeList out;
  if (pool <= 4 * count + 64) {
    EdgeList all;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (allowed(u, v) && !g.has_edge(u, v)) all.push_back({u, v});
      }
    }
    std::shuffle(all.begin(), all.end(), rng);
    out.assign(all.begin(), all.begin() + count);
  } else {
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    std::set<Edge> chosen;
    while (static_cast<std::int64_t>(out.size()) < count) {
      const NodeId a = pick(rng), b = pick(rng);
      if (a == b) continue;
      const Edge e = Edge::canonical(a, b);
      if (!allowed(e.u, e.v) || g.has_edge(e.u, e.v) || !chosen.insert(e).second) continue;
      out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

AttackResult attack_dice(const Dataset& d, const AttackSpec& spec) {
  if (!(spec.dice_remove_fraction >= 0.0 && spec.dice_remove_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "dice remove fraction must lie in [0, 1]");
  }
  const std::int64_t budget = attack_budget(spec, d.graph.num_edges());
  const auto n_remove = static_cast<std::int64_t>(std::floor(spec.dice_remove_fraction * static_cast<double>(budget)));
  const std::int64_t n_insert = budget - n_remove;
  std::mt19937_64 rng(spec.seed);

  EdgeList same;
  std::int64_t cross_edges = 0;
  for (const Edge& e : d.graph.edges()) {
    if (d.labels[e.u] == d.labels[e.v]) {
      same.push_back(e);
    } else {
      ++cross_edges;
    }
  }
  if (static_cast<std::int64_t>(same.size()) < n_remove) {
    throw Error(ErrorCode::BudgetInfeasible, "not enough same-label edges to delete");
  }
  std::shuffle(same.begin(), same.end(), rng);
  AttackResult out;
  out.removed.assign(same.begin(), same.begin() + n_remove);
  std::sort(out.removed.begin(), out.removed.end());

  std::vector<std::int64_t> class_size(static_cast<std::size_t>(d.num_classes), 0);
  for (int y : d.labels) ++class_size[y];
  const std::int64_t n = d.num_nodes();
  std::int64_t same_pairs = 0;
  for (std::int64_t c : class_size) same_pairs += c * (c - 1) / 2;
  const std::int64_t cross_pool = n * (n - 1) / 2 - same_pairs - cross_edges;

  out.injected = sample_non_edges(
      d.graph, n_insert, cross_pool, [&](NodeId u, NodeId v) { return d.labels[u] != d.labels[v]; }, rng);

  out.dataset = with_graph(d, add_edges(remove_edges(d.graph, out.removed), out.injected));
  return out;
}

AttackResult attack_random_insert(const Dataset& d, const AttackSpec& spec) {
  const std::int64_t budget = attack_budget(spec, d.graph.num_edges());
  std::mt19937_64 rng(spec.seed);
  const std::int64_t n = d.num_nodes();
  const std::int64_t pool = n * (n - 1) / 2 - d.graph.num_edges();
  AttackResult out;
  out.injected = sample_non_edges(d.graph, budget, pool, [](NodeId, NodeId) { return true; }, rng);
  out.dataset = with_graph(d, add_edges(d.graph, out.injected));
  return out;
}

DenseMatrix insertion_gradient(const Graph& g, const GcnParams& params, const SparseMatrix& features,
                               std::span<const int> labels, std::span<const double> node_weights) {
  const SparseMatrix a_hat = normalize_adjacency(g);
  const ForwardCache c = gcn_forward(params, features, a_hat, 0.0, nullptr);
  const NodeId n = g.num_nodes();

  DenseMatrix d_logits = DenseMatrix::Zero(n, c.probs.cols());
  for (NodeId i = 0; i < n; ++i) {
    if (node_weights[i] == 0.0) continue;
    d_logits.row(i) = node_weights[i] * c.probs.row(i);
    d_logits(i, labels[i]) -= node_weights[i];
  }
  const DenseMatrix d_hidden = a_hat * (d_logits * params.w2.transpose());
  const DenseMatrix d_pre = (c.pre_hidden.array() > 0.0).select(d_hidden, 0.0);

  // dL/dA_hat = d_logits (H W2)^T + d_pre (X W1)^T, as one product.
  DenseMatrix left(n, d_logits.cols() + d_pre.cols());
  left << d_logits, d_pre;
  DenseMatrix right(n, d_logits.cols() + d_pre.cols());
  right << c.hidden * params.w2, c.xw;
  const DenseMatrix grad_a_hat = left * right.transpose();

  // Chain rule through A_hat_ij = (A + I)_ij / sqrt(deg_i deg_j), deg = 1 + degree.
  std::vector<double> deg(static_cast<std::size_t>(n)), through_degree(static_cast<std::size_t>(n), 0.0);
  for (NodeId i = 0; i < n; ++i) deg[i] = static_cast<double>(g.degree(i) + 1);
  for (NodeId i = 0; i < n; ++i) {
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(a_hat, i); it; ++it) {
      acc += (grad_a_hat(i, it.col()) + grad_a_hat(it.col(), i)) * it.value();
    }
    through_degree[i] = -acc / (2.0 * deg[i]);
  }
  DenseMatrix out(n, n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      out(u, v) = (grad_a_hat(u, v) + grad_a_hat(v, u)) / std::sqrt(deg[u] * deg[v]) + through_degree[u] +
                  through_degree[v];
    }
  }
  return out;
}

AttackResult attack_grad_saliency(const Dataset& d, const AttackSpec& spec, const TrainConfig& cfg) {
  if (spec.recompute_every < 1) throw Error(ErrorCode::InvalidConfig, "recompute period must be >= 1");
  const std::int64_t budget = attack_budget(spec, d.graph.num_edges());
  const std::int64_t n = d.num_nodes();
  if (n * (n - 1) / 2 - d.graph.num_edges() < budget) {
    throw Error(ErrorCode::BudgetInfeasible, "not enough non-edges for the budget");
  }
  TrainConfig train_cfg = cfg;
  train_cfg.seed = spec.seed;
  const GcnInputs inputs = prepare_inputs(d);
  const SurrogateModel model = train_surrogate(inputs, d, train_cfg);
  const std::vector<double> weights = mean_weights(d.num_nodes(), d.split.train);

  Graph current = d.graph;
  AttackResult out;
  while (static_cast<std::int64_t>(out.injected.size()) < budget) {
    const DenseMatrix grad = insertion_gradient(current, model.params, inputs.features, d.labels, weights);
    struct Candidate {
      double grad;
      Edge e;
    };
    std::vector<Candidate> candidates;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (!current.has_edge(u, v)) candidates.push_back({grad(u, v), {u, v}});
      }
    }
    const auto take = static_cast<std::size_t>(
        std::min<std::int64_t>(spec.recompute_every, budget - static_cast<std::int64_t>(out.injected.size())));
    auto better = [](const Candidate& a, const Candidate& b) {
      return a.grad != b.grad ? a.grad > b.grad : a.e < b.e;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(), better);
    EdgeList batch;
    for (std::size_t i = 0; i < take; ++i) batch.push_back(candidates[i].e);
    current = add_edges(current, batch);
    out.injected.insert(out.injected.end(), batch.begin(), batch.end());
  }
  std::sort(out.injected.begin(), out.injected.end());
  out.dataset = with_graph(d, std::move(current));
  return out;
}

AttackResult run_attack(const Dataset& d, const AttackSpec& spec, const TrainConfig& cfg) {
  switch (spec.method) {
    case AttackMethod::Dice: return attack_dice(d, spec);
    case AttackMethod::RandomInsert: return attack_random_insert(d, spec);
    case AttackMethod::GradSaliency: return attack_grad_saliency(d, spec, cfg);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown attack");
}

}  // namespace ugp
