#pragma once

#include <cstdint>
#include <string>

#include "ugp/dataset.hpp"
#include "ugp/gcn.hpp"

namespace ugp {

enum class AttackMethod { Dice, RandomInsert, GradSaliency };

std::string to_string(AttackMethod m);
/// Accepts dice, random (or random_insert) and grad (or grad_saliency).
AttackMethod parse_attack(const std::string& name);

struct AttackSpec {
  AttackMethod method{AttackMethod::Dice};
  /// Perturbation rate; the budget is floor(rate * K).
  double rate{0.05};
  std::uint64_t seed{0};
  /// DICE: share of the budget spent on deleting same-label edges.
  double dice_remove_fraction{0.5};
  /// Gradient attack: flips between gradient recomputations.
  int recompute_every{20};
};

struct AttackResult {
  Dataset dataset;
  EdgeList injected;
  EdgeList removed;
};

/// floor(rate * K); throws InvalidConfig for a rate outside (0, 1) and
/// BudgetInfeasible for a zero budget.
std::int64_t attack_budget(const AttackSpec& spec, std::int64_t num_edges);

/// Delete Internally, Connect Externally: removes random same-label edges
/// and inserts random cross-label non-edges. Throws BudgetInfeasible.
AttackResult attack_dice(const Dataset& d, const AttackSpec& spec);

/// Inserts uniformly random non-edges, ignoring labels. Throws BudgetInfeasible.
AttackResult attack_random_insert(const Dataset& d, const AttackSpec& spec);

/// Training-loss gradient with respect to a symmetric insertion of each
/// candidate pair (u, v), through the adjacency normalization, for fixed
/// weights. Dense N x N (upper triangle meaningful).
DenseMatrix insertion_gradient(const Graph& g, const GcnParams& params, const SparseMatrix& features,
                               std::span<const int> labels, std::span<const double> node_weights);

/// Trains a surrogate on the clean graph, then greedily inserts the non-edges
/// with the largest loss gradient, recomputing every
/// `recompute_every` flips. Throws BudgetInfeasible.
AttackResult attack_grad_saliency(const Dataset& d, const AttackSpec& spec, const TrainConfig& cfg);

AttackResult run_attack(const Dataset& d, const AttackSpec& spec, const TrainConfig& cfg);

}  // namespace ugp
