#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hmmep/matrix.hpp"
#include "hmmep/model.hpp"
#include "hmmep/tree_inference.hpp"

namespace hmmep {

/// Default cap on elementary terms for the children-conditioned profile.
inline constexpr std::uint64_t kDefaultChildrenBudget = 100'000'000;

/// H(S_u | x) for every vertex, from the smoothed probabilities.
std::vector<double> marginal_entropy_profile(const TreePosterior& posterior);

struct ParentConditional {
  /// H(S_0 | x) at the root, H(S_u | S_parent(u), x) elsewhere.
  std::vector<double> entropy;
  /// Per non-root vertex u: J x J matrix of P(S_parent(u) = i, S_u = j | x). Empty at the root.
  std::vector<Matrix> pairwise;
};

ParentConditional parent_conditional_profile(const HmmModel& model, const ObservedTree& tree,
                                             const TreePosterior& posterior);

/// Subtree entropies obtained from the parent-conditioned profile.
struct SubtreeEntropiesFromParents {
  std::vector<double> subtree_given_parent;  ///< H(subtree_u | S_parent(u), x); root: H(S | x)
  std::vector<double> partial_subtree;       ///< H(subtree_u | x)
  std::vector<double> partial_complement;    ///< H(all states outside subtree_u | x); 0 at the root
  double global_entropy = 0.0;
};

SubtreeEntropiesFromParents subtree_entropies_approach1(const HmmModel& model, const ObservedTree& tree,
                                                         const TreePosterior& posterior,
                                                         const ParentConditional& parent_cond);

/// (u, j) = H(states strictly below u | S_u = j, observed subtree of u); zero at leaves.
/// Reads only the upward tables (prior, beta, beta_edge), so `posterior` may come
/// straight from upward_pass.
Matrix state_conditioned_upward(const HmmModel& model, const ObservedTree& tree,
                                const TreePosterior& posterior);

/// H(S | x) from the root termination of the state-conditioned upward recursion.
/// Like state_conditioned_upward, this needs no downward pass.
double global_entropy_upward(const TreePosterior& posterior, const Matrix& state_conditioned);

/// Subtree entropies from the state-conditioned upward recursion.
struct SubtreeEntropiesUpward {
  Matrix state_conditioned_upward;
  std::vector<double> partial_subtree;
  std::vector<double> partial_complement;  ///< consumes the parent-conditioned profile; 0 at the root
  double global_entropy = 0.0;
};

SubtreeEntropiesUpward subtree_entropies_approach2(const HmmModel& model, const ObservedTree& tree,
                                                   const TreePosterior& posterior,
                                                   const ParentConditional& parent_cond);

/// H(S_u | S_children(u), x) at internal vertices, H(S_u | x) at leaves. Cost is
/// sum over internal u of J^(1 + #children(u)) terms; throws Error(Budget) naming
/// the first vertex whose branching pushes the total over `op_budget`.
std::vector<double> children_conditional_profile(const HmmModel& model, const ObservedTree& tree,
                                                 const TreePosterior& posterior,
                                                 std::uint64_t op_budget = kDefaultChildrenBudget);

struct TreeEntropyProfile {
  std::vector<double> marginal;
  std::vector<double> parent_conditional;
  std::vector<double> children_conditional;
  std::vector<double> subtree_given_parent;
  std::vector<double> partial_subtree;
  std::vector<double> partial_complement;
  Matrix state_conditioned_upward;
  double global_entropy = 0.0;
};

/// Every tree profile. Subtree fields come from the parent-conditioned route;
/// `state_conditioned_upward` from the upward route.
TreeEntropyProfile tree_entropy_profile(const HmmModel& model, const ObservedTree& tree,
                                        const TreePosterior& posterior,
                                        std::uint64_t op_budget = kDefaultChildrenBudget);

/// Sums of parent-conditioned (G), children-conditioned (C) and marginal (M)
/// entropies, with the relative gaps (C - G)/G and (M - G)/G.
struct EntropySummary {
  double parent_sum = 0.0;
  double children_sum = 0.0;
  double marginal_sum = 0.0;
  std::optional<double> ratio_children;  ///< unset when G is zero
  std::optional<double> ratio_marginal;
};

/// G at or below this is treated as zero and the ratios are left unset.
inline constexpr double kZeroEntropy = 1e-12;

EntropySummary entropy_summary(const TreeEntropyProfile& profile);

}  // namespace hmmep
