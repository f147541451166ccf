#pragma once

#include <vector>

#include "hmmep/matrix.hpp"
#include "hmmep/model.hpp"

namespace hmmep {

/// Upward-downward tables for one observed tree (n rows, J columns).
struct TreePosterior {
  Matrix prior;      ///< P(S_u = j), downward marginal recursion
  Matrix beta;       ///< beta_u(j) = P(S_u = j | observed subtree rooted at u)
  /// Row v holds beta_{parent(v), v}(j) = P(subtree of v | S_parent = j) / P(subtree of v).
  /// The root row is unused and left at zero.
  Matrix beta_edge;
  std::vector<double> normalizers;  ///< N_u; P(x) is their product
  Matrix smoothed;                  ///< xi_u(j) = P(S_u = j | x); empty until downward_pass
  double log_likelihood = 0.0;

  std::size_t size() const noexcept { return normalizers.size(); }
};

/// Marginal priors and the upward recursion, children before parents.
/// Throws Error(Numerical) naming the vertex whose N_u is zero.
TreePosterior upward_pass(const HmmModel& model, const ObservedTree& tree);

/// Downward recursion producing the smoothed probabilities.
TreePosterior downward_pass(const HmmModel& model, const ObservedTree& tree, TreePosterior up);

TreePosterior smooth_tree(const HmmModel& model, const ObservedTree& tree);

struct TreeViterbiResult {
  std::vector<StateIndex> states;
  double log_joint = 0.0;  ///< log P(S = states, X = x)
};

/// Most probable state tree by max-product upward recursion and downward
/// backtracking. The root takes the smallest maximizing state; each child takes
/// the smallest maximizing state given its parent.
TreeViterbiResult viterbi_tree(const HmmModel& model, const ObservedTree& tree);

/// Entry (u, j) = max over the other vertices' states of log P(S_u = j, rest, x).
/// Does not underflow on large trees.
Matrix viterbi_log_profiles(const HmmModel& model, const ObservedTree& tree);

/// Entry (u, j) = max over the other vertices' states of P(S_u = j, rest | x).
/// Row maxima equal exp(viterbi log joint) / P(x).
Matrix viterbi_profiles(const HmmModel& model, const ObservedTree& tree);

}  // namespace hmmep
