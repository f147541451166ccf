#pragma once

#include <cstdint>
#include <vector>

#include "hmmep/matrix.hpp"
#include "hmmep/model.hpp"

namespace hmmep {

/// Default cap on the number of enumerated state configurations.
inline constexpr std::uint64_t kDefaultOracleBudget = 10'000'000;

/// Exact posterior over every joint state assignment of a small chain or tree.
///
/// Configuration c assigns state (c / J^u) mod J to position u, so position 0 is
/// the least significant digit. Chains are stored as paths (parent of t is t-1).
struct OracleResult {
  enum class Shape { Chain, Tree };

  Shape shape = Shape::Chain;
  std::size_t num_states = 0;
  std::vector<VertexId> parents;
  std::vector<double> posterior;  ///< P(S = c | x), indexed by configuration
  double evidence = 0.0;          ///< P(x)
  double log_evidence = 0.0;

  std::size_t num_positions() const noexcept { return parents.size(); }
  std::size_t num_configurations() const noexcept { return posterior.size(); }
  StateIndex state_of(std::uint64_t config, VertexId u) const;
};

OracleResult enumerate_chain(const HmmModel& model, const ObservedSequence& seq,
                             std::uint64_t config_budget = kDefaultOracleBudget);

OracleResult enumerate_tree(const HmmModel& model, const ObservedTree& tree,
                            std::uint64_t config_budget = kDefaultOracleBudget);

enum class OracleQueryKind {
  Global,               ///< H(S | x)
  Marginal,             ///< H(S_u | x)
  ParentConditional,    ///< H(S_u | S_parent(u), x); past-conditioned for chains; H(S_0 | x) at the root
  ChildrenConditional,  ///< H(S_u | S_children(u), x); future-conditioned for chains; marginal at leaves
  PrefixPartial,        ///< H(S_0..S_u | x), positions 0..u by index (chains)
  SubtreePartial,       ///< H(subtree_u | x); the suffix S_u..S_{T-1} for chains
  ComplementPartial,    ///< H(states outside subtree_u | x); 0 at the root
  SubtreeGivenParent,   ///< H(subtree_u | S_parent(u), x); H(S | x) at the root
  AncestorsGivenState,  ///< H(strict ancestors of u | S_u = j, x); past Hernando table for chains
  DescendantsGivenState,///< H(strict descendants of u | S_u = j, x); future Hernando table for chains
  ViterbiProfile,       ///< max over configurations with S_u = j of P(S | x)
};

struct OracleQuery {
  OracleQueryKind kind = OracleQueryKind::Global;
  VertexId vertex = 0;
  StateIndex state = 0;
};

/// Evaluates one quantity by direct summation (or maximization) over the
/// configurations. Throws Error(Usage) for out-of-range vertices or states and
/// Error(Data) when conditioning on a zero-probability state.
double oracle_entropy(const OracleResult& result, const OracleQuery& query);

/// n x J smoothed probabilities P(S_u = j | x).
Matrix oracle_marginals(const OracleResult& result);

struct OracleArgmax {
  std::vector<StateIndex> states;
  double joint_probability = 0.0;  ///< P(S = states, X = x)
};

/// Most probable configuration. Configurations within relative 1e-12 of the
/// maximum count as tied; ties resolve to the smallest state at the position
/// the matching restoration algorithm fixes first: the last position for
/// chains, then backwards; the root for trees, then parents before children.
OracleArgmax oracle_argmax(const OracleResult& result);

}  // namespace hmmep
