#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hmmep/matrix.hpp"

namespace hmmep {

using StateIndex = std::size_t;
using VertexId = std::size_t;

inline constexpr VertexId kNoParent = std::numeric_limits<VertexId>::max();

/// Probability-sum tolerance applied when validating input models.
inline constexpr double kProbabilityTolerance = 1e-9;

struct CategoricalDist {
  std::vector<double> probs;
  friend bool operator==(const CategoricalDist&, const CategoricalDist&) = default;
};

struct PoissonDist {
  double rate = 0.0;
  friend bool operator==(const PoissonDist&, const PoissonDist&) = default;
};

using VariableDist = std::variant<CategoricalDist, PoissonDist>;

/// Emission law of one state: independent variables, one distribution each.
struct StateEmission {
  std::vector<VariableDist> variables;
  friend bool operator==(const StateEmission&, const StateEmission&) = default;
};

/// Fully specified hidden Markov model, shared by chains and trees. For trees
/// `initial` is the root law and `transition(i, j)` is P(child = j | parent = i).
struct HmmModel {
  std::size_t num_states = 0;
  std::vector<double> initial;
  Matrix transition;
  std::vector<StateEmission> emissions;

  std::size_t num_variables() const noexcept {
    return emissions.empty() ? 0 : emissions.front().variables.size();
  }

  friend bool operator==(const HmmModel&, const HmmModel&) = default;
};

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_model(const HmmModel& model);

/// Throws Error(Data) carrying the report when the model is invalid.
void require_valid(const HmmModel& model);

/// T x V matrix of non-negative integer observations.
class ObservedSequence {
 public:
  ObservedSequence() = default;
  ObservedSequence(std::size_t num_variables, std::vector<long> values);

  /// Univariate convenience constructor.
  static ObservedSequence univariate(std::vector<long> values);

  std::size_t length() const noexcept { return num_variables_ ? values_.size() / num_variables_ : 0; }
  std::size_t num_variables() const noexcept { return num_variables_; }
  std::span<const long> at(std::size_t t) const {
    return {values_.data() + t * num_variables_, num_variables_};
  }
  std::span<const long> values() const noexcept { return values_; }

  friend bool operator==(const ObservedSequence&, const ObservedSequence&) = default;

 private:
  std::size_t num_variables_ = 0;
  std::vector<long> values_;
};

/// Rooted tree given by a parent array; vertex 0 is the root.
class TreeTopology {
 public:
  TreeTopology() = default;

  /// Validates: single root at vertex 0, every parent id in range, no cycles.
  static TreeTopology from_parents(std::vector<VertexId> parents);
  static TreeTopology path(std::size_t n);

  std::size_t size() const noexcept { return parents_.size(); }
  VertexId parent(VertexId u) const { return parents_[u]; }
  std::span<const VertexId> children(VertexId u) const { return children_[u]; }
  bool is_leaf(VertexId u) const { return children_[u].empty(); }
  std::span<const VertexId> parents() const noexcept { return parents_; }

  /// Parents before children; reverse it for an upward sweep.
  std::span<const VertexId> topological_order() const noexcept { return order_; }

  friend bool operator==(const TreeTopology& a, const TreeTopology& b) {
    return a.parents_ == b.parents_;
  }

 private:
  std::vector<VertexId> parents_;
  std::vector<std::vector<VertexId>> children_;
  std::vector<VertexId> order_;
};

struct ObservedTree {
  TreeTopology topology;
  /// One row per vertex, aligned with vertex ids.
  ObservedSequence values;

  std::size_t size() const noexcept { return topology.size(); }
  friend bool operator==(const ObservedTree&, const ObservedTree&) = default;
};

/// Product over variables of the per-variable probabilities. Throws Error(Data)
/// when the observation does not fit the variable signature.
double emission_prob(const HmmModel& model, StateIndex state, std::span<const long> observation);

/// Rows = positions of `obs`, columns = states; entry (t, j) = b_j(x_t).
Matrix emission_table(const HmmModel& model, const ObservedSequence& obs);

struct SimulatedChain {
  std::vector<StateIndex> states;
  ObservedSequence observations;
};

struct SimulatedTree {
  std::vector<StateIndex> states;
  ObservedTree observations;
};

SimulatedChain simulate_chain(const HmmModel& model, std::size_t length, unsigned long long seed);
SimulatedTree simulate_tree(const HmmModel& model, const TreeTopology& topology,
                            unsigned long long seed);

}  // namespace hmmep
