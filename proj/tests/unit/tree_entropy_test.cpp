#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "generators.hpp"
#include "hmmep/error.hpp"
#include "hmmep/numeric.hpp"
#include "hmmep/oracle.hpp"
#include "hmmep/tree_entropy.hpp"

using namespace hmmep;
using namespace hmmep::testing;

namespace {

struct Instance {
  HmmModel model;
  ObservedTree tree;
};

TreeEntropyProfile full_profile(const Instance& in) {
  return tree_entropy_profile(in.model, in.tree, smooth_tree(in.model, in.tree));
}

}  // namespace

TEST_CASE("star tree, M1, x=(0,0,0)") {
  const Instance in{m1(), star_tree({0, 0, 0})};
  const auto p = full_profile(in);
  CHECK(std::abs(p.global_entropy - 0.412546575904582) <= 1e-9);
  CHECK(std::abs(p.marginal[0] - 0.134526577807134) <= 1e-10);
  CHECK(std::abs(p.marginal[1] - 0.189417370673273) <= 1e-10);
  CHECK(std::abs(p.parent_conditional[0] - 0.134526577807134) <= 1e-10);
  CHECK(std::abs(p.parent_conditional[1] - 0.139009999048724) <= 1e-10);
  CHECK(std::abs(p.parent_conditional[2] - 0.139009999048724) <= 1e-10);
  CHECK(std::abs(p.children_conditional[0] - 0.0539931324268692) <= 1e-10);
  CHECK(std::abs(p.children_conditional[1] - p.marginal[1]) <= 1e-15);
  CHECK(std::abs(p.partial_subtree[0] - p.global_entropy) <= 1e-15);
  CHECK(p.partial_complement[0] == 0.0);
  for (StateIndex j = 0; j < 2; ++j) {
    CHECK(p.state_conditioned_upward(1, j) == 0.0);
    CHECK(p.state_conditioned_upward(2, j) == 0.0);
  }
}

TEST_CASE("single-vertex tree") {
  const Instance in{m1(), ObservedTree{TreeTopology::path(1), ObservedSequence::univariate({1})}};
  const auto p = full_profile(in);
  CHECK(p.parent_conditional == p.marginal);
  CHECK(p.children_conditional == p.marginal);
  CHECK(std::abs(p.global_entropy - p.marginal[0]) <= 1e-15);
  const auto s = entropy_summary(p);
  CHECK(s.parent_sum == s.children_sum);
  CHECK(s.parent_sum == s.marginal_sum);
}

TEST_CASE("deterministic emissions: zero entropies and undefined ratios") {
  const Instance in{state_revealing(3), ObservedTree{kary_topology(13, 3), ObservedSequence::univariate({0, 1, 2, 2, 1, 0, 0, 1, 2, 1, 1, 0, 2})}};
  const auto p = full_profile(in);
  for (const auto* v : {&p.marginal, &p.parent_conditional, &p.children_conditional, &p.subtree_given_parent,
                        &p.partial_subtree, &p.partial_complement}) {
    for (double x : *v) CHECK(std::abs(x) <= 1e-15);
  }
  CHECK(std::abs(p.global_entropy) <= 1e-15);
  const auto s = entropy_summary(p);
  CHECK_FALSE(s.ratio_children.has_value());
  CHECK_FALSE(s.ratio_marginal.has_value());
}

TEST_CASE("children-conditioned budget is enforced with the branching factor") {
  const Instance in{m1(), ObservedTree{star_topology(12), ObservedSequence::univariate(std::vector<long>(12, 0))}};
  const auto post = smooth_tree(in.model, in.tree);
  // One internal vertex with 11 children: 2^12 terms.
  CHECK_NOTHROW(children_conditional_profile(in.model, in.tree, post, 4096));
  try {
    children_conditional_profile(in.model, in.tree, post, 4095);
    FAIL("expected a budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Budget);
    CHECK(std::string(e.what()).find("11 children") != std::string::npos);
  }
}

TEST_CASE("the upward route needs no downward pass") {
  Rng rng(41);
  const HmmModel m = random_categorical_model(rng, 3, {3}, 0.2);
  const ObservedTree t{random_topology(rng, 40), random_observations(rng, m, 40)};
  const TreePosterior up = upward_pass(m, t);
  REQUIRE(up.smoothed.empty());
  const Matrix table = state_conditioned_upward(m, t, up);
  const TreePosterior full = downward_pass(m, t, up);
  const auto a1 = subtree_entropies_approach1(m, t, full, parent_conditional_profile(m, t, full));
  CHECK(max_abs_diff(table, state_conditioned_upward(m, t, full)) == 0.0);
  CHECK(std::abs(global_entropy_upward(up, table) - a1.global_entropy) <= 1e-9);
}

TEST_CASE("tree entropy against the enumeration oracle") {
  Rng rng(43);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t J = pick(rng, 1, 3);
    const std::size_t n = pick(rng, 1, 8);
    const HmmModel m = random_categorical_model(rng, J, {pick(rng, 2, 3)}, rep % 2 ? 0.25 : 0.0);
    const Instance in{m, ObservedTree{random_shape(rng, n), random_observations(rng, m, n)}};
    const auto post = smooth_tree(in.model, in.tree);
    const auto p = tree_entropy_profile(in.model, in.tree, post);
    const auto parent = parent_conditional_profile(in.model, in.tree, post);
    const auto a2 = subtree_entropies_approach2(in.model, in.tree, post, parent);
    const auto oracle = enumerate_tree(in.model, in.tree);

    CHECK(std::abs(p.global_entropy - oracle_entropy(oracle, {})) <= 1e-9);
    CHECK(std::abs(a2.global_entropy - p.global_entropy) <= 1e-9);
    CHECK(std::abs(compensated_sum(p.parent_conditional) - a2.global_entropy) <= 1e-9);
    CHECK(compensated_sum(p.children_conditional) >= p.global_entropy - 1e-9);
    const Matrix marg = oracle_marginals(oracle);
    for (VertexId u = 0; u < n; ++u) {
      auto q = [&](OracleQueryKind k) { return oracle_entropy(oracle, {k, u, 0}); };
      CHECK(std::abs(p.marginal[u] - q(OracleQueryKind::Marginal)) <= 1e-9);
      CHECK(std::abs(p.parent_conditional[u] - q(OracleQueryKind::ParentConditional)) <= 1e-9);
      CHECK(std::abs(p.children_conditional[u] - q(OracleQueryKind::ChildrenConditional)) <= 1e-9);
      CHECK(std::abs(p.subtree_given_parent[u] - q(OracleQueryKind::SubtreeGivenParent)) <= 1e-9);
      CHECK(std::abs(p.partial_subtree[u] - q(OracleQueryKind::SubtreePartial)) <= 1e-9);
      CHECK(std::abs(p.partial_complement[u] - q(OracleQueryKind::ComplementPartial)) <= 1e-9);
      CHECK(std::abs(a2.partial_subtree[u] - p.partial_subtree[u]) <= 1e-9);
      CHECK(std::abs(a2.partial_complement[u] - p.partial_complement[u]) <= 1e-9);
      CHECK(p.parent_conditional[u] <= p.marginal[u] + 1e-12);
      CHECK(p.children_conditional[u] <= p.marginal[u] + 1e-12);
      if (in.tree.topology.is_leaf(u)) {
        CHECK(std::abs(p.partial_complement[u] + p.parent_conditional[u] - p.global_entropy) <= 1e-9);
      }
      for (StateIndex j = 0; j < J; ++j) {
        if (marg(u, j) < 1e-6) continue;
        CHECK(std::abs(p.state_conditioned_upward(u, j) -
                       oracle_entropy(oracle, {OracleQueryKind::DescendantsGivenState, u, j})) <= 1e-9);
      }
      const auto& pair = parent.pairwise[u];
      if (u > 0) {
        double total = 0.0;
        for (std::size_t i = 0; i < pair.rows() * pair.cols(); ++i) total += pair.data()[i];
        CHECK(std::abs(total - 1.0) <= 1e-9);
      }
    }
    const auto s = entropy_summary(p);
    CHECK(s.parent_sum <= s.children_sum + 1e-9);
    CHECK(s.children_sum <= s.marginal_sum + 1e-9);
    if (s.ratio_children) CHECK(*s.ratio_children <= *s.ratio_marginal + 1e-9);
  }
}

TEST_CASE("simulated M1 binary trees with n = 200 follow the G <= C <= M pattern") {
  Rng rng(47);
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto topo = random_binary_topology(rng, 200);
    const auto sim = simulate_tree(m1(), topo, seed);
    const auto p = tree_entropy_profile(m1(), sim.observations, smooth_tree(m1(), sim.observations));
    const auto s = entropy_summary(p);
    REQUIRE(s.ratio_children.has_value());
    CHECK(*s.ratio_children >= -1e-12);
    CHECK(*s.ratio_children <= *s.ratio_marginal);
    CHECK(std::abs(s.parent_sum - p.global_entropy) <= 1e-9);
  }
}
