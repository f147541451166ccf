#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "generators.hpp"
#include "hmmep/chain_inference.hpp"
#include "hmmep/error.hpp"
#include "hmmep/oracle.hpp"
#include "hmmep/tree_inference.hpp"

using namespace hmmep;
using namespace hmmep::testing;

TEST_CASE("single vertex reduces to Bayes rule") {
  const ObservedTree t{TreeTopology::path(1), ObservedSequence::univariate({0})};
  const auto up = upward_pass(m1(), t);
  CHECK(std::abs(up.beta(0, 0) - 0.8) <= 1e-15);
  CHECK(std::abs(up.beta(0, 1) - 0.2) <= 1e-15);
  CHECK(std::abs(up.normalizers[0] - 0.5) <= 1e-15);
  const auto prof = viterbi_profiles(m1(), t);
  CHECK(std::abs(prof(0, 0) - 0.8) <= 1e-15);
  CHECK(std::abs(prof(0, 1) - 0.2) <= 1e-15);
}

TEST_CASE("star tree, M1, x=(0,0,0)") {
  const ObservedTree t = star_tree({0, 0, 0});
  const auto post = smooth_tree(m1(), t);
  CHECK(std::abs(std::exp(post.log_likelihood) - 0.2258) <= 1e-14);
  CHECK(std::abs(post.normalizers[0] * post.normalizers[1] * post.normalizers[2] - 0.2258) <= 1e-14);
  CHECK(std::abs(post.smoothed(0, 0) - 0.970062001771479) <= 1e-12);
  CHECK(std::abs(post.smoothed(1, 0) - 0.9530558015943312) <= 1e-12);
  CHECK(std::abs(post.smoothed(2, 1) - 0.04694419840566874) <= 1e-12);
  CHECK(post.smoothed(0, 0) == post.beta(0, 0));

  const auto vit = viterbi_tree(m1(), t);
  CHECK(vit.states == std::vector<StateIndex>{0, 0, 0});
  CHECK(std::abs(std::exp(vit.log_joint) - 0.20736) <= 1e-15);

  const auto prof = viterbi_profiles(m1(), t);
  CHECK(std::abs(prof(0, 1) - 0.1 * 0.18 * 0.18 / 0.2258) <= 1e-12);
  CHECK(std::abs(prof(1, 1) - 0.02550930026572188) <= 1e-12);
  for (VertexId u = 0; u < 3; ++u) CHECK(std::abs(prof(u, 0) - 0.20736 / 0.2258) <= 1e-12);
}

TEST_CASE("state-revealing and uniform degenerate trees") {
  const HmmModel rev = state_revealing(3);
  const ObservedTree t{TreeTopology::from_parents({kNoParent, 0, 0, 1, 1}), ObservedSequence::univariate({1, 1, 2, 1, 0})};
  const auto post = smooth_tree(rev, t);
  const auto prof = viterbi_profiles(rev, t);
  for (VertexId u = 0; u < 5; ++u) {
    for (StateIndex j = 0; j < 3; ++j) {
      const double ind = static_cast<long>(j) == t.values.at(u)[0] ? 1.0 : 0.0;
      CHECK(std::abs(post.smoothed(u, j) - ind) <= 1e-15);
      CHECK(std::abs(prof(u, j) - ind) <= 1e-12);
    }
  }
  CHECK(viterbi_tree(rev, t).states == std::vector<StateIndex>{1, 1, 2, 1, 0});

  const ObservedTree binary{t.topology, ObservedSequence::univariate({0, 1, 1, 0, 1})};
  const auto uni = smooth_tree(uniform_degenerate(2), binary);
  for (VertexId u = 0; u < 5; ++u) CHECK(std::abs(uni.smoothed(u, 1) - 0.5) <= 1e-15);
  CHECK(viterbi_tree(uniform_degenerate(2), binary).states == std::vector<StateIndex>{0, 0, 0, 0, 0});
}

TEST_CASE("impossible tree observation names the vertex") {
  HmmModel m = state_revealing(2);
  m.transition(0, 0) = 1.0;
  m.transition(0, 1) = 0.0;
  const ObservedTree t{TreeTopology::from_parents({kNoParent, 0, 0}), ObservedSequence::univariate({0, 0, 1})};
  try {
    upward_pass(m, t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
    CHECK(std::string(e.what()).find("vertex") != std::string::npos);
  }
  CHECK_THROWS_AS(viterbi_tree(m, t), Error);
}

TEST_CASE("paths reproduce chain inference") {
  Rng rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t J = pick(rng, 1, 4);
    const HmmModel m = random_categorical_model(rng, J, {3}, 0.2);
    const auto seq = random_observations(rng, m, pick(rng, 1, 300));
    const auto chain = smooth_chain(m, seq);
    const auto tree = smooth_tree(m, ObservedTree{TreeTopology::path(seq.length()), seq});
    CHECK(max_abs_diff(chain.smoothed, tree.smoothed) <= 1e-10);
    CHECK(std::abs(chain.log_likelihood - tree.log_likelihood) <= 1e-10);
    // Chains resolve ties from the last position, trees from the root, so the
    // paths may differ only when several configurations are optimal.
    const ObservedTree path{TreeTopology::path(seq.length()), seq};
    const auto vc = viterbi_chain(m, seq);
    const auto vt = viterbi_tree(m, path);
    CHECK(std::abs(vc.log_joint - vt.log_joint) <= 1e-9);
    CHECK(std::abs(path_log_joint(m, path.topology, seq, vt.states) - vc.log_joint) <= 1e-9);
    if (viterbi_unique(viterbi_log_profiles(m, path), 1e-9)) CHECK(vc.states == vt.states);
  }
}

TEST_CASE("tree inference matches enumeration on random topologies") {
  Rng rng(37);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t J = pick(rng, 2, 3);
    const std::size_t n = pick(rng, 1, J == 2 ? 10 : 8);
    const HmmModel m = random_categorical_model(rng, J, {pick(rng, 2, 3)}, rep % 3 == 0 ? 0.3 : 0.0);
    const ObservedTree t{random_shape(rng, n), random_observations(rng, m, n)};
    const auto post = smooth_tree(m, t);
    const auto oracle = enumerate_tree(m, t);
    CHECK(max_abs_diff(post.smoothed, oracle_marginals(oracle)) <= 1e-10);
    CHECK(std::abs(std::exp(post.log_likelihood) / oracle.evidence - 1.0) <= 1e-9);
    for (VertexId u = 0; u < n; ++u) {
      double s = 0.0;
      for (StateIndex j = 0; j < J; ++j) s += post.prior(u, j);
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }

    const auto vit = viterbi_tree(m, t);
    const auto best = oracle_argmax(oracle);
    CHECK(vit.states == best.states);
    CHECK(std::abs(std::exp(vit.log_joint) - best.joint_probability) <= 1e-10);

    const Matrix prof = viterbi_profiles(m, t);
    for (VertexId u = 0; u < n; ++u) {
      double row_max = 0.0;
      for (StateIndex j = 0; j < J; ++j) {
        CHECK(std::abs(prof(u, j) - oracle_entropy(oracle, {OracleQueryKind::ViterbiProfile, u, j})) <= 1e-10);
        row_max = std::max(row_max, prof(u, j));
      }
      CHECK(std::abs(row_max - std::exp(vit.log_joint - post.log_likelihood)) <= 1e-10);
    }
  }
}
