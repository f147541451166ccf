#include <doctest.h>

#include <cmath>
#include <map>

#include "generators.hpp"
#include "fixtures.hpp"
#include "hmmep/error.hpp"
#include "hmmep/model.hpp"

using namespace hmmep;
using namespace hmmep::testing;

namespace {

HmmModel pine5() {
  HmmModel m = make_model({1, 0, 0, 0, 0},
                          {{0.18, 0.47, 0.33, 0.02, 0},
                           {0.01, 0.51, 0.45, 0.00, 0.03},
                           {0, 0, 0.04, 0.96, 0},
                           {0, 0, 0, 0, 1},
                           {0, 0, 1, 0, 0}},
                          {{0.86, 0.14}, {1, 0}, {1, 0}, {1, 0}, {1, 0}});
  return m;
}

bool mentions(const ValidationReport& r, const std::string& field, const std::string& text) {
  for (const auto& v : r.violations) {
    if (v.field == field && v.message.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate_model accepts the 5-state pine matrix with structural zeros") {
  CHECK(validate_model(pine5()).ok());
}

TEST_CASE("validate_model accepts a single-state model") {
  CHECK(validate_model(make_model({1.0}, {{1.0}}, {{0.3, 0.7}})).ok());
}

TEST_CASE("validate_model names a transition row that sums to 1.1") {
  const auto r = validate_model(make_model({0.5, 0.5}, {{0.5, 0.6}, {0.5, 0.5}}, {{1.0}, {1.0}}));
  REQUIRE_FALSE(r.ok());
  CHECK(mentions(r, "transition[0]", "row 0 sums to 1.1"));
  CHECK_THROWS_AS(require_valid(make_model({0.5, 0.5}, {{0.5, 0.6}, {0.5, 0.5}}, {{1.0}, {1.0}})), Error);
}

TEST_CASE("validate_model flags mismatched signatures and bad Poisson rates") {
  HmmModel m = m1();
  m.emissions[1].variables[0] = CategoricalDist{{0.5, 0.25, 0.25}};
  CHECK_FALSE(validate_model(m).ok());
  m = m1();
  m.emissions[1].variables[0] = PoissonDist{1.0};
  CHECK_FALSE(validate_model(m).ok());
  HmmModel p = make_model({1.0}, {{1.0}}, {});
  p.emissions = {StateEmission{{PoissonDist{-1.0}}}};
  CHECK_FALSE(validate_model(p).ok());
  p.emissions = {StateEmission{{PoissonDist{0.0}}}};
  CHECK(validate_model(p).ok());
}

TEST_CASE("validate_model accepts generated models and rejects every +-0.01 single-entry perturbation") {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t J = pick(rng, 1, 4);
    HmmModel m = random_categorical_model(rng, J, {pick(rng, 2, 4), pick(rng, 2, 3)}, 0.2);
    REQUIRE(validate_model(m).ok());
    for (double delta : {0.01, -0.01}) {
      for (std::size_t j = 0; j < J; ++j) {
        HmmModel bad = m;
        bad.initial[j] += delta;
        CHECK_FALSE(validate_model(bad).ok());
        for (std::size_t k = 0; k < J; ++k) {
          bad = m;
          bad.transition(j, k) += delta;
          CHECK_FALSE(validate_model(bad).ok());
        }
        bad = m;
        std::get<CategoricalDist>(bad.emissions[j].variables[1]).probs[0] += delta;
        CHECK_FALSE(validate_model(bad).ok());
      }
    }
  }
}

TEST_CASE("emission_prob examples") {
  HmmModel pois = make_model({1.0}, {{1.0}}, {});
  pois.emissions = {StateEmission{{PoissonDist{2.0}}}};
  const long zero[] = {0};
  CHECK(emission_prob(pois, 0, zero) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));

  HmmModel two = make_model({1.0}, {{1.0}}, {});
  two.emissions = {StateEmission{{CategoricalDist{{0.8, 0.2}}, CategoricalDist{{0.5, 0.5}}}}};
  const long x01[] = {0, 1};
  CHECK(emission_prob(two, 0, x01) == doctest::Approx(0.40).epsilon(1e-14));

  const HmmModel rev = state_revealing(3);
  for (long j = 0; j < 3; ++j) {
    const long x[] = {j};
    CHECK(emission_prob(rev, static_cast<StateIndex>(j), x) == 1.0);
  }
}

TEST_CASE("emission_prob rejects out-of-alphabet and negative values") {
  const long bad[] = {2};
  CHECK_THROWS_WITH_AS(emission_prob(m1(), 0, bad), doctest::Contains("variable 0"), Error);
  const long two[] = {0, 1};
  CHECK_THROWS_AS(emission_prob(m1(), 0, two), Error);
  CHECK_THROWS_AS(ObservedSequence::univariate({0, -1}), Error);
}

TEST_CASE("emission_prob sums to one over the alphabet product and truncated Poisson support") {
  HmmModel m = make_model({1.0}, {{1.0}}, {});
  m.emissions = {StateEmission{{CategoricalDist{{0.1, 0.6, 0.3}}, CategoricalDist{{0.25, 0.75}}}}};
  double total = 0.0;
  for (long a = 0; a < 3; ++a) {
    for (long b = 0; b < 2; ++b) {
      const long x[] = {a, b};
      total += emission_prob(m, 0, x);
    }
  }
  CHECK(std::abs(total - 1.0) <= 1e-12);

  for (double rate : {0.0, 0.3, 13.1, 29.7}) {
    m.emissions = {StateEmission{{PoissonDist{rate}}}};
    double mass = 0.0;
    long x = 0;
    while (mass < 1.0 - 1e-12 && x < 1000) {
      const long obs[] = {x++};
      mass += emission_prob(m, 0, obs);
    }
    CHECK(mass >= 1.0 - 1e-12);
    CHECK(mass <= 1.0 + 1e-12);
  }
}

TEST_CASE("TreeTopology validation") {
  CHECK_THROWS_WITH_AS(TreeTopology::from_parents({kNoParent, kNoParent}), doctest::Contains("multiple roots"), Error);
  CHECK_THROWS_WITH_AS(TreeTopology::from_parents({kNoParent, 2, 1}), doctest::Contains("cycle"), Error);
  CHECK_THROWS_AS(TreeTopology::from_parents({kNoParent, 7}), Error);
  CHECK_THROWS_AS(TreeTopology::from_parents({1, kNoParent}), Error);
  CHECK_THROWS_AS(TreeTopology::from_parents({}), Error);

  const auto t = TreeTopology::from_parents({kNoParent, 2, 0, 0});
  CHECK(t.children(0).size() == 2);
  CHECK(t.children(0)[0] == 2);
  CHECK(t.children(0)[1] == 3);
  CHECK(t.is_leaf(1));
  const auto order = t.topological_order();
  std::vector<std::size_t> pos(4);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  CHECK(pos[2] < pos[1]);
}

TEST_CASE("simulate_chain examples") {
  const HmmModel single = make_model({1.0}, {{1.0}}, {{0.5, 0.5}});
  for (auto s : simulate_chain(single, 20, 3).states) CHECK(s == 0);

  const HmmModel absorbing = make_model({1.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}}, {{0.5, 0.5}, {0.5, 0.5}});
  CHECK(simulate_chain(absorbing, 5, 9).states == std::vector<StateIndex>{0, 0, 0, 0, 0});

  const auto sim = simulate_chain(m1(), 100000, 2024);
  double counts[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t t = 1; t < sim.states.size(); ++t) counts[sim.states[t - 1]][sim.states[t]] += 1;
  for (int i = 0; i < 2; ++i) {
    const double row = counts[i][0] + counts[i][1];
    for (int j = 0; j < 2; ++j) CHECK(std::abs(counts[i][j] / row - m1().transition(i, j)) <= 0.01);
  }
  CHECK(sim.observations.length() == 100000);
}

TEST_CASE("simulate_tree examples") {
  const auto one = simulate_tree(m1(), TreeTopology::path(1), 5);
  CHECK(one.states.size() == 1);
  CHECK(one.observations.values.length() == 1);

  const HmmModel absorbing = make_model({1.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}}, {{0.5, 0.5}, {0.5, 0.5}});
  for (auto s : simulate_tree(absorbing, kary_topology(50, 3), 1).states) CHECK(s == 0);

  const auto star = simulate_tree(m1(), star_topology(10001), 77);
  const StateIndex root = star.states[0];
  double same = 0;
  for (std::size_t u = 1; u < star.states.size(); ++u) same += star.states[u] == root;
  CHECK(std::abs(same / 10000.0 - m1().transition(root, root)) <= 0.02);
}

TEST_CASE("simulation is deterministic per seed") {
  Rng rng(3);
  const HmmModel m = random_poisson_model(rng, 3);
  const auto a = simulate_chain(m, 500, 42);
  const auto b = simulate_chain(m, 500, 42);
  CHECK(a.states == b.states);
  CHECK(a.observations == b.observations);
  const auto topo = random_topology(rng, 200);
  CHECK(simulate_tree(m, topo, 8).observations == simulate_tree(m, topo, 8).observations);
  CHECK_FALSE(simulate_chain(m, 500, 43).observations == a.observations);
}
