#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "generators.hpp"
#include "hmmep/chain_entropy.hpp"
#include "hmmep/error.hpp"
#include "hmmep/io.hpp"

using namespace hmmep;
using namespace hmmep::testing;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Usage;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("three-state Poisson model parses and validates") {
  const std::string doc = R"({
    "num_states": 3,
    "initial": [0.2, 0.5, 0.3],
    "transition": [[0.8, 0.1, 0.1], [0.2, 0.7, 0.1], [0.05, 0.15, 0.8]],
    "emissions": [[{"type": "poisson", "rate": 13.1}],
                  [{"type": "poisson", "rate": 19.7}],
                  [{"type": "poisson", "rate": 29.7}]]
  })";
  const HmmModel m = parse_model(doc);
  CHECK(m.num_states == 3);
  CHECK(std::get<PoissonDist>(m.emissions[2].variables[0]).rate == 29.7);
  CHECK(parse_model(serialize_model(m)) == m);
}

TEST_CASE("model round trips") {
  CHECK(parse_model(serialize_model(m1())) == m1());
  Rng rng(59);
  for (int rep = 0; rep < 30; ++rep) {
    const HmmModel m = rep % 2 ? random_poisson_model(rng, pick(rng, 1, 4), 0.2)
                               : random_categorical_model(rng, pick(rng, 1, 4), {2, 5}, 0.2);
    CHECK(parse_model(serialize_model(m)) == m);
  }
}

TEST_CASE("model errors carry field or line context") {
  const std::string bad_row = R"({"num_states": 2, "initial": [0.5, 0.5],
    "transition": [[0.5, 0.6], [0.5, 0.5]],
    "emissions": [[{"type": "categorical", "probs": [1.0]}], [{"type": "categorical", "probs": [1.0]}]]})";
  CHECK(kind_of([&] { parse_model(bad_row); }) == ErrorKind::Data);
  CHECK(message_of([&] { parse_model(bad_row); }).find("row 0 sums to 1.1") != std::string::npos);

  CHECK(message_of([] { parse_model("{\n  \"num_states\": 2,\n  oops\n}"); }).find("line 3") != std::string::npos);
  CHECK(message_of([] { parse_model(R"({"num_states": 1, "initial": [1], "transition": [[1]], "emissions": [[{"type": "gauss"}]]})"); })
            .find("emissions[0][0].type") != std::string::npos);
  CHECK(message_of([] { parse_model(R"({"num_states": 1, "initial": [1], "emissions": []})"); }).find("transition") !=
        std::string::npos);
}

TEST_CASE("sequence parsing examples") {
  auto one = parse_sequences("0 1 1 0");
  REQUIRE(one.size() == 1);
  CHECK(one[0].length() == 4);
  CHECK(one[0].num_variables() == 1);

  auto bi = parse_sequences("0,1;1,0\n");
  REQUIRE(bi.size() == 1);
  CHECK(bi[0].length() == 2);
  CHECK(bi[0].num_variables() == 2);
  CHECK(bi[0].at(1)[0] == 1);

  CHECK(message_of([] { parse_sequences("0 x 1"); }).find("token 2") != std::string::npos);
  CHECK(kind_of([] { parse_sequences("0,1;1"); }) == ErrorKind::Data);
  CHECK(kind_of([] { parse_sequences("0,1;1,1\n0 1"); }) == ErrorKind::Data);
  CHECK(kind_of([] { parse_sequences("0 -1"); }) == ErrorKind::Data);
  CHECK(parse_sequences("# header\n\n1 2\n").size() == 1);
}

TEST_CASE("sequence round trips") {
  Rng rng(61);
  for (int rep = 0; rep < 20; ++rep) {
    const HmmModel m = random_categorical_model(rng, 2, std::vector<std::size_t>(pick(rng, 1, 3), 4));
    std::vector<ObservedSequence> seqs;
    for (std::size_t k = pick(rng, 1, 4); k > 0; --k) seqs.push_back(random_observations(rng, m, pick(rng, 1, 6)));
    CHECK(parse_sequences(serialize_sequences(seqs)) == seqs);
  }
}

TEST_CASE("tree parsing examples") {
  const auto star = parse_tree("0\t-1\t0\n1\t0\t0\n2\t0\t0\n");
  CHECK(star.size() == 3);
  CHECK(star.topology.children(0).size() == 2);
  CHECK(star.values.num_variables() == 1);

  CHECK(message_of([] { parse_tree("0\t-1\t0\n1\t-1\t0\n"); }).find("multiple roots") != std::string::npos);
  CHECK(message_of([] { parse_tree("1\t2\t0\n2\t1\t0\n"); }).find("cycle") != std::string::npos);
  CHECK(message_of([] { parse_tree("0\t-1\t0\n2\t0\t0\n"); }).find("missing") != std::string::npos);
  CHECK(kind_of([] { parse_tree("0\t-1\t0,1\n1\t0\t0\n"); }) == ErrorKind::Data);
  CHECK(kind_of([] { parse_tree("0\t-1\t0\n0\t-1\t0\n"); }) == ErrorKind::Data);

  const auto topo = parse_topology("0 -1\n1 0\n2 1\n");
  CHECK(topo.parent(2) == 1);
}

TEST_CASE("tree round trips") {
  Rng rng(67);
  for (int rep = 0; rep < 20; ++rep) {
    const HmmModel m = random_categorical_model(rng, 2, std::vector<std::size_t>(pick(rng, 1, 2), 3));
    const std::size_t n = pick(rng, 1, 30);
    const ObservedTree t{random_topology(rng, n), random_observations(rng, m, n)};
    CHECK(parse_tree(serialize_tree(t)) == t);
  }
}

TEST_CASE("write_profile examples") {
  ProfileTable t;
  t.add("index", ColumnKind::Integer, {0});
  t.add("H_marginal", ColumnKind::Entropy, {std::numbers::ln2});
  CHECK(write_profile(t, LogBase::E) == "index\tH_marginal\n0\t0.69314718056\n");
  CHECK(write_profile(t, LogBase::Two) == "index\tH_marginal\n0\t1\n");

  const auto seq = ObservedSequence::univariate({0, 0});
  const auto post = smooth_chain(m1(), seq);
  ProfileTable c;
  c.add("index", ColumnKind::Integer, {0, 1});
  c.add("H_cond_past", ColumnKind::Entropy, entropy_past_hernando(m1(), seq, post).conditional);
  CHECK(write_profile(c) == "index\tH_cond_past\n0\t0.280585991294\n1\t0.164057558635\n");

  ProfileTable ragged;
  ragged.add("index", ColumnKind::Integer, {0, 1});
  ragged.add("P_0", ColumnKind::Real, {0.5});
  CHECK(kind_of([&] { write_profile(ragged); }) == ErrorKind::Data);
}

TEST_CASE("format_real never prints negative zero") {
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(-1e-300 * 1e-300) == "0");
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(1.0 / 3.0) == "0.333333333333");
  CHECK(format_real(-2.5e-7) == "-2.5e-07");
}

TEST_CASE("profile table round trip") {
  ProfileTable t;
  t.shape = ProfileTable::Shape::Tree;
  t.add("vertex", ColumnKind::Integer, {0, 1, 2});
  t.add("parent", ColumnKind::Integer, {-1, 0, 0});
  t.add("x0", ColumnKind::Integer, {3, 0, 7});
  t.add("P_0", ColumnKind::Real, {0.25, 1.0 / 3.0, 0.0});
  t.add("H_marginal", ColumnKind::Entropy, {0.1, 0.2, 1e-20});
  for (LogBase base : {LogBase::E, LogBase::Two}) {
    const std::string text = write_profile(t, base);
    const ProfileTable back = parse_profile(text, base);
    CHECK(back.shape == ProfileTable::Shape::Tree);
    CHECK(write_profile(back, base) == text);
    REQUIRE(back.columns.size() == t.columns.size());
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      CHECK(back.columns[c].name == t.columns[c].name);
      CHECK(back.columns[c].kind == t.columns[c].kind);
    }
  }
}

TEST_CASE("log base parsing") {
  CHECK(parse_log_base("e") == LogBase::E);
  CHECK(parse_log_base("2") == LogBase::Two);
  CHECK(kind_of([] { parse_log_base("10"); }) == ErrorKind::Usage);
}
