#pragma once

#include <string>

#include "hmmep/model.hpp"

namespace hmmep::testing {

inline HmmModel make_model(std::vector<double> initial, std::vector<std::vector<double>> rows,
                           std::vector<std::vector<double>> categorical) {
  HmmModel m;
  m.num_states = initial.size();
  m.initial = std::move(initial);
  m.transition = Matrix(m.num_states, m.num_states);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m.transition(i, j) = rows[i][j];
  }
  for (auto& probs : categorical) m.emissions.push_back(StateEmission{{CategoricalDist{std::move(probs)}}});
  return m;
}

/// Reference model: two sticky states, one binary variable.
inline HmmModel m1() {
  return make_model({0.5, 0.5}, {{0.9, 0.1}, {0.1, 0.9}}, {{0.8, 0.2}, {0.2, 0.8}});
}

/// Uniform initial law and rows, identical emissions: states independent of data.
inline HmmModel uniform_degenerate(std::size_t J) {
  std::vector<double> pi(J, 1.0 / J);
  return make_model(pi, std::vector<std::vector<double>>(J, pi), std::vector<std::vector<double>>(J, {0.5, 0.5}));
}

/// b_j(x) = 1 iff x = j; dynamics are sticky but full support.
inline HmmModel state_revealing(std::size_t J) {
  std::vector<std::vector<double>> rows(J, std::vector<double>(J, 0.2 / (J - 1)));
  std::vector<std::vector<double>> emis(J, std::vector<double>(J, 0.0));
  for (std::size_t j = 0; j < J; ++j) {
    rows[j][j] = 0.8;
    emis[j][j] = 1.0;
  }
  return make_model(std::vector<double>(J, 1.0 / J), rows, emis);
}

inline ObservedTree star_tree(std::vector<long> values) {
  std::vector<VertexId> parents(values.size(), 0);
  parents[0] = kNoParent;
  return ObservedTree{TreeTopology::from_parents(parents), ObservedSequence::univariate(std::move(values))};
}

}  // namespace hmmep::testing
