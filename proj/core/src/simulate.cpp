#include <random>
#include <variant>

#include "hmmep/error.hpp"
#include "hmmep/model.hpp"

namespace hmmep {

namespace {

class Sampler {
 public:
  Sampler(const HmmModel& model, unsigned long long seed) : model_(model), rng_(seed) {
    require_valid(model);
    const std::size_t J = model.num_states;
    initial_ = std::discrete_distribution<StateIndex>(model.initial.begin(), model.initial.end());
    rows_.reserve(J);
    for (StateIndex i = 0; i < J; ++i) {
      const auto row = model.transition.row(i);
      rows_.emplace_back(row.begin(), row.end());
    }
  }

  StateIndex initial_state() { return initial_(rng_); }
  StateIndex next_state(StateIndex from) { return rows_[from](rng_); }

  void emit(StateIndex state, std::vector<long>& out) {
    for (const auto& var : model_.emissions[state].variables) {
      if (const auto* cat = std::get_if<CategoricalDist>(&var)) {
        std::discrete_distribution<long> d(cat->probs.begin(), cat->probs.end());
        out.push_back(d(rng_));
      } else {
        const double rate = std::get<PoissonDist>(var).rate;
        out.push_back(rate > 0.0 ? std::poisson_distribution<long>(rate)(rng_) : 0L);
      }
    }
  }

 private:
  const HmmModel& model_;
  std::mt19937_64 rng_;
  std::discrete_distribution<StateIndex> initial_;
  std::vector<std::discrete_distribution<StateIndex>> rows_;
};

}  // namespace

SimulatedChain simulate_chain(const HmmModel& model, std::size_t length, unsigned long long seed) {
  if (length == 0) throw_data_error("simulation length must be at least 1");
  Sampler sampler(model, seed);
  SimulatedChain out;
  out.states.reserve(length);
  std::vector<long> values;
  values.reserve(length * model.num_variables());
  for (std::size_t t = 0; t < length; ++t) {
    const StateIndex s = t == 0 ? sampler.initial_state() : sampler.next_state(out.states.back());
    out.states.push_back(s);
    sampler.emit(s, values);
  }
  out.observations = ObservedSequence(model.num_variables(), std::move(values));
  return out;
}

SimulatedTree simulate_tree(const HmmModel& model, const TreeTopology& topology,
                            unsigned long long seed) {
  Sampler sampler(model, seed);
  const std::size_t n = topology.size();
  const std::size_t V = model.num_variables();
  SimulatedTree out;
  out.states.assign(n, 0);
  for (VertexId u : topology.topological_order()) {
    out.states[u] = u == 0 ? sampler.initial_state() : sampler.next_state(out.states[topology.parent(u)]);
  }
  // Emissions are drawn in vertex-id order so the output layout matches the ids.
  std::vector<long> values;
  values.reserve(n * V);
  for (VertexId u = 0; u < n; ++u) sampler.emit(out.states[u], values);
  out.observations = ObservedTree{topology, ObservedSequence(V, std::move(values))};
  return out;
}

}  // namespace hmmep
