#include "hmmep/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hmmep/error.hpp"
#include "hmmep/numeric.hpp"

namespace hmmep {

namespace {

constexpr double kTieTolerance = 1e-12;

std::uint64_t checked_config_count(std::size_t J, std::size_t n, std::uint64_t budget) {
  std::uint64_t count = 1;
  for (std::size_t u = 0; u < n; ++u) {
    if (count > budget / J) {
      throw_budget_error("enumeration needs " + std::to_string(J) + "^" + std::to_string(n) +
                         " configurations, budget is " + std::to_string(budget));
    }
    count *= J;
  }
  return count;
}

OracleResult enumerate(const HmmModel& model, std::vector<VertexId> parents, const ObservedSequence& obs,
                       std::uint64_t budget, OracleResult::Shape shape) {
  require_valid(model);
  const std::size_t n = parents.size();
  const std::size_t J = model.num_states;
  if (n == 0) throw_data_error("nothing to enumerate");
  const std::uint64_t count = checked_config_count(J, n, budget);
  const Matrix emis = emission_table(model, obs);

  OracleResult res;
  res.shape = shape;
  res.num_states = J;
  res.parents = std::move(parents);
  res.posterior.assign(count, 0.0);

  std::vector<StateIndex> s(n, 0);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::uint64_t c = 0; c < count; ++c) {
    double lp = 0.0;
    for (VertexId u = 0; u < n && lp > -std::numeric_limits<double>::infinity(); ++u) {
      const double trans = u == 0 ? model.initial[s[0]] : model.transition(s[res.parents[u]], s[u]);
      const double p = trans * emis(u, s[u]);
      lp = p > 0.0 ? lp + std::log(p) : -std::numeric_limits<double>::infinity();
    }
    res.posterior[c] = lp;
    max_log = std::max(max_log, lp);
    for (std::size_t u = 0; u < n && ++s[u] == J; ++u) s[u] = 0;
  }
  if (!std::isfinite(max_log)) throw_numerical_error("every state configuration is impossible");

  CompensatedSum total;
  for (double& v : res.posterior) {
    v = std::exp(v - max_log);
    total.add(v);
  }
  const double z = total.value();
  for (double& v : res.posterior) v /= z;
  res.log_evidence = max_log + std::log(z);
  res.evidence = std::exp(res.log_evidence);
  return res;
}

// Entropy of the projection of the posterior onto `subset`, optionally
// restricted to configurations with S_cond = cond_state and renormalized.
double projected_entropy(const OracleResult& res, const std::vector<VertexId>& subset,
                         VertexId cond = kNoParent, StateIndex cond_state = 0) {
  const std::size_t J = res.num_states;
  std::uint64_t size = 1;
  for (std::size_t i = 0; i < subset.size(); ++i) size *= J;
  std::vector<double> mass(size, 0.0);
  double cond_mass = 0.0;
  for (std::uint64_t c = 0; c < res.num_configurations(); ++c) {
    const double p = res.posterior[c];
    if (p == 0.0) continue;
    if (cond != kNoParent && res.state_of(c, cond) != cond_state) continue;
    std::uint64_t key = 0;
    for (auto it = subset.rbegin(); it != subset.rend(); ++it) key = key * J + res.state_of(c, *it);
    mass[key] += p;
    cond_mass += p;
  }
  if (cond == kNoParent) return entropy(mass);
  if (!(cond_mass > 0.0)) {
    throw_data_error("conditioning on S_" + std::to_string(cond) + " = " + std::to_string(cond_state) +
                     ", which has zero posterior probability");
  }
  double h = 0.0;
  for (double m : mass) h += neg_xlogx(m / cond_mass);
  return h;
}

std::vector<std::vector<VertexId>> children_of(const OracleResult& res) {
  std::vector<std::vector<VertexId>> kids(res.num_positions());
  for (VertexId u = 1; u < res.num_positions(); ++u) kids[res.parents[u]].push_back(u);
  return kids;
}

std::vector<VertexId> subtree_of(const OracleResult& res, VertexId u) {
  const auto kids = children_of(res);
  std::vector<VertexId> out{u};
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (VertexId v : kids[out[head]]) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VertexId> complement_of(const OracleResult& res, const std::vector<VertexId>& set) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < res.num_positions(); ++v) {
    if (!std::binary_search(set.begin(), set.end(), v)) out.push_back(v);
  }
  return out;
}

std::vector<VertexId> with(std::vector<VertexId> set, VertexId extra) {
  set.push_back(extra);
  std::sort(set.begin(), set.end());
  return set;
}

}  // namespace

StateIndex OracleResult::state_of(std::uint64_t config, VertexId u) const {
  for (VertexId i = 0; i < u; ++i) config /= num_states;
  return static_cast<StateIndex>(config % num_states);
}

OracleResult enumerate_chain(const HmmModel& model, const ObservedSequence& seq, std::uint64_t config_budget) {
  if (seq.num_variables() != model.num_variables()) throw_data_error("sequence does not match the model's variables");
  std::vector<VertexId> parents(seq.length());
  for (std::size_t t = 0; t < parents.size(); ++t) parents[t] = t == 0 ? kNoParent : t - 1;
  return enumerate(model, std::move(parents), seq, config_budget, OracleResult::Shape::Chain);
}

OracleResult enumerate_tree(const HmmModel& model, const ObservedTree& tree, std::uint64_t config_budget) {
  if (tree.values.num_variables() != model.num_variables() || tree.values.length() != tree.size()) {
    throw_data_error("tree observations do not match the model or topology");
  }
  const auto parents = tree.topology.parents();
  return enumerate(model, {parents.begin(), parents.end()}, tree.values, config_budget,
                   OracleResult::Shape::Tree);
}

double oracle_entropy(const OracleResult& res, const OracleQuery& q) {
  const std::size_t n = res.num_positions();
  if (q.kind != OracleQueryKind::Global && q.vertex >= n) {
    throw Error(ErrorKind::Usage, "oracle query names vertex " + std::to_string(q.vertex) + " of " +
                                      std::to_string(n));
  }
  const bool needs_state = q.kind == OracleQueryKind::AncestorsGivenState ||
                           q.kind == OracleQueryKind::DescendantsGivenState ||
                           q.kind == OracleQueryKind::ViterbiProfile;
  if (needs_state && q.state >= res.num_states) {
    throw Error(ErrorKind::Usage, "oracle query names state " + std::to_string(q.state) + " of " +
                                      std::to_string(res.num_states));
  }
  const VertexId u = q.vertex;
  const VertexId parent = u < n ? res.parents[u] : kNoParent;

  switch (q.kind) {
    case OracleQueryKind::Global: {
      double h = 0.0;
      for (double p : res.posterior) h += neg_xlogx(p);
      return h;
    }
    case OracleQueryKind::Marginal:
      return projected_entropy(res, {u});
    case OracleQueryKind::ParentConditional:
      if (parent == kNoParent) return projected_entropy(res, {u});
      return projected_entropy(res, with({u}, parent)) - projected_entropy(res, {parent});
    case OracleQueryKind::ChildrenConditional: {
      const auto kids = children_of(res)[u];
      if (kids.empty()) return projected_entropy(res, {u});
      return projected_entropy(res, with(kids, u)) - projected_entropy(res, kids);
    }
    case OracleQueryKind::PrefixPartial: {
      std::vector<VertexId> prefix(u + 1);
      for (VertexId v = 0; v <= u; ++v) prefix[v] = v;
      return projected_entropy(res, prefix);
    }
    case OracleQueryKind::SubtreePartial:
      return projected_entropy(res, subtree_of(res, u));
    case OracleQueryKind::ComplementPartial: {
      const auto rest = complement_of(res, subtree_of(res, u));
      return rest.empty() ? 0.0 : projected_entropy(res, rest);
    }
    case OracleQueryKind::SubtreeGivenParent: {
      const auto sub = subtree_of(res, u);
      if (parent == kNoParent) return projected_entropy(res, sub);
      return projected_entropy(res, with(sub, parent)) - projected_entropy(res, {parent});
    }
    case OracleQueryKind::AncestorsGivenState: {
      std::vector<VertexId> anc;
      for (VertexId v = parent; v != kNoParent; v = res.parents[v]) anc.push_back(v);
      std::sort(anc.begin(), anc.end());
      return anc.empty() ? 0.0 : projected_entropy(res, anc, u, q.state);
    }
    case OracleQueryKind::DescendantsGivenState: {
      auto desc = subtree_of(res, u);
      desc.erase(std::find(desc.begin(), desc.end(), u));
      return desc.empty() ? 0.0 : projected_entropy(res, desc, u, q.state);
    }
    case OracleQueryKind::ViterbiProfile: {
      double best = 0.0;
      for (std::uint64_t c = 0; c < res.num_configurations(); ++c) {
        if (res.state_of(c, u) == q.state) best = std::max(best, res.posterior[c]);
      }
      return best;
    }
  }
  throw Error(ErrorKind::Usage, "unknown oracle query");
}

Matrix oracle_marginals(const OracleResult& res) {
  Matrix out(res.num_positions(), res.num_states);
  for (std::uint64_t c = 0; c < res.num_configurations(); ++c) {
    std::uint64_t rest = c;
    for (VertexId u = 0; u < res.num_positions(); ++u) {
      out(u, rest % res.num_states) += res.posterior[c];
      rest /= res.num_states;
    }
  }
  return out;
}

OracleArgmax oracle_argmax(const OracleResult& res) {
  const std::size_t n = res.num_positions();
  std::vector<VertexId> priority;
  if (res.shape == OracleResult::Shape::Chain) {
    for (VertexId u = n; u-- > 0;) priority.push_back(u);
  } else {
    const auto kids = children_of(res);
    priority.push_back(0);
    for (std::size_t head = 0; head < priority.size(); ++head) {
      for (VertexId v : kids[priority[head]]) priority.push_back(v);
    }
  }

  const double best = *std::max_element(res.posterior.begin(), res.posterior.end());
  std::uint64_t chosen = 0;
  bool have = false;
  for (std::uint64_t c = 0; c < res.num_configurations(); ++c) {
    if (res.posterior[c] < best * (1.0 - kTieTolerance)) continue;
    if (!have) {
      chosen = c;
      have = true;
      continue;
    }
    for (VertexId u : priority) {
      const StateIndex a = res.state_of(c, u), b = res.state_of(chosen, u);
      if (a != b) {
        if (a < b) chosen = c;
        break;
      }
    }
  }

  OracleArgmax out;
  out.states.resize(n);
  for (VertexId u = 0; u < n; ++u) out.states[u] = res.state_of(chosen, u);
  out.joint_probability = res.posterior[chosen] * res.evidence;
  return out;
}

}  // namespace hmmep
