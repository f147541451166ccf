#include "hmmep/model.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "hmmep/error.hpp"

namespace hmmep {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

void check_probability_vector(std::span<const double> probs, const std::string& field,
                              std::vector<Violation>& out) {
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      out.push_back({field + "[" + std::to_string(i) + "]", "entry " + fmt(p) + " outside [0,1]"});
    }
    sum += p;
  }
  if (!(std::fabs(sum - 1.0) <= kProbabilityTolerance)) {
    out.push_back({field, "sums to " + fmt(sum)});
  }
}

// Families and alphabet sizes; states must agree on these.
bool same_signature(const VariableDist& a, const VariableDist& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ca = std::get_if<CategoricalDist>(&a)) {
    return ca->probs.size() == std::get<CategoricalDist>(b).probs.size();
  }
  return true;
}

}  // namespace

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::string s;
  for (const auto& v : violations) {
    if (!s.empty()) s += "; ";
    s += v.field + ": " + v.message;
  }
  return s;
}

ValidationReport validate_model(const HmmModel& model) {
  ValidationReport report;
  auto& out = report.violations;
  const std::size_t J = model.num_states;
  if (J == 0) {
    out.push_back({"num_states", "must be positive"});
    return report;
  }
  if (model.initial.size() != J) {
    out.push_back({"initial", "has length " + std::to_string(model.initial.size()) +
                                  ", expected " + std::to_string(J)});
  } else {
    check_probability_vector(model.initial, "initial", out);
  }

  if (model.transition.rows() != J || model.transition.cols() != J) {
    out.push_back({"transition", "is " + std::to_string(model.transition.rows()) + "x" +
                                     std::to_string(model.transition.cols()) + ", expected " +
                                     std::to_string(J) + "x" + std::to_string(J)});
  } else {
    for (std::size_t i = 0; i < J; ++i) {
      std::vector<Violation> row_issues;
      check_probability_vector(model.transition.row(i), "transition[" + std::to_string(i) + "]",
                               row_issues);
      for (auto& v : row_issues) {
        if (v.message.rfind("sums to", 0) == 0) v.message = "row " + std::to_string(i) + " " + v.message;
        out.push_back(std::move(v));
      }
    }
  }

  if (model.emissions.size() != J) {
    out.push_back({"emissions", "has " + std::to_string(model.emissions.size()) +
                                    " states, expected " + std::to_string(J)});
    return report;
  }
  const auto& reference = model.emissions.front().variables;
  if (reference.empty()) out.push_back({"emissions[0]", "has no variables"});
  for (std::size_t j = 0; j < J; ++j) {
    const auto& vars = model.emissions[j].variables;
    const std::string state_field = "emissions[" + std::to_string(j) + "]";
    if (vars.size() != reference.size()) {
      out.push_back({state_field, "has " + std::to_string(vars.size()) + " variables, expected " +
                                      std::to_string(reference.size())});
      continue;
    }
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const std::string field = state_field + "[" + std::to_string(v) + "]";
      if (!same_signature(vars[v], reference[v])) {
        out.push_back({field, "distribution family or alphabet differs from state 0"});
      }
      if (const auto* cat = std::get_if<CategoricalDist>(&vars[v])) {
        if (cat->probs.empty()) {
          out.push_back({field, "categorical alphabet is empty"});
        } else {
          check_probability_vector(cat->probs, field + ".probs", out);
        }
      } else {
        const double rate = std::get<PoissonDist>(vars[v]).rate;
        if (!(rate >= 0.0) || !std::isfinite(rate)) {
          out.push_back({field + ".rate", "rate " + fmt(rate) + " must be finite and >= 0"});
        }
      }
    }
  }
  return report;
}

void require_valid(const HmmModel& model) {
  const auto report = validate_model(model);
  if (!report.ok()) throw_data_error("invalid model: " + report.to_string());
}

ObservedSequence::ObservedSequence(std::size_t num_variables, std::vector<long> values)
    : num_variables_(num_variables), values_(std::move(values)) {
  if (num_variables_ == 0) throw_data_error("observations need at least one variable");
  if (values_.size() % num_variables_ != 0) {
    throw_data_error("ragged observation matrix: " + std::to_string(values_.size()) +
                     " values for " + std::to_string(num_variables_) + " variables");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] < 0) {
      throw_data_error("negative observation at position " + std::to_string(i / num_variables_) +
                       ", variable " + std::to_string(i % num_variables_));
    }
  }
}

ObservedSequence ObservedSequence::univariate(std::vector<long> values) {
  return ObservedSequence(1, std::move(values));
}

TreeTopology TreeTopology::from_parents(std::vector<VertexId> parents) {
  const std::size_t n = parents.size();
  if (n == 0) throw_data_error("tree has no vertices");
  if (parents[0] != kNoParent) throw_data_error("vertex 0 must be the root");

  TreeTopology tree;
  tree.children_.resize(n);
  for (VertexId u = 1; u < n; ++u) {
    if (parents[u] == kNoParent) throw_data_error("multiple roots: vertices 0 and " + std::to_string(u));
    if (parents[u] >= n) {
      throw_data_error("vertex " + std::to_string(u) + " has unknown parent " +
                       std::to_string(parents[u]));
    }
    if (parents[u] == u) throw_data_error("cycle through vertex " + std::to_string(u));
    tree.children_[parents[u]].push_back(u);
  }

  // Breadth-first from the root; any vertex not reached sits on a cycle.
  tree.order_.reserve(n);
  tree.order_.push_back(0);
  for (std::size_t head = 0; head < tree.order_.size(); ++head) {
    for (VertexId v : tree.children_[tree.order_[head]]) tree.order_.push_back(v);
  }
  if (tree.order_.size() != n) {
    std::vector<bool> seen(n, false);
    for (VertexId u : tree.order_) seen[u] = true;
    for (VertexId u = 0; u < n; ++u) {
      if (!seen[u]) throw_data_error("cycle through vertex " + std::to_string(u));
    }
  }
  tree.parents_ = std::move(parents);
  return tree;
}

TreeTopology TreeTopology::path(std::size_t n) {
  std::vector<VertexId> parents(n);
  for (std::size_t u = 0; u < n; ++u) parents[u] = u == 0 ? kNoParent : u - 1;
  return from_parents(std::move(parents));
}

double emission_prob(const HmmModel& model, StateIndex state, std::span<const long> observation) {
  if (state >= model.num_states) {
    throw_data_error("state " + std::to_string(state) + " out of range");
  }
  const auto& vars = model.emissions[state].variables;
  if (observation.size() != vars.size()) {
    throw_data_error("observation has " + std::to_string(observation.size()) +
                     " variables, model expects " + std::to_string(vars.size()));
  }
  double log_prob = 0.0;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const long x = observation[v];
    if (x < 0) throw_data_error("variable " + std::to_string(v) + ": negative value " + std::to_string(x));
    if (const auto* cat = std::get_if<CategoricalDist>(&vars[v])) {
      if (static_cast<std::size_t>(x) >= cat->probs.size()) {
        throw_data_error("variable " + std::to_string(v) + ": value " + std::to_string(x) +
                         " outside alphabet of size " + std::to_string(cat->probs.size()));
      }
      const double p = cat->probs[static_cast<std::size_t>(x)];
      if (p <= 0.0) return 0.0;
      log_prob += std::log(p);
    } else {
      const double rate = std::get<PoissonDist>(vars[v]).rate;
      if (rate == 0.0) {
        if (x != 0) return 0.0;
        continue;
      }
      const double xd = static_cast<double>(x);
      log_prob += xd * std::log(rate) - rate - std::lgamma(xd + 1.0);
    }
  }
  return std::exp(log_prob);
}

Matrix emission_table(const HmmModel& model, const ObservedSequence& obs) {
  Matrix table(obs.length(), model.num_states);
  for (std::size_t t = 0; t < obs.length(); ++t) {
    for (StateIndex j = 0; j < model.num_states; ++j) table(t, j) = emission_prob(model, j, obs.at(t));
  }
  return table;
}

}  // namespace hmmep
