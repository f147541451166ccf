#include "hmmep/tree_entropy.hpp"

#include <cmath>
#include <limits>

#include "hmmep/error.hpp"
#include "hmmep/numeric.hpp"

namespace hmmep {

namespace {

void check_posterior(const HmmModel& model, const ObservedTree& tree, const TreePosterior& post,
                     bool need_smoothed) {
  const bool shape_ok = post.size() == tree.size() && post.beta.rows() == tree.size() &&
                        post.beta.cols() == model.num_states;
  const bool smoothed_ok = !need_smoothed || post.smoothed.rows() == tree.size();
  if (tree.size() == 0 || !shape_ok || !smoothed_ok) {
    throw_data_error("tree posterior does not match the model and tree (was the downward pass run?)");
  }
}

// P(S_v = k | S_parent(v) = j, x) for child v, zero where the parent state is impossible.
double child_given_parent(const HmmModel& model, const TreePosterior& post, VertexId v, StateIndex j,
                          StateIndex k) {
  const double edge = post.beta_edge(v, j);
  if (!(edge > 0.0)) return 0.0;
  return safe_ratio(post.beta(v, k), post.prior(v, k)) * model.transition(j, k) / edge;
}

// sum_j w_j (h_j - log w_j), skipping zero weights.
double weighted_entropy_step(std::span<const double> weights, std::span<const double> h) {
  double acc = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double w = weights[j];
    if (w > 0.0) acc += w * (h[j] - std::log(w));
  }
  return acc;
}

std::uint64_t saturating_pow(std::uint64_t base, std::size_t exp) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > kMax / base) return kMax;
    r *= base;
  }
  return r;
}

}  // namespace

std::vector<double> marginal_entropy_profile(const TreePosterior& posterior) {
  std::vector<double> out(posterior.smoothed.rows());
  for (VertexId u = 0; u < out.size(); ++u) out[u] = entropy(posterior.smoothed.row(u));
  return out;
}

ParentConditional parent_conditional_profile(const HmmModel& model, const ObservedTree& tree,
                                             const TreePosterior& post) {
  check_posterior(model, tree, post, true);
  const std::size_t n = tree.size();
  const std::size_t J = model.num_states;
  ParentConditional out;
  out.entropy.assign(n, 0.0);
  out.pairwise.resize(n);
  out.entropy[0] = entropy(post.smoothed.row(0));
  for (VertexId u = 1; u < n; ++u) {
    const VertexId r = tree.topology.parent(u);
    Matrix joint(J, J);
    double h = 0.0;
    for (StateIndex i = 0; i < J; ++i) {
      const double parent_mass = post.smoothed(r, i);
      if (!(parent_mass > 0.0)) continue;
      for (StateIndex j = 0; j < J; ++j) {
        const double cond = child_given_parent(model, post, u, i, j);
        if (!(cond > 0.0)) continue;
        const double pj = cond * parent_mass;
        joint(i, j) = pj;
        h -= pj * std::log(cond);
      }
    }
    out.entropy[u] = h;
    out.pairwise[u] = std::move(joint);
  }
  return out;
}

SubtreeEntropiesFromParents subtree_entropies_approach1(const HmmModel& model, const ObservedTree& tree,
                                                         const TreePosterior& post,
                                                         const ParentConditional& parent_cond) {
  check_posterior(model, tree, post, true);
  const std::size_t n = tree.size();
  const auto& topo = tree.topology;
  if (parent_cond.entropy.size() != n) throw_data_error("parent-conditioned profile has the wrong length");
  const std::vector<double> marginal = marginal_entropy_profile(post);

  SubtreeEntropiesFromParents out;
  out.subtree_given_parent.assign(n, 0.0);
  out.partial_subtree.assign(n, 0.0);
  out.partial_complement.assign(n, 0.0);

  // children_sum[u] = sum over children v of H(subtree_v | S_u, x)
  std::vector<double> children_sum(n, 0.0);
  const auto order = topo.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId u = *it;
    CompensatedSum below;
    for (VertexId v : topo.children(u)) below.add(out.subtree_given_parent[v]);
    children_sum[u] = below.value();
    out.subtree_given_parent[u] = children_sum[u] + parent_cond.entropy[u];
    out.partial_subtree[u] = children_sum[u] + marginal[u];
  }
  out.global_entropy = out.partial_subtree[0];

  for (VertexId u : order) {
    for (VertexId v : topo.children(u)) {
      const double siblings = children_sum[u] - out.subtree_given_parent[v];
      out.partial_complement[v] = u == 0 ? marginal[0] + siblings
                                         : siblings + parent_cond.entropy[u] + out.partial_complement[u];
    }
  }
  return out;
}

Matrix state_conditioned_upward(const HmmModel& model, const ObservedTree& tree, const TreePosterior& post) {
  check_posterior(model, tree, post, false);
  const std::size_t n = tree.size();
  const std::size_t J = model.num_states;
  const auto& topo = tree.topology;
  Matrix table(n, J);
  std::vector<double> weights(J);
  const auto order = topo.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId u = *it;
    if (topo.is_leaf(u)) continue;
    for (StateIndex j = 0; j < J; ++j) {
      CompensatedSum acc;
      for (VertexId v : topo.children(u)) {
        for (StateIndex k = 0; k < J; ++k) weights[k] = child_given_parent(model, post, v, j, k);
        acc.add(weighted_entropy_step(weights, table.row(v)));
      }
      table(u, j) = acc.value();
    }
  }
  return table;
}

double global_entropy_upward(const TreePosterior& post, const Matrix& state_conditioned) {
  return weighted_entropy_step(post.beta.row(0), state_conditioned.row(0));
}

SubtreeEntropiesUpward subtree_entropies_approach2(const HmmModel& model, const ObservedTree& tree,
                                                   const TreePosterior& post,
                                                   const ParentConditional& parent_cond) {
  check_posterior(model, tree, post, true);
  const std::size_t n = tree.size();
  const std::size_t J = model.num_states;
  if (parent_cond.entropy.size() != n) throw_data_error("parent-conditioned profile has the wrong length");

  SubtreeEntropiesUpward out;
  out.state_conditioned_upward = state_conditioned_upward(model, tree, post);
  out.global_entropy = global_entropy_upward(post, out.state_conditioned_upward);
  out.partial_subtree.assign(n, 0.0);
  out.partial_complement.assign(n, 0.0);
  for (VertexId u = 0; u < n; ++u) {
    const auto xi = post.smoothed.row(u);
    const auto h = out.state_conditioned_upward.row(u);
    out.partial_subtree[u] = weighted_entropy_step(xi, h);
    if (u == 0) continue;
    double below = 0.0;
    for (StateIndex j = 0; j < J; ++j) below += xi[j] * h[j];
    out.partial_complement[u] = out.global_entropy - below - parent_cond.entropy[u];
  }
  return out;
}

std::vector<double> children_conditional_profile(const HmmModel& model, const ObservedTree& tree,
                                                 const TreePosterior& post, std::uint64_t op_budget) {
  check_posterior(model, tree, post, true);
  const std::size_t n = tree.size();
  const std::size_t J = model.num_states;
  const auto& topo = tree.topology;

  std::uint64_t total = 0;
  for (VertexId u = 0; u < n; ++u) {
    const std::size_t c = topo.children(u).size();
    if (c == 0) continue;
    const std::uint64_t cost = saturating_pow(J, c + 1);
    if (cost > op_budget || total > op_budget - cost) {
      throw_budget_error("children-conditioned entropy exceeds budget of " + std::to_string(op_budget) +
                         " terms at vertex " + std::to_string(u) + " with " + std::to_string(c) +
                         " children (" + std::to_string(J) + "^" + std::to_string(c + 1) + " terms)");
    }
    total += cost;
  }

  std::vector<double> out = marginal_entropy_profile(post);
  std::vector<double> cond;  // (m, j, k) -> P(S_{child m} = k | S_u = j, x)
  std::vector<std::size_t> tuple;
  std::vector<double> joint(J);
  for (VertexId u = 0; u < n; ++u) {
    const auto kids = topo.children(u);
    const std::size_t c = kids.size();
    if (c == 0) continue;
    cond.assign(c * J * J, 0.0);
    for (std::size_t m = 0; m < c; ++m) {
      for (StateIndex j = 0; j < J; ++j) {
        for (StateIndex k = 0; k < J; ++k) cond[(m * J + j) * J + k] = child_given_parent(model, post, kids[m], j, k);
      }
    }
    tuple.assign(c, 0);
    CompensatedSum h;
    while (true) {
      double z = 0.0;
      for (StateIndex j = 0; j < J; ++j) {
        double p = post.smoothed(u, j);
        for (std::size_t m = 0; m < c && p > 0.0; ++m) p *= cond[(m * J + j) * J + tuple[m]];
        joint[j] = p;
        z += p;
      }
      if (z > 0.0) {
        for (StateIndex j = 0; j < J; ++j) {
          if (joint[j] > 0.0) h.add(-joint[j] * std::log(joint[j] / z));
        }
      }
      std::size_t m = 0;
      while (m < c && ++tuple[m] == J) tuple[m++] = 0;
      if (m == c) break;
    }
    out[u] = h.value();
  }
  return out;
}

TreeEntropyProfile tree_entropy_profile(const HmmModel& model, const ObservedTree& tree,
                                        const TreePosterior& posterior, std::uint64_t op_budget) {
  TreeEntropyProfile prof;
  prof.marginal = marginal_entropy_profile(posterior);
  ParentConditional parent = parent_conditional_profile(model, tree, posterior);
  SubtreeEntropiesFromParents sub = subtree_entropies_approach1(model, tree, posterior, parent);
  prof.children_conditional = children_conditional_profile(model, tree, posterior, op_budget);
  prof.state_conditioned_upward = state_conditioned_upward(model, tree, posterior);
  prof.parent_conditional = std::move(parent.entropy);
  prof.subtree_given_parent = std::move(sub.subtree_given_parent);
  prof.partial_subtree = std::move(sub.partial_subtree);
  prof.partial_complement = std::move(sub.partial_complement);
  prof.global_entropy = sub.global_entropy;
  return prof;
}

EntropySummary entropy_summary(const TreeEntropyProfile& profile) {
  EntropySummary s;
  s.parent_sum = compensated_sum(profile.parent_conditional);
  s.children_sum = compensated_sum(profile.children_conditional);
  s.marginal_sum = compensated_sum(profile.marginal);
  if (s.parent_sum > kZeroEntropy) {
    s.ratio_children = (s.children_sum - s.parent_sum) / s.parent_sum;
    s.ratio_marginal = (s.marginal_sum - s.parent_sum) / s.parent_sum;
  }
  return s;
}

}  // namespace hmmep
