#include "hmmep/tree_inference.hpp"

#include <cmath>
#include <limits>

#include "hmmep/error.hpp"
#include "hmmep/numeric.hpp"

namespace hmmep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_tree(const HmmModel& model, const ObservedTree& tree) {
  if (tree.size() == 0) throw_data_error("empty tree");
  if (tree.values.length() != tree.size()) {
    throw_data_error("tree has " + std::to_string(tree.size()) + " vertices but " +
                     std::to_string(tree.values.length()) + " observation rows");
  }
  if (tree.values.num_variables() != model.num_variables()) {
    throw_data_error("tree observations have " + std::to_string(tree.values.num_variables()) +
                     " variables, model expects " + std::to_string(model.num_variables()));
  }
}

double log_or_neg_inf(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// Max-product upward messages shared by Viterbi restoration and profiles.
struct MaxProductUpward {
  Matrix log_emission;  // (u, j) = log b_j(x_u)
  Matrix log_trans;
  Matrix subtree;       // (u, j) = max log P(subtree states below u, subtree obs | S_u = j)
  Matrix message;       // (v, j) = max_k [log p_jk + subtree(v, k)]
  std::vector<StateIndex> argmax;  // (v, j) -> best k, smallest on ties
};

MaxProductUpward max_product_upward(const HmmModel& model, const ObservedTree& tree) {
  const std::size_t n = tree.size();
  const std::size_t J = model.num_states;
  const Matrix emis = emission_table(model, tree.values);

  MaxProductUpward mp;
  mp.log_emission = Matrix(n, J);
  mp.log_trans = Matrix(J, J);
  mp.subtree = Matrix(n, J);
  mp.message = Matrix(n, J, kNegInf);
  mp.argmax.assign(n * J, 0);
  for (VertexId u = 0; u < n; ++u) {
    for (StateIndex j = 0; j < J; ++j) mp.log_emission(u, j) = log_or_neg_inf(emis(u, j));
  }
  for (StateIndex i = 0; i < J; ++i) {
    for (StateIndex j = 0; j < J; ++j) mp.log_trans(i, j) = log_or_neg_inf(model.transition(i, j));
  }

  const auto order = tree.topology.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId u = *it;
    for (StateIndex j = 0; j < J; ++j) {
      double acc = mp.log_emission(u, j);
      for (VertexId v : tree.topology.children(u)) acc += mp.message(v, j);
      mp.subtree(u, j) = acc;
    }
    if (u == 0) continue;
    for (StateIndex i = 0; i < J; ++i) {
      double best = kNegInf;
      StateIndex arg = 0;
      for (StateIndex k = 0; k < J; ++k) {
        const double cand = mp.log_trans(i, k) + mp.subtree(u, k);
        if (cand > best) {
          best = cand;
          arg = k;
        }
      }
      mp.message(u, i) = best;
      mp.argmax[u * J + i] = arg;
    }
  }
  return mp;
}

}  // namespace

TreePosterior upward_pass(const HmmModel& model, const ObservedTree& tree) {
  require_valid(model);
  check_tree(model, tree);
  const std::size_t n = tree.size();
  const std::size_t J = model.num_states;
  const auto& topo = tree.topology;
  const Matrix emis = emission_table(model, tree.values);

  TreePosterior post;
  post.prior = Matrix(n, J);
  post.beta = Matrix(n, J);
  post.beta_edge = Matrix(n, J);
  post.normalizers.assign(n, 0.0);

  const auto order = topo.topological_order();
  for (VertexId u : order) {
    if (u == 0) {
      for (StateIndex j = 0; j < J; ++j) post.prior(0, j) = model.initial[j];
      continue;
    }
    const VertexId r = topo.parent(u);
    for (StateIndex j = 0; j < J; ++j) {
      double acc = 0.0;
      for (StateIndex i = 0; i < J; ++i) acc += model.transition(i, j) * post.prior(r, i);
      post.prior(u, j) = acc;
    }
  }

  std::vector<double> ratio(J);
  CompensatedSum log_lik;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId u = *it;
    double norm = 0.0;
    for (StateIndex j = 0; j < J; ++j) {
      double val = emis(u, j) * post.prior(u, j);
      for (VertexId v : topo.children(u)) val *= post.beta_edge(v, j);
      post.beta(u, j) = val;
      norm += val;
    }
    if (!(norm > 0.0)) {
      throw_numerical_error("observation impossible under model at vertex " + std::to_string(u));
    }
    for (StateIndex j = 0; j < J; ++j) post.beta(u, j) /= norm;
    post.normalizers[u] = norm;
    log_lik.add(std::log(norm));

    if (u == 0) continue;
    for (StateIndex k = 0; k < J; ++k) ratio[k] = safe_ratio(post.beta(u, k), post.prior(u, k));
    for (StateIndex j = 0; j < J; ++j) {
      double acc = 0.0;
      for (StateIndex k = 0; k < J; ++k) acc += ratio[k] * model.transition(j, k);
      post.beta_edge(u, j) = acc;
    }
  }
  post.log_likelihood = log_lik.value();
  return post;
}

TreePosterior downward_pass(const HmmModel& model, const ObservedTree& tree, TreePosterior up) {
  const std::size_t n = tree.size();
  const std::size_t J = model.num_states;
  if (up.size() != n || up.beta.cols() != J) {
    throw_data_error("upward tables do not match the model and tree");
  }
  const auto& topo = tree.topology;
  up.smoothed = Matrix(n, J);
  std::vector<double> ratio(J);
  for (VertexId u : topo.topological_order()) {
    if (u == 0) {
      for (StateIndex j = 0; j < J; ++j) up.smoothed(0, j) = up.beta(0, j);
      continue;
    }
    const VertexId r = topo.parent(u);
    for (StateIndex i = 0; i < J; ++i) ratio[i] = safe_ratio(up.smoothed(r, i), up.beta_edge(u, i));
    double total = 0.0;
    for (StateIndex j = 0; j < J; ++j) {
      double acc = 0.0;
      for (StateIndex i = 0; i < J; ++i) acc += model.transition(i, j) * ratio[i];
      up.smoothed(u, j) = safe_ratio(up.beta(u, j), up.prior(u, j)) * acc;
      total += up.smoothed(u, j);
    }
    for (StateIndex j = 0; j < J; ++j) up.smoothed(u, j) /= total;
  }
  return up;
}

TreePosterior smooth_tree(const HmmModel& model, const ObservedTree& tree) {
  return downward_pass(model, tree, upward_pass(model, tree));
}

TreeViterbiResult viterbi_tree(const HmmModel& model, const ObservedTree& tree) {
  require_valid(model);
  check_tree(model, tree);
  const std::size_t J = model.num_states;
  const MaxProductUpward mp = max_product_upward(model, tree);

  TreeViterbiResult result;
  result.log_joint = kNegInf;
  StateIndex root_state = 0;
  for (StateIndex j = 0; j < J; ++j) {
    const double cand = log_or_neg_inf(model.initial[j]) + mp.subtree(0, j);
    if (cand > result.log_joint) {
      result.log_joint = cand;
      root_state = j;
    }
  }
  if (!std::isfinite(result.log_joint)) throw_numerical_error("every state tree is impossible");

  result.states.assign(tree.size(), 0);
  for (VertexId u : tree.topology.topological_order()) {
    result.states[u] = u == 0 ? root_state : mp.argmax[u * J + result.states[tree.topology.parent(u)]];
  }
  return result;
}

Matrix viterbi_log_profiles(const HmmModel& model, const ObservedTree& tree) {
  require_valid(model);
  check_tree(model, tree);
  const std::size_t n = tree.size();
  const std::size_t J = model.num_states;
  const auto& topo = tree.topology;
  const MaxProductUpward mp = max_product_upward(model, tree);

  // outside(u, j) = max log P(states and observations outside the subtree of u, S_u = j).
  Matrix outside(n, J, kNegInf);
  for (StateIndex j = 0; j < J; ++j) outside(0, j) = log_or_neg_inf(model.initial[j]);

  std::vector<double> prefix, suffix;
  for (VertexId u : topo.topological_order()) {
    const auto kids = topo.children(u);
    const std::size_t c = kids.size();
    if (c == 0) continue;
    // Sibling-excluded message sums through prefix and suffix sums, which keeps
    // -inf messages from ever being subtracted.
    prefix.assign((c + 1) * J, 0.0);
    suffix.assign((c + 1) * J, 0.0);
    for (std::size_t m = 0; m < c; ++m) {
      for (StateIndex j = 0; j < J; ++j) prefix[(m + 1) * J + j] = prefix[m * J + j] + mp.message(kids[m], j);
    }
    for (std::size_t m = c; m-- > 0;) {
      for (StateIndex j = 0; j < J; ++j) suffix[m * J + j] = suffix[(m + 1) * J + j] + mp.message(kids[m], j);
    }
    for (std::size_t m = 0; m < c; ++m) {
      const VertexId v = kids[m];
      for (StateIndex k = 0; k < J; ++k) {
        double best = kNegInf;
        for (StateIndex j = 0; j < J; ++j) {
          const double cand = outside(u, j) + mp.log_emission(u, j) + prefix[m * J + j] +
                              suffix[(m + 1) * J + j] + mp.log_trans(j, k);
          if (cand > best) best = cand;
        }
        outside(v, k) = best;
      }
    }
  }

  Matrix profiles(n, J);
  for (VertexId u = 0; u < n; ++u) {
    for (StateIndex j = 0; j < J; ++j) profiles(u, j) = outside(u, j) + mp.subtree(u, j);
  }
  return profiles;
}

Matrix viterbi_profiles(const HmmModel& model, const ObservedTree& tree) {
  const TreePosterior up = upward_pass(model, tree);
  Matrix profiles = viterbi_log_profiles(model, tree);
  for (double& v : profiles.data()) v = std::exp(v - up.log_likelihood);
  return profiles;
}

}  // namespace hmmep
