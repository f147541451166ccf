#include "hmmep/chain_inference.hpp"

#include <cmath>
#include <limits>

#include "hmmep/error.hpp"
#include "hmmep/numeric.hpp"

namespace hmmep {

namespace {

void check_sequence(const HmmModel& model, const ObservedSequence& seq) {
  if (seq.length() == 0) throw_data_error("empty observed sequence");
  if (seq.num_variables() != model.num_variables()) {
    throw_data_error("sequence has " + std::to_string(seq.num_variables()) +
                     " variables, model expects " + std::to_string(model.num_variables()));
  }
}

double log_or_neg_inf(double p) {
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

}  // namespace

ChainPosterior forward_pass(const HmmModel& model, const ObservedSequence& seq) {
  require_valid(model);
  check_sequence(model, seq);
  const std::size_t T = seq.length();
  const std::size_t J = model.num_states;
  const Matrix emis = emission_table(model, seq);

  ChainPosterior post;
  post.forward = Matrix(T, J);
  post.predicted = Matrix(T, J);
  post.normalizers.assign(T, 0.0);

  for (StateIndex j = 0; j < J; ++j) post.predicted(0, j) = model.initial[j];

  CompensatedSum log_lik;
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      for (StateIndex k = 0; k < J; ++k) {
        double g = 0.0;
        for (StateIndex j = 0; j < J; ++j) g += model.transition(j, k) * post.forward(t - 1, j);
        post.predicted(t, k) = g;
      }
    }
    double norm = 0.0;
    for (StateIndex j = 0; j < J; ++j) {
      const double joint = emis(t, j) * post.predicted(t, j);
      post.forward(t, j) = joint;
      norm += joint;
    }
    if (!(norm > 0.0)) {
      throw_numerical_error("observation impossible under model at position " + std::to_string(t));
    }
    for (StateIndex j = 0; j < J; ++j) post.forward(t, j) /= norm;
    post.normalizers[t] = norm;
    log_lik.add(std::log(norm));
  }
  post.log_likelihood = log_lik.value();
  return post;
}

ChainPosterior backward_smooth(const HmmModel& model, const ObservedSequence& seq, ChainPosterior fwd) {
  const std::size_t T = fwd.length();
  const std::size_t J = model.num_states;
  if (T != seq.length() || fwd.forward.cols() != J) {
    throw_data_error("forward tables do not match the model and sequence");
  }
  fwd.smoothed = Matrix(T, J);
  for (StateIndex j = 0; j < J; ++j) fwd.smoothed(T - 1, j) = fwd.forward(T - 1, j);

  std::vector<double> ratio(J);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (StateIndex k = 0; k < J; ++k) {
      ratio[k] = safe_ratio(fwd.smoothed(t + 1, k), fwd.predicted(t + 1, k));
    }
    double total = 0.0;
    for (StateIndex j = 0; j < J; ++j) {
      double acc = 0.0;
      for (StateIndex k = 0; k < J; ++k) acc += ratio[k] * model.transition(j, k);
      fwd.smoothed(t, j) = acc * fwd.forward(t, j);
      total += fwd.smoothed(t, j);
    }
    // Exact arithmetic gives total == 1; renormalizing stops rounding drift over long sequences.
    for (StateIndex j = 0; j < J; ++j) fwd.smoothed(t, j) /= total;
  }
  return fwd;
}

ChainPosterior smooth_chain(const HmmModel& model, const ObservedSequence& seq) {
  return backward_smooth(model, seq, forward_pass(model, seq));
}

ViterbiResult viterbi_chain(const HmmModel& model, const ObservedSequence& seq) {
  require_valid(model);
  check_sequence(model, seq);
  const std::size_t T = seq.length();
  const std::size_t J = model.num_states;
  const Matrix emis = emission_table(model, seq);

  Matrix log_trans(J, J);
  for (StateIndex i = 0; i < J; ++i) {
    for (StateIndex j = 0; j < J; ++j) log_trans(i, j) = log_or_neg_inf(model.transition(i, j));
  }

  std::vector<double> delta(J), next(J);
  std::vector<StateIndex> back(T * J, 0);
  for (StateIndex j = 0; j < J; ++j) {
    delta[j] = log_or_neg_inf(model.initial[j]) + log_or_neg_inf(emis(0, j));
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (StateIndex k = 0; k < J; ++k) {
      double best = -std::numeric_limits<double>::infinity();
      StateIndex arg = 0;
      for (StateIndex j = 0; j < J; ++j) {
        const double cand = delta[j] + log_trans(j, k);
        if (cand > best) {
          best = cand;
          arg = j;
        }
      }
      next[k] = best + log_or_neg_inf(emis(t, k));
      back[t * J + k] = arg;
    }
    delta.swap(next);
  }

  ViterbiResult result;
  result.log_joint = -std::numeric_limits<double>::infinity();
  StateIndex last = 0;
  for (StateIndex j = 0; j < J; ++j) {
    if (delta[j] > result.log_joint) {
      result.log_joint = delta[j];
      last = j;
    }
  }
  if (!std::isfinite(result.log_joint)) throw_numerical_error("every state sequence is impossible");

  result.states.assign(T, 0);
  result.states[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) result.states[t - 1] = back[t * J + result.states[t]];
  return result;
}

}  // namespace hmmep
