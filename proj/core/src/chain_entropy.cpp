#include "hmmep/chain_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hmmep/error.hpp"
#include "hmmep/numeric.hpp"

namespace hmmep {

namespace {

void check_posterior(const HmmModel& model, const ObservedSequence& seq, const ChainPosterior& post) {
  if (post.length() == 0 || post.length() != seq.length() || post.smoothed.rows() != post.length() ||
      post.smoothed.cols() != model.num_states) {
    throw_data_error("chain posterior does not match the model and sequence (was it smoothed?)");
  }
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

// Moves the weighted mean of dev into offset.
void recenter(std::vector<double>& dev, std::span<const double> weights, CompensatedSum& offset) {
  double shift = 0.0;
  for (std::size_t j = 0; j < dev.size(); ++j) shift += weights[j] * dev[j];
  for (double& d : dev) d -= shift;
  offset.add(shift);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

}  // namespace

std::vector<double> marginal_entropy_profile(const ChainPosterior& posterior) {
  std::vector<double> out(posterior.smoothed.rows());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = entropy(posterior.smoothed.row(t));
  return out;
}

ChainEntropyProfile entropy_past_hernando(const HmmModel& model, const ObservedSequence& seq,
                                          const ChainPosterior& post) {
  check_posterior(model, seq, post);
  const std::size_t T = post.length();
  const std::size_t J = model.num_states;

  ChainEntropyProfile prof;
  prof.direction = ChainDirection::Past;
  prof.marginal = marginal_entropy_profile(post);
  prof.hernando = Matrix(T, J);  // row 0: nothing precedes S_0
  prof.partial.resize(T);
  prof.partial[0] = prof.marginal[0];

  // Row t is offset + dev[j]; the offset is kept apart so that rounding
  // does not grow with the accumulated entropy.
  CompensatedSum offset;
  std::vector<double> dev(J, 0.0), next(J), weights(J);
  for (std::size_t t = 1; t < T; ++t) {
    for (StateIndex j = 0; j < J; ++j) {
      const double g = post.predicted(t, j);
      next[j] = 0.0;
      if (!(g > 0.0)) continue;
      for (StateIndex i = 0; i < J; ++i) weights[i] = model.transition(i, j) * post.forward(t - 1, i) / g;
      next[j] = weighted_entropy_step(weights, dev);
    }
    dev.swap(next);
    recenter(dev, post.forward.row(t), offset);
    for (StateIndex j = 0; j < J; ++j) {
      if (post.predicted(t, j) > 0.0) prof.hernando(t, j) = offset.value() + dev[j];
    }
    prof.partial[t] = offset.value() + weighted_entropy_step(post.smoothed.row(t), dev);
    if (t + 1 == T) prof.global_entropy = offset.value() + weighted_entropy_step(post.forward.row(t), dev);
  }
  if (T == 1) prof.global_entropy = entropy(post.forward.row(0));

  prof.conditional.resize(T);
  prof.conditional[0] = prof.partial[0];
  for (std::size_t t = 1; t < T; ++t) prof.conditional[t] = prof.partial[t] - prof.partial[t - 1];
  return prof;
}

ChainEntropyProfile entropy_past_direct(const HmmModel& model, const ObservedSequence& seq,
                                        const ChainPosterior& post) {
  check_posterior(model, seq, post);
  const std::size_t T = post.length();
  const std::size_t J = model.num_states;

  ChainEntropyProfile prof;
  prof.direction = ChainDirection::Past;
  prof.marginal = marginal_entropy_profile(post);
  prof.conditional.resize(T);
  prof.conditional[0] = prof.marginal[0];
  for (std::size_t t = 1; t < T; ++t) {
    double h = 0.0;
    for (StateIndex j = 0; j < J; ++j) {
      const double l = post.smoothed(t, j);
      const double g = post.predicted(t, j);
      if (!(l > 0.0) || !(g > 0.0)) continue;
      for (StateIndex i = 0; i < J; ++i) {
        const double joint = l * model.transition(i, j) * post.forward(t - 1, i) / g;
        const double prev = post.smoothed(t - 1, i);
        if (joint > 0.0 && prev > 0.0) h -= joint * std::log(joint / prev);
      }
    }
    prof.conditional[t] = h;
  }

  prof.partial.resize(T);
  CompensatedSum running;
  for (std::size_t t = 0; t < T; ++t) {
    running.add(prof.conditional[t]);
    prof.partial[t] = running.value();
  }
  prof.global_entropy = prof.partial[T - 1];
  return prof;
}

ChainEntropyProfile entropy_future_hernando(const HmmModel& model, const ObservedSequence& seq,
                                            const ChainPosterior& post) {
  check_posterior(model, seq, post);
  const std::size_t T = post.length();
  const std::size_t J = model.num_states;

  ChainEntropyProfile prof;
  prof.direction = ChainDirection::Future;
  prof.marginal = marginal_entropy_profile(post);
  prof.hernando = Matrix(T, J);  // row T-1: nothing follows S_{T-1}
  prof.partial.resize(T);
  prof.partial[T - 1] = prof.marginal[T - 1];

  CompensatedSum offset;
  std::vector<double> dev(J, 0.0), next(J), ratio(J), weights(J);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (StateIndex k = 0; k < J; ++k) ratio[k] = safe_ratio(post.smoothed(t + 1, k), post.predicted(t + 1, k));
    std::vector<bool> defined(J, false);
    for (StateIndex j = 0; j < J; ++j) {
      next[j] = 0.0;
      double norm = 0.0;
      for (StateIndex k = 0; k < J; ++k) {
        weights[k] = ratio[k] * model.transition(j, k);
        norm += weights[k];
      }
      if (!(norm > 0.0)) continue;
      for (StateIndex k = 0; k < J; ++k) weights[k] /= norm;
      next[j] = weighted_entropy_step(weights, dev);
      defined[j] = true;
    }
    dev.swap(next);
    recenter(dev, post.smoothed.row(t), offset);
    for (StateIndex j = 0; j < J; ++j) {
      if (defined[j]) prof.hernando(t, j) = offset.value() + dev[j];
    }
    prof.partial[t] = offset.value() + weighted_entropy_step(post.smoothed.row(t), dev);
  }

  prof.conditional.resize(T);
  prof.conditional[T - 1] = prof.partial[T - 1];
  for (std::size_t t = 0; t + 1 < T; ++t) prof.conditional[t] = prof.partial[t] - prof.partial[t + 1];
  prof.global_entropy = prof.partial[0];
  return prof;
}

ChainEntropyProfile entropy_future_direct(const HmmModel& model, const ObservedSequence& seq,
                                          const ChainPosterior& post) {
  check_posterior(model, seq, post);
  const std::size_t T = post.length();
  const std::size_t J = model.num_states;

  ChainEntropyProfile prof;
  prof.direction = ChainDirection::Future;
  prof.marginal = marginal_entropy_profile(post);
  prof.conditional.resize(T);
  prof.conditional[T - 1] = prof.marginal[T - 1];
  for (std::size_t t = 0; t + 1 < T; ++t) {
    double h = 0.0;
    for (StateIndex k = 0; k < J; ++k) {
      const double l = post.smoothed(t + 1, k);
      const double g = post.predicted(t + 1, k);
      if (!(l > 0.0) || !(g > 0.0)) continue;
      for (StateIndex j = 0; j < J; ++j) {
        const double cond = model.transition(j, k) * post.forward(t, j) / g;
        if (cond > 0.0) h -= l * cond * std::log(cond);
      }
    }
    prof.conditional[t] = h;
  }

  prof.partial.resize(T);
  CompensatedSum running;
  for (std::size_t t = T; t-- > 0;) {
    running.add(prof.conditional[t]);
    prof.partial[t] = running.value();
  }
  prof.global_entropy = prof.partial[0];
  return prof;
}

ChainEntropyProfile entropy_future(const HmmModel& model, const ObservedSequence& seq,
                                   const ChainPosterior& post) {
  ChainEntropyProfile prof = entropy_future_hernando(model, seq, post);
  const ChainEntropyProfile direct = entropy_future_direct(model, seq, post);
  prof.route_discrepancy = std::max({max_abs_diff(prof.conditional, direct.conditional),
                                     max_abs_diff(prof.partial, direct.partial),
                                     std::fabs(prof.global_entropy - direct.global_entropy)});
  if (!(prof.route_discrepancy <= kRouteTolerance)) {
    std::ostringstream os;
    os << "future entropy routes disagree by " << prof.route_discrepancy;
    throw_numerical_error(os.str());
  }
  return prof;
}

}  // namespace hmmep
