#pragma once

#include <vector>

#include "hmmep/matrix.hpp"
#include "hmmep/model.hpp"

namespace hmmep {

/// Scaled forward-backward tables for one observed sequence (T rows, J columns).
struct ChainPosterior {
  Matrix forward;                   ///< F_t(j) = P(S_t = j | x_0..x_t)
  std::vector<double> normalizers;  ///< N_t = P(x_t | x_0..x_{t-1})
  Matrix predicted;                 ///< G_t(j) = P(S_t = j | x_0..x_{t-1}), G_0 = initial
  Matrix smoothed;                  ///< L_t(j) = P(S_t = j | x); empty until backward_smooth
  double log_likelihood = 0.0;

  std::size_t length() const noexcept { return normalizers.size(); }
};

/// Forward recursion. Throws Error(Numerical) if some N_t is zero.
ChainPosterior forward_pass(const HmmModel& model, const ObservedSequence& seq);

/// Backward recursion on top of `fwd`; fills `smoothed`.
ChainPosterior backward_smooth(const HmmModel& model, const ObservedSequence& seq, ChainPosterior fwd);

/// forward_pass followed by backward_smooth.
ChainPosterior smooth_chain(const HmmModel& model, const ObservedSequence& seq);

struct ViterbiResult {
  std::vector<StateIndex> states;
  double log_joint = 0.0;  ///< log P(S = states, X = x)
};

/// Most probable state sequence. Ties go to the smaller state index, both for
/// the final state and at every backtracking step.
ViterbiResult viterbi_chain(const HmmModel& model, const ObservedSequence& seq);

}  // namespace hmmep
