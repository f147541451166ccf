#pragma once

#include <vector>

#include "hmmep/chain_inference.hpp"
#include "hmmep/matrix.hpp"
#include "hmmep/model.hpp"

namespace hmmep {

enum class ChainDirection { Past, Future };

/// Entropy profiles of the hidden state sequence given the observations, in nats.
///
/// Past direction: conditional[0] = H(S_0 | x), conditional[t] = H(S_t | S_{t-1}, x);
/// partial[t] = H(S_0..S_t | x); hernando(t, j) = H(S_0..S_{t-1} | S_t = j, x_0..x_t).
///
/// Future direction: conditional[t] = H(S_t | S_{t+1}, x), the last slot holding
/// H(S_{T-1} | x); partial[t] = H(S_t..S_{T-1} | x);
/// hernando(t, j) = H(S_{t+1}..S_{T-1} | S_t = j, x_{t+1}..x_{T-1}).
///
/// `hernando` is empty for profiles produced by the direct routes.
struct ChainEntropyProfile {
  ChainDirection direction = ChainDirection::Past;
  std::vector<double> marginal;
  std::vector<double> conditional;
  std::vector<double> partial;
  double global_entropy = 0.0;
  Matrix hernando;
  /// Largest entrywise gap between the two routes, when both were run.
  double route_discrepancy = 0.0;
};

/// Agreement required between the partial-entropy route and the direct route.
inline constexpr double kRouteTolerance = 1e-9;

/// H(S_t | x) for every t, from the smoothed probabilities.
std::vector<double> marginal_entropy_profile(const ChainPosterior& posterior);

/// Partial entropies from the forward Hernando recursion, conditionals by differencing.
ChainEntropyProfile entropy_past_hernando(const HmmModel& model, const ObservedSequence& seq,
                                          const ChainPosterior& posterior);

/// Conditionals from the posterior pairwise laws, partials by cumulative summation.
ChainEntropyProfile entropy_past_direct(const HmmModel& model, const ObservedSequence& seq,
                                        const ChainPosterior& posterior);

/// Partial entropies from the backward recursion, conditionals by reverse differencing.
ChainEntropyProfile entropy_future_hernando(const HmmModel& model, const ObservedSequence& seq,
                                            const ChainPosterior& posterior);

/// Conditionals from the reverse posterior transition, partials by reverse summation.
ChainEntropyProfile entropy_future_direct(const HmmModel& model, const ObservedSequence& seq,
                                          const ChainPosterior& posterior);

/// Runs both future routes, records their gap in `route_discrepancy`, and throws
/// Error(Numerical) if they disagree by more than kRouteTolerance.
ChainEntropyProfile entropy_future(const HmmModel& model, const ObservedSequence& seq,
                                   const ChainPosterior& posterior);

}  // namespace hmmep
