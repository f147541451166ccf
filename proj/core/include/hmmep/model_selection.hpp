#pragma once

#include <cstddef>
#include <optional>

#include "hmmep/model.hpp"

namespace hmmep {

/// Independent parameters of a model: (J-1) initial, J(J-1) transition and
/// J times the per-variable emission degrees of freedom.
std::size_t free_parameter_count(const HmmModel& model);

struct CriterionInput {
  std::size_t num_states = 0;               ///< J of the model being scored
  double log_likelihood = 0.0;              ///< log f_J(x)
  std::optional<double> baseline_log_likelihood;  ///< log f_1(x); NEC only
  double global_entropy = 0.0;              ///< H(S | X = x), summed over the dataset
  std::size_t free_params = 0;
  std::size_t sample_size = 1;              ///< total time points or vertices
};

/// Normalized entropy criterion, to be minimized. Throws Error(Usage) for a
/// one-state model or a missing baseline, Error(Data) if the likelihood gain
/// over the baseline is not positive.
double nec(const CriterionInput& input);

/// 2 log L - d log n.
double bic(const CriterionInput& input);

/// 2 log L - 2 H - d log n, to be maximized.
double icl_bic(const CriterionInput& input);

}  // namespace hmmep
