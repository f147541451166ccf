#include "hmmep/model_selection.hpp"

#include <cmath>
#include <variant>

#include "hmmep/error.hpp"

namespace hmmep {

namespace {

void check_input(const CriterionInput& in) {
  if (in.sample_size < 1) throw_data_error("sample size must be at least 1");
  if (!(in.global_entropy >= 0.0)) throw_data_error("global entropy must be non-negative");
}

std::size_t emission_dof(const VariableDist& dist) {
  if (const auto* cat = std::get_if<CategoricalDist>(&dist)) return cat->probs.size() - 1;
  return 1;
}

}  // namespace

std::size_t free_parameter_count(const HmmModel& model) {
  require_valid(model);
  const std::size_t J = model.num_states;
  std::size_t per_state = 0;
  for (const auto& var : model.emissions.front().variables) per_state += emission_dof(var);
  return (J - 1) + J * (J - 1) + J * per_state;
}

double nec(const CriterionInput& in) {
  check_input(in);
  if (in.num_states < 2) throw Error(ErrorKind::Usage, "NEC is not defined for a one-state model");
  if (!in.baseline_log_likelihood) {
    throw Error(ErrorKind::Usage, "NEC needs the log-likelihood of a one-state baseline");
  }
  const double gain = in.log_likelihood - *in.baseline_log_likelihood;
  if (!(gain > 0.0)) {
    throw_data_error("NEC needs a log-likelihood above the one-state baseline (difference is " +
                     std::to_string(gain) + ")");
  }
  return in.global_entropy / gain;
}

double bic(const CriterionInput& in) {
  check_input(in);
  return 2.0 * in.log_likelihood - static_cast<double>(in.free_params) * std::log(static_cast<double>(in.sample_size));
}

double icl_bic(const CriterionInput& in) { return bic(in) - 2.0 * in.global_entropy; }

}  // namespace hmmep
