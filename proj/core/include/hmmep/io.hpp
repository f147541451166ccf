#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmmep/model.hpp"

namespace hmmep {

/// JSON model document:
///   {"num_states": J, "initial": [...], "transition": [[...], ...],
///    "emissions": [[{"type": "categorical", "probs": [...]} | {"type": "poisson", "rate": r}, ...], ...]}
/// with one emission array per state. Returns a validated model; throws
/// Error(Data) naming the line or field at fault.
HmmModel parse_model(std::string_view text);
std::string serialize_model(const HmmModel& model);

/// One sequence per line. Univariate lines hold whitespace-separated integers;
/// multivariate lines separate time steps with ';' and variables with ','.
/// Blank lines and lines starting with '#' are skipped.
std::vector<ObservedSequence> parse_sequences(std::string_view text);
std::string serialize_sequences(std::span<const ObservedSequence> sequences);

/// One vertex per line: "id<TAB>parent<TAB>v1[,v2,...]", root parent -1.
/// Any run of spaces or tabs separates the fields.
ObservedTree parse_tree(std::string_view text);

/// Same layout with the values column optional and ignored.
TreeTopology parse_topology(std::string_view text);

std::string serialize_tree(const ObservedTree& tree);

enum class LogBase { E, Two };

/// "e" or "2"; anything else is Error(Usage).
LogBase parse_log_base(std::string_view text);

enum class ColumnKind {
  Integer,      ///< indices, observed values, Viterbi states
  Real,         ///< probabilities, log-likelihoods, profile values
  Entropy,      ///< nats internally; rescaled on output
};

struct ProfileColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Real;
  std::vector<double> values;
};

struct ProfileTable {
  enum class Shape { Chain, Tree };

  Shape shape = Shape::Chain;
  std::vector<ProfileColumn> columns;

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().values.size(); }
  ProfileColumn& add(std::string name, ColumnKind kind, std::vector<double> values);
  const ProfileColumn* find(std::string_view name) const;
};

/// Column kind implied by a column name: entropy columns start with "H_",
/// integer columns are "sequence", "index", "vertex", "parent", "viterbi"
/// and "x<k>".
ColumnKind column_kind_for(std::string_view name);

/// Number rendering shared by every TSV writer: 12 significant digits,
/// never a negative zero.
std::string format_real(double value);

/// TSV with a header row, "\t" separators and "\n" line endings. Entropy
/// columns are divided by ln(base). Throws Error(Data) on ragged columns.
std::string write_profile(const ProfileTable& table, LogBase base = LogBase::E);

/// Inverse of write_profile: entropy columns are converted back to nats and
/// kinds are taken from the column names.
ProfileTable parse_profile(std::string_view text, LogBase base = LogBase::E);

}  // namespace hmmep
