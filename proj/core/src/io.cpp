#include "hmmep/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

#include <json.hpp>

#include "hmmep/error.hpp"

namespace hmmep {

namespace {

using nlohmann::json;

// ---- small text helpers ----

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

bool is_blank(char c) { return c == ' ' || c == '\t'; }

std::vector<std::string_view> split_any(std::string_view s, std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && seps.find(s[i]) != std::string_view::npos) ++i;
    std::size_t j = i;
    while (j < s.size() && seps.find(s[j]) == std::string_view::npos) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_exact(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) return out;
    s.remove_prefix(pos + 1);
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_blank(s.back())) s.remove_suffix(1);
  return s;
}

bool skip_line(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

template <class Int>
bool parse_int(std::string_view tok, Int& out) {
  const char* end = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::string in_quotes(std::string_view s) { return "'" + std::string(s) + "'"; }

// ---- model JSON ----

const json& member(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw_data_error("model field " + path + key + " is missing");
  return *it;
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw_data_error("model field " + path + " must be a number");
  return v.get<double>();
}

std::vector<double> numbers_at(const json& v, const std::string& path) {
  if (!v.is_array()) throw_data_error("model field " + path + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number_at(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

VariableDist variable_at(const json& v, const std::string& path) {
  if (!v.is_object()) throw_data_error("model field " + path + " must be an object");
  const json& type = member(v, "type", path + ".");
  if (type == "categorical") return CategoricalDist{numbers_at(member(v, "probs", path + "."), path + ".probs")};
  if (type == "poisson") return PoissonDist{number_at(member(v, "rate", path + "."), path + ".rate")};
  throw_data_error("model field " + path + ".type must be \"categorical\" or \"poisson\"");
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col > 1 ? col - 1 : 1};
}

// ---- tree lines ----

struct TreeLine {
  std::size_t line_no;
  long id;
  long parent;
  std::string_view values;
};

std::vector<TreeLine> read_tree_lines(std::string_view text, bool values_required) {
  std::vector<TreeLine> rows;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (skip_line(lines[i])) continue;
    const auto fields = split_any(lines[i], " \t");
    const std::string where = "line " + std::to_string(i + 1);
    if (fields.size() < 2 || fields.size() > 3 || (values_required && fields.size() != 3)) {
      throw_data_error(where + ": expected " + (values_required ? "3" : "2 or 3") +
                       " fields (vertex, parent, values), found " + std::to_string(fields.size()));
    }
    TreeLine row{i + 1, 0, 0, fields.size() == 3 ? fields[2] : std::string_view{}};
    if (!parse_int(fields[0], row.id) || row.id < 0) {
      throw_data_error(where + ": vertex id " + in_quotes(fields[0]) + " is not a non-negative integer");
    }
    if (!parse_int(fields[1], row.parent) || row.parent < -1) {
      throw_data_error(where + ": parent id " + in_quotes(fields[1]) + " is not an integer >= -1");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw_data_error("tree has no vertices");
  return rows;
}

// Structural checks in the order a reader would fix them: duplicates, roots,
// cycles, then gaps in the id range.
std::vector<VertexId> tree_parents(const std::vector<TreeLine>& rows) {
  std::map<long, const TreeLine*> by_id;
  for (const auto& row : rows) {
    if (!by_id.emplace(row.id, &row).second) {
      throw_data_error("line " + std::to_string(row.line_no) + ": duplicate vertex id " + std::to_string(row.id));
    }
  }
  std::vector<long> roots;
  for (const auto& row : rows) {
    if (row.parent == -1) roots.push_back(row.id);
  }
  if (roots.size() > 1) {
    throw_data_error("multiple roots: vertices " + std::to_string(roots[0]) + " and " + std::to_string(roots[1]) +
                     " both have parent -1");
  }
  for (const auto& row : rows) {
    long cur = row.id;
    for (std::size_t steps = 0; steps <= rows.size(); ++steps) {
      const auto it = by_id.find(cur);
      if (it == by_id.end() || it->second->parent == -1) break;
      cur = it->second->parent;
      if (cur == row.id || steps == rows.size()) {
        throw_data_error("cycle through vertex " + std::to_string(row.id));
      }
    }
  }
  for (const auto& row : rows) {
    if (row.parent != -1 && !by_id.count(row.parent)) {
      throw_data_error("line " + std::to_string(row.line_no) + ": parent " + std::to_string(row.parent) +
                       " of vertex " + std::to_string(row.id) + " is missing");
    }
  }
  const long n = static_cast<long>(rows.size());
  for (long id = 0; id < n; ++id) {
    if (!by_id.count(id)) throw_data_error("vertex ids must be 0.." + std::to_string(n - 1) + "; " + std::to_string(id) + " is missing");
  }
  if (roots.empty()) throw_data_error("tree has no root (no vertex with parent -1)");
  if (roots[0] != 0) throw_data_error("the root must be vertex 0, found root " + std::to_string(roots[0]));

  std::vector<VertexId> parents(rows.size());
  for (const auto& row : rows) {
    parents[row.id] = row.parent == -1 ? kNoParent : static_cast<VertexId>(row.parent);
  }
  return parents;
}

}  // namespace

// ---- models ----

HmmModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte);
    throw_data_error("malformed model JSON at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  if (!doc.is_object()) throw_data_error("model document must be a JSON object");

  HmmModel model;
  const json& js = member(doc, "num_states", "");
  if (!js.is_number_integer() || js.get<long long>() < 1) throw_data_error("model field num_states must be a positive integer");
  model.num_states = js.get<std::size_t>();
  model.initial = numbers_at(member(doc, "initial", ""), "initial");

  const json& trans = member(doc, "transition", "");
  if (!trans.is_array()) throw_data_error("model field transition must be an array of rows");
  const std::size_t J = model.num_states;
  model.transition = Matrix(trans.size(), J);
  for (std::size_t i = 0; i < trans.size(); ++i) {
    const std::string path = "transition[" + std::to_string(i) + "]";
    const auto row = numbers_at(trans[i], path);
    if (row.size() != J) {
      throw_data_error("model field " + path + " has " + std::to_string(row.size()) + " entries, expected " + std::to_string(J));
    }
    std::copy(row.begin(), row.end(), model.transition.row(i).begin());
  }

  const json& emis = member(doc, "emissions", "");
  if (!emis.is_array()) throw_data_error("model field emissions must be an array with one entry per state");
  for (std::size_t j = 0; j < emis.size(); ++j) {
    const std::string path = "emissions[" + std::to_string(j) + "]";
    if (!emis[j].is_array()) throw_data_error("model field " + path + " must be an array of variables");
    StateEmission state;
    for (std::size_t v = 0; v < emis[j].size(); ++v) {
      state.variables.push_back(variable_at(emis[j][v], path + "[" + std::to_string(v) + "]"));
    }
    model.emissions.push_back(std::move(state));
  }
  require_valid(model);
  return model;
}

std::string serialize_model(const HmmModel& model) {
  json doc;
  doc["num_states"] = model.num_states;
  doc["initial"] = model.initial;
  json trans = json::array();
  for (std::size_t i = 0; i < model.transition.rows(); ++i) {
    const auto row = model.transition.row(i);
    trans.push_back(std::vector<double>(row.begin(), row.end()));
  }
  doc["transition"] = trans;
  json emis = json::array();
  for (const auto& state : model.emissions) {
    json vars = json::array();
    for (const auto& var : state.variables) {
      if (const auto* cat = std::get_if<CategoricalDist>(&var)) {
        vars.push_back({{"type", "categorical"}, {"probs", cat->probs}});
      } else {
        vars.push_back({{"type", "poisson"}, {"rate", std::get<PoissonDist>(var).rate}});
      }
    }
    emis.push_back(vars);
  }
  doc["emissions"] = emis;
  return doc.dump(2) + "\n";
}

// ---- sequences ----

std::vector<ObservedSequence> parse_sequences(std::string_view text) {
  std::vector<ObservedSequence> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (skip_line(lines[i])) continue;
    const std::string where = "line " + std::to_string(i + 1);
    const std::string_view line = trim(lines[i]);
    const bool multivariate = line.find_first_of(";,") != std::string_view::npos;
    std::vector<long> values;
    std::size_t num_vars = 1;

    auto read_value = [&](std::string_view tok, const std::string& at) {
      long v = 0;
      if (!parse_int(tok, v)) throw_data_error(where + ": " + at + " " + in_quotes(tok) + " is not an integer");
      if (v < 0) throw_data_error(where + ": " + at + " " + in_quotes(tok) + " is negative");
      values.push_back(v);
    };

    if (!multivariate) {
      const auto toks = split_any(line, " \t");
      for (std::size_t k = 0; k < toks.size(); ++k) read_value(toks[k], "token " + std::to_string(k + 1));
    } else {
      auto steps = split_exact(line, ';');
      if (trim(steps.back()).empty()) steps.pop_back();
      for (std::size_t t = 0; t < steps.size(); ++t) {
        const auto vars = split_exact(trim(steps[t]), ',');
        if (t == 0) num_vars = vars.size();
        if (vars.size() != num_vars) {
          throw_data_error(where + ": step " + std::to_string(t + 1) + " has " + std::to_string(vars.size()) +
                           " variables, step 1 has " + std::to_string(num_vars));
        }
        for (std::size_t v = 0; v < vars.size(); ++v) {
          read_value(trim(vars[v]), "step " + std::to_string(t + 1) + " variable " + std::to_string(v + 1));
        }
      }
    }
    if (!out.empty() && out.front().num_variables() != num_vars) {
      throw_data_error(where + ": sequence has " + std::to_string(num_vars) + " variables, earlier sequences have " +
                       std::to_string(out.front().num_variables()));
    }
    out.emplace_back(num_vars, std::move(values));
  }
  return out;
}

std::string serialize_sequences(std::span<const ObservedSequence> sequences) {
  std::string out;
  for (const auto& seq : sequences) {
    for (std::size_t t = 0; t < seq.length(); ++t) {
      if (t > 0) out += seq.num_variables() == 1 ? " " : ";";
      const auto step = seq.at(t);
      for (std::size_t v = 0; v < step.size(); ++v) {
        if (v > 0) out += ",";
        out += std::to_string(step[v]);
      }
    }
    // A one-step multivariate line needs a separator to stay multivariate.
    if (seq.num_variables() > 1 && seq.length() == 1) out += ";";
    out += "\n";
  }
  return out;
}

// ---- trees ----

ObservedTree parse_tree(std::string_view text) {
  const auto rows = read_tree_lines(text, true);
  auto parents = tree_parents(rows);

  std::size_t num_vars = 0;
  std::vector<std::vector<long>> by_vertex(rows.size());
  for (const auto& row : rows) {
    const std::string where = "line " + std::to_string(row.line_no);
    const auto vars = split_exact(row.values, ',');
    if (&row == &rows.front()) num_vars = vars.size();
    if (vars.size() != num_vars) {
      throw_data_error(where + ": vertex " + std::to_string(row.id) + " has " + std::to_string(vars.size()) +
                       " variables, expected " + std::to_string(num_vars));
    }
    for (std::size_t v = 0; v < vars.size(); ++v) {
      long x = 0;
      if (!parse_int(vars[v], x) || x < 0) {
        throw_data_error(where + ": value " + std::to_string(v + 1) + " " + in_quotes(vars[v]) +
                         " is not a non-negative integer");
      }
      by_vertex[row.id].push_back(x);
    }
  }
  std::vector<long> flat;
  for (auto& vals : by_vertex) flat.insert(flat.end(), vals.begin(), vals.end());
  return ObservedTree{TreeTopology::from_parents(std::move(parents)), ObservedSequence(num_vars, std::move(flat))};
}

TreeTopology parse_topology(std::string_view text) {
  return TreeTopology::from_parents(tree_parents(read_tree_lines(text, false)));
}

std::string serialize_tree(const ObservedTree& tree) {
  std::string out;
  for (VertexId u = 0; u < tree.size(); ++u) {
    out += std::to_string(u);
    out += '\t';
    out += u == 0 ? std::string("-1") : std::to_string(tree.topology.parent(u));
    out += '\t';
    const auto vals = tree.values.at(u);
    for (std::size_t v = 0; v < vals.size(); ++v) {
      if (v > 0) out += ',';
      out += std::to_string(vals[v]);
    }
    out += '\n';
  }
  return out;
}

// ---- profile tables ----

LogBase parse_log_base(std::string_view text) {
  if (text == "e") return LogBase::E;
  if (text == "2") return LogBase::Two;
  throw Error(ErrorKind::Usage, "log base must be 'e' or '2', got " + in_quotes(text));
}

ProfileColumn& ProfileTable::add(std::string name, ColumnKind kind, std::vector<double> values) {
  columns.push_back(ProfileColumn{std::move(name), kind, std::move(values)});
  return columns.back();
}

const ProfileColumn* ProfileTable::find(std::string_view name) const {
  for (const auto& col : columns) {
    if (col.name == name) return &col;
  }
  return nullptr;
}

ColumnKind column_kind_for(std::string_view name) {
  if (name.starts_with("H_")) return ColumnKind::Entropy;
  if (name == "sequence" || name == "index" || name == "vertex" || name == "parent" || name == "viterbi") {
    return ColumnKind::Integer;
  }
  if (name.size() > 1 && name[0] == 'x' &&
      std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return ColumnKind::Integer;
  }
  return ColumnKind::Real;
}

std::string format_real(double value) {
  if (value == 0.0) return "0";
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  std::string s(buf);
  if (s == "-0") return "0";
  return s;
}

std::string write_profile(const ProfileTable& table, LogBase base) {
  const std::size_t n = table.rows();
  for (const auto& col : table.columns) {
    if (col.values.size() != n) {
      throw_data_error("profile column " + in_quotes(col.name) + " has " + std::to_string(col.values.size()) +
                       " rows, expected " + std::to_string(n));
    }
  }
  const double scale = base == LogBase::Two ? 1.0 / std::numbers::ln2 : 1.0;
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += '\t';
    out += table.columns[c].name;
  }
  out += '\n';
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto& col = table.columns[c];
      if (c > 0) out += '\t';
      const double v = col.values[r];
      switch (col.kind) {
        case ColumnKind::Integer:
          out += std::to_string(static_cast<long long>(std::llround(v)));
          break;
        case ColumnKind::Entropy:
          out += format_real(v * scale);
          break;
        case ColumnKind::Real:
          out += format_real(v);
          break;
      }
    }
    out += '\n';
  }
  return out;
}

ProfileTable parse_profile(std::string_view text, LogBase base) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front().empty()) throw_data_error("profile has no header row");
  ProfileTable table;
  for (auto name : split_exact(lines.front(), '\t')) table.add(std::string(name), column_kind_for(name), {});
  table.shape = table.find("vertex") ? ProfileTable::Shape::Tree : ProfileTable::Shape::Chain;
  const double scale = base == LogBase::Two ? std::numbers::ln2 : 1.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split_exact(lines[i], '\t');
    if (cells.size() != table.columns.size()) {
      throw_data_error("profile line " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(table.columns.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto& col = table.columns[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (ec != std::errc{} || ptr != cells[c].data() + cells[c].size()) {
        throw_data_error("profile line " + std::to_string(i + 1) + ": cell " + in_quotes(cells[c]) + " is not a number");
      }
      col.values.push_back(col.kind == ColumnKind::Entropy ? v * scale : v);
    }
  }
  return table;
}

}  // namespace hmmep
