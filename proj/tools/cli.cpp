#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "hmmep/chain_entropy.hpp"
#include "hmmep/chain_inference.hpp"
#include "hmmep/error.hpp"
#include "hmmep/io.hpp"
#include "hmmep/model_selection.hpp"
#include "hmmep/oracle.hpp"
#include "hmmep/tree_entropy.hpp"
#include "hmmep/tree_inference.hpp"

namespace hmmep::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Options {
  std::string model_path;
  std::string data_path;
  std::string out_path;
  std::string topology_path;
  std::string log_base = "e";
  std::string format = "auto";
  std::string cond;
  std::size_t length = 0;
  std::size_t count = 1;
  unsigned long long seed = 0;
  std::optional<std::uint64_t> budget;
  std::optional<double> baseline_loglik;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Dataset {
  bool is_tree = false;
  std::vector<ObservedSequence> sequences;
  ObservedTree tree;
};

bool looks_like_tree(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return line.find('\t') != std::string::npos;
  }
  return false;
}

Dataset load_data(const Options& opt) {
  if (opt.data_path.empty()) throw Error(ErrorKind::Usage, "--data is required");
  const std::string text = read_file(opt.data_path);
  Dataset ds;
  ds.is_tree = opt.format == "tree" || (opt.format == "auto" && looks_like_tree(text));
  if (ds.is_tree) {
    ds.tree = parse_tree(text);
  } else {
    ds.sequences = parse_sequences(text);
    if (ds.sequences.empty()) throw_data_error(opt.data_path + " holds no sequences");
    for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
      if (ds.sequences[i].length() == 0) throw_data_error("sequence " + std::to_string(i) + " is empty");
    }
  }
  return ds;
}

HmmModel load_model(const Options& opt) {
  if (opt.model_path.empty()) throw Error(ErrorKind::Usage, "--model is required");
  return parse_model(read_file(opt.model_path));
}

ObservedTree as_path_tree(const ObservedSequence& seq) {
  return ObservedTree{TreeTopology::path(seq.length()), seq};
}

std::vector<double> iota_column(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  return v;
}

void add_observations(ProfileTable& t, const ObservedSequence& obs) {
  for (std::size_t v = 0; v < obs.num_variables(); ++v) {
    std::vector<double> col(obs.length());
    for (std::size_t i = 0; i < obs.length(); ++i) col[i] = static_cast<double>(obs.at(i)[v]);
    t.add("x" + std::to_string(v), ColumnKind::Integer, std::move(col));
  }
}

ProfileTable chain_base(std::size_t seq_index, const ObservedSequence& seq) {
  ProfileTable t;
  t.shape = ProfileTable::Shape::Chain;
  t.add("sequence", ColumnKind::Integer, std::vector<double>(seq.length(), static_cast<double>(seq_index)));
  t.add("index", ColumnKind::Integer, iota_column(seq.length()));
  add_observations(t, seq);
  return t;
}

ProfileTable tree_base(const ObservedTree& tree) {
  ProfileTable t;
  t.shape = ProfileTable::Shape::Tree;
  t.add("vertex", ColumnKind::Integer, iota_column(tree.size()));
  std::vector<double> parents(tree.size(), -1.0);
  for (VertexId u = 1; u < tree.size(); ++u) parents[u] = static_cast<double>(tree.topology.parent(u));
  t.add("parent", ColumnKind::Integer, std::move(parents));
  add_observations(t, tree.values);
  return t;
}

void add_matrix(ProfileTable& t, const std::string& prefix, const Matrix& m) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::vector<double> col(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) col[r] = m(r, j);
    t.add(prefix + std::to_string(j), ColumnKind::Real, std::move(col));
  }
}

void add_states(ProfileTable& t, const std::vector<StateIndex>& states) {
  std::vector<double> col(states.begin(), states.end());
  t.add("viterbi", ColumnKind::Integer, std::move(col));
}

std::vector<double> repeated(double v, std::size_t n) { return std::vector<double>(n, v); }

void append_rows(ProfileTable& acc, ProfileTable part) {
  if (acc.columns.empty()) {
    acc = std::move(part);
    return;
  }
  for (std::size_t c = 0; c < acc.columns.size(); ++c) {
    auto& dst = acc.columns[c].values;
    const auto& src = part.columns[c].values;
    dst.insert(dst.end(), src.begin(), src.end());
  }
}

// ---- subcommand bodies ----

ProfileTable smooth_table(const HmmModel& model, const Dataset& ds) {
  if (ds.is_tree) {
    const TreePosterior post = smooth_tree(model, ds.tree);
    ProfileTable t = tree_base(ds.tree);
    add_matrix(t, "P_", post.smoothed);
    t.add("H_marginal", ColumnKind::Entropy, marginal_entropy_profile(post));
    return t;
  }
  ProfileTable all;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    const ChainPosterior post = smooth_chain(model, ds.sequences[i]);
    ProfileTable t = chain_base(i, ds.sequences[i]);
    add_matrix(t, "P_", post.smoothed);
    t.add("H_marginal", ColumnKind::Entropy, marginal_entropy_profile(post));
    append_rows(all, std::move(t));
  }
  return all;
}

ProfileTable viterbi_table(const HmmModel& model, const Dataset& ds) {
  if (ds.is_tree) {
    const TreeViterbiResult vit = viterbi_tree(model, ds.tree);
    ProfileTable t = tree_base(ds.tree);
    add_states(t, vit.states);
    t.add("log_joint", ColumnKind::Real, repeated(vit.log_joint, ds.tree.size()));
    return t;
  }
  ProfileTable all;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    const ViterbiResult vit = viterbi_chain(model, ds.sequences[i]);
    ProfileTable t = chain_base(i, ds.sequences[i]);
    add_states(t, vit.states);
    t.add("log_joint", ColumnKind::Real, repeated(vit.log_joint, vit.states.size()));
    append_rows(all, std::move(t));
  }
  return all;
}

ProfileTable viterbi_profile_table(const HmmModel& model, const Dataset& ds) {
  auto one = [&](const ObservedTree& tree, ProfileTable t) {
    add_states(t, viterbi_tree(model, tree).states);
    add_matrix(t, "V_", viterbi_profiles(model, tree));
    return t;
  };
  if (ds.is_tree) return one(ds.tree, tree_base(ds.tree));
  ProfileTable all;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    append_rows(all, one(as_path_tree(ds.sequences[i]), chain_base(i, ds.sequences[i])));
  }
  return all;
}

ProfileTable chain_entropy_table(const HmmModel& model, std::size_t index, const ObservedSequence& seq,
                                 const std::string& cond) {
  const ChainPosterior post = smooth_chain(model, seq);
  const bool past = cond == "past";
  const ChainEntropyProfile prof = past ? entropy_past_hernando(model, seq, post) : entropy_future(model, seq, post);
  ProfileTable t = chain_base(index, seq);
  add_matrix(t, "P_", post.smoothed);
  t.add("H_marginal", ColumnKind::Entropy, prof.marginal);
  t.add(past ? "H_cond_past" : "H_cond_future", ColumnKind::Entropy, prof.conditional);
  t.add(past ? "H_partial_prefix" : "H_partial_suffix", ColumnKind::Entropy, prof.partial);
  t.add("H_global", ColumnKind::Entropy, repeated(prof.global_entropy, seq.length()));
  return t;
}

ProfileTable tree_entropy_table(const HmmModel& model, const ObservedTree& tree, const std::string& cond,
                                std::uint64_t budget) {
  const TreePosterior post = smooth_tree(model, tree);
  ProfileTable t = tree_base(tree);
  add_matrix(t, "P_", post.smoothed);
  t.add("H_marginal", ColumnKind::Entropy, marginal_entropy_profile(post));
  double global = 0.0;
  if (cond == "parent" || cond == "both") {
    const ParentConditional parent = parent_conditional_profile(model, tree, post);
    const SubtreeEntropiesFromParents sub = subtree_entropies_approach1(model, tree, post, parent);
    t.add("H_cond_parent", ColumnKind::Entropy, parent.entropy);
    t.add("H_partial_subtree", ColumnKind::Entropy, sub.partial_subtree);
    t.add("H_partial_complement", ColumnKind::Entropy, sub.partial_complement);
    global = sub.global_entropy;
  } else {
    global = global_entropy_upward(post, state_conditioned_upward(model, tree, post));
  }
  if (cond == "children" || cond == "both") {
    t.add("H_cond_children", ColumnKind::Entropy, children_conditional_profile(model, tree, post, budget));
  }
  t.add("H_global", ColumnKind::Entropy, repeated(global, tree.size()));
  return t;
}

ProfileTable entropy_table(const HmmModel& model, const Dataset& ds, const Options& opt) {
  const std::uint64_t budget = opt.budget.value_or(kDefaultChildrenBudget);
  if (ds.is_tree) {
    const std::string cond = opt.cond.empty() ? "both" : opt.cond;
    if (cond == "past" || cond == "future") {
      throw Error(ErrorKind::Usage, "--cond " + cond + " applies to sequences; trees take parent, children or both");
    }
    return tree_entropy_table(model, ds.tree, cond, budget);
  }
  const std::string cond = opt.cond.empty() ? "past" : opt.cond;
  if (cond != "past" && cond != "future") {
    throw Error(ErrorKind::Usage, "--cond " + cond + " applies to trees; sequences take past or future");
  }
  ProfileTable all;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    append_rows(all, chain_entropy_table(model, i, ds.sequences[i], cond));
  }
  return all;
}

std::vector<double> oracle_column(const OracleResult& res, OracleQueryKind kind) {
  std::vector<double> col(res.num_positions());
  for (VertexId u = 0; u < col.size(); ++u) col[u] = oracle_entropy(res, {kind, u, 0});
  return col;
}

ProfileTable oracle_table(const HmmModel& model, const Dataset& ds, const Options& opt) {
  const std::uint64_t budget = opt.budget.value_or(kDefaultOracleBudget);
  auto fill = [](const OracleResult& res, ProfileTable t, bool tree) {
    add_matrix(t, "P_", oracle_marginals(res));
    t.add("H_marginal", ColumnKind::Entropy, oracle_column(res, OracleQueryKind::Marginal));
    t.add(tree ? "H_cond_parent" : "H_cond_past", ColumnKind::Entropy,
          oracle_column(res, OracleQueryKind::ParentConditional));
    t.add(tree ? "H_cond_children" : "H_cond_future", ColumnKind::Entropy,
          oracle_column(res, OracleQueryKind::ChildrenConditional));
    if (tree) {
      t.add("H_partial_subtree", ColumnKind::Entropy, oracle_column(res, OracleQueryKind::SubtreePartial));
      t.add("H_partial_complement", ColumnKind::Entropy, oracle_column(res, OracleQueryKind::ComplementPartial));
    } else {
      t.add("H_partial_prefix", ColumnKind::Entropy, oracle_column(res, OracleQueryKind::PrefixPartial));
      t.add("H_partial_suffix", ColumnKind::Entropy, oracle_column(res, OracleQueryKind::SubtreePartial));
    }
    t.add("H_global", ColumnKind::Entropy, repeated(oracle_entropy(res, {}), res.num_positions()));
    add_states(t, oracle_argmax(res).states);
    return t;
  };
  if (ds.is_tree) return fill(enumerate_tree(model, ds.tree, budget), tree_base(ds.tree), true);
  ProfileTable all;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    append_rows(all, fill(enumerate_chain(model, ds.sequences[i], budget), chain_base(i, ds.sequences[i]), false));
  }
  return all;
}

ProfileTable summary_table(const HmmModel& model, const Dataset& ds, const Options& opt) {
  const std::uint64_t budget = opt.budget.value_or(kDefaultChildrenBudget);
  std::vector<ObservedTree> trees;
  if (ds.is_tree) {
    trees.push_back(ds.tree);
  } else {
    for (const auto& seq : ds.sequences) trees.push_back(as_path_tree(seq));
  }
  ProfileTable t;
  t.shape = ds.is_tree ? ProfileTable::Shape::Tree : ProfileTable::Shape::Chain;
  std::vector<double> g, c, m, rc, rm;
  for (const auto& tree : trees) {
    const TreePosterior post = smooth_tree(model, tree);
    const EntropySummary s = entropy_summary(tree_entropy_profile(model, tree, post, budget));
    g.push_back(s.parent_sum);
    c.push_back(s.children_sum);
    m.push_back(s.marginal_sum);
    rc.push_back(s.ratio_children.value_or(kNaN));
    rm.push_back(s.ratio_marginal.value_or(kNaN));
  }
  t.add("index", ColumnKind::Integer, iota_column(trees.size()));
  t.add("H_G", ColumnKind::Entropy, std::move(g));
  t.add("H_C", ColumnKind::Entropy, std::move(c));
  t.add("H_M", ColumnKind::Entropy, std::move(m));
  t.add("ratio_children", ColumnKind::Real, std::move(rc));
  t.add("ratio_marginal", ColumnKind::Real, std::move(rm));
  return t;
}

ProfileTable criteria_table(const HmmModel& model, const Dataset& ds, const Options& opt) {
  CriterionInput in;
  in.num_states = model.num_states;
  in.free_params = free_parameter_count(model);
  in.baseline_log_likelihood = opt.baseline_loglik;
  in.sample_size = 0;
  if (ds.is_tree) {
    const TreePosterior post = upward_pass(model, ds.tree);
    in.log_likelihood = post.log_likelihood;
    in.global_entropy = global_entropy_upward(post, state_conditioned_upward(model, ds.tree, post));
    in.sample_size = ds.tree.size();
  } else {
    for (const auto& seq : ds.sequences) {
      const ChainPosterior post = smooth_chain(model, seq);
      in.log_likelihood += post.log_likelihood;
      in.global_entropy += entropy_past_hernando(model, seq, post).global_entropy;
      in.sample_size += seq.length();
    }
  }
  ProfileTable t;
  t.shape = ds.is_tree ? ProfileTable::Shape::Tree : ProfileTable::Shape::Chain;
  t.add("num_states", ColumnKind::Integer, {static_cast<double>(in.num_states)});
  t.add("free_params", ColumnKind::Integer, {static_cast<double>(in.free_params)});
  t.add("sample_size", ColumnKind::Integer, {static_cast<double>(in.sample_size)});
  t.add("log_likelihood", ColumnKind::Real, {in.log_likelihood});
  t.add("H_global", ColumnKind::Entropy, {in.global_entropy});
  t.add("bic", ColumnKind::Real, {bic(in)});
  t.add("icl_bic", ColumnKind::Real, {icl_bic(in)});
  if (opt.baseline_loglik) t.add("nec", ColumnKind::Real, {nec(in)});
  return t;
}

std::string validate_report(const Options& opt) {
  const HmmModel model = load_model(opt);
  std::string report = "model: ok (" + std::to_string(model.num_states) + " states, " +
                       std::to_string(model.num_variables()) + " variables, " +
                       std::to_string(free_parameter_count(model)) + " free parameters)\n";
  if (opt.data_path.empty()) return report;
  const Dataset ds = load_data(opt);
  if (ds.is_tree) {
    emission_table(model, ds.tree.values);
    report += "data: ok (tree with " + std::to_string(ds.tree.size()) + " vertices)\n";
  } else {
    std::size_t total = 0;
    for (const auto& seq : ds.sequences) {
      emission_table(model, seq);
      total += seq.length();
    }
    report += "data: ok (" + std::to_string(ds.sequences.size()) + " sequences, " + std::to_string(total) +
              " time steps)\n";
  }
  return report;
}

std::string simulate_text(const Options& opt) {
  const HmmModel model = load_model(opt);
  if (!opt.topology_path.empty()) {
    if (opt.length != 0) throw Error(ErrorKind::Usage, "--length and --topology are exclusive");
    const TreeTopology topo = parse_topology(read_file(opt.topology_path));
    return serialize_tree(simulate_tree(model, topo, opt.seed).observations);
  }
  if (opt.length == 0) throw Error(ErrorKind::Usage, "simulate needs --length N (N >= 1) or --topology FILE");
  std::vector<ObservedSequence> seqs;
  for (std::size_t i = 0; i < opt.count; ++i) {
    seqs.push_back(simulate_chain(model, opt.length, opt.seed + i).observations);
  }
  return serialize_sequences(seqs);
}

void emit(const Options& opt, const std::string& text, std::ostream& out) {
  if (opt.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(opt.out_path, std::ios::binary);
  if (!file) throw_data_error("cannot write " + opt.out_path);
  file << text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy profiles for hidden Markov chains and trees", "hmmep"};
  app.require_subcommand(1);
  Options opt;

  auto model_opt = [&](CLI::App* sub) { sub->add_option("--model", opt.model_path, "model JSON file")->required(); };
  auto data_opt = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--data", opt.data_path, "sequences (one per line) or tree (vertex, parent, values)");
    if (required) o->required();
    sub->add_option("--format", opt.format, "input layout; auto picks tree when the first line has a tab")
        ->check(CLI::IsMember({"auto", "chain", "tree"}));
  };
  auto out_opt = [&](CLI::App* sub) { sub->add_option("--out", opt.out_path, "write here instead of stdout"); };
  auto base_opt = [&](CLI::App* sub) {
    sub->add_option("--log-base", opt.log_base, "entropy units: e (nats) or 2 (bits)")
        ->check(CLI::IsMember({"e", "2"}));
  };
  auto budget_opt = [&](CLI::App* sub, const char* what) { sub->add_option("--budget", opt.budget, what); };

  auto* validate = app.add_subcommand("validate", "check a model and, optionally, data against it");
  model_opt(validate);
  data_opt(validate, false);

  auto* smooth = app.add_subcommand("smooth", "smoothed state probabilities and marginal entropies");
  auto* viterbi = app.add_subcommand("viterbi", "most probable state sequence or tree");
  auto* vprof = app.add_subcommand("viterbi-profiles", "per-vertex constrained maxima of the posterior");
  auto* entropy = app.add_subcommand("entropy", "conditional, partial and global state entropies");
  auto* oracle = app.add_subcommand("oracle", "exact quantities by enumeration (small inputs only)");
  auto* summary = app.add_subcommand("summary", "sums G, C, M of conditional and marginal entropies");
  auto* criteria = app.add_subcommand("criteria", "BIC, ICL-BIC and NEC");
  for (auto* sub : {smooth, viterbi, vprof, entropy, oracle, summary, criteria}) {
    model_opt(sub);
    data_opt(sub, true);
    out_opt(sub);
    base_opt(sub);
  }
  entropy->add_option("--cond", opt.cond, "past|future for sequences, parent|children|both for trees")
      ->check(CLI::IsMember({"past", "future", "parent", "children", "both"}));
  budget_opt(entropy, "term budget for the children-conditioned profile");
  budget_opt(summary, "term budget for the children-conditioned profile");
  budget_opt(oracle, "maximum number of enumerated configurations");
  criteria->add_option("--baseline-loglik", opt.baseline_loglik, "log-likelihood of a one-state model (enables NEC)");

  auto* simulate = app.add_subcommand("simulate", "draw observations from a model");
  model_opt(simulate);
  out_opt(simulate);
  simulate->add_option("--length", opt.length, "sequence length");
  simulate->add_option("--count", opt.count, "number of sequences")->check(CLI::PositiveNumber);
  simulate->add_option("--topology", opt.topology_path, "tree file (vertex, parent[, values ignored])");
  simulate->add_option("--seed", opt.seed, "random seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::Usage);
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "validate") {
      emit(opt, validate_report(opt), out);
      return 0;
    }
    if (name == "simulate") {
      emit(opt, simulate_text(opt), out);
      return 0;
    }
    const LogBase base = parse_log_base(opt.log_base);
    const HmmModel model = load_model(opt);
    const Dataset ds = load_data(opt);
    ProfileTable table;
    if (name == "smooth") {
      table = smooth_table(model, ds);
    } else if (name == "viterbi") {
      table = viterbi_table(model, ds);
    } else if (name == "viterbi-profiles") {
      table = viterbi_profile_table(model, ds);
    } else if (name == "entropy") {
      table = entropy_table(model, ds, opt);
    } else if (name == "oracle") {
      table = oracle_table(model, ds, opt);
    } else if (name == "summary") {
      table = summary_table(model, ds, opt);
    } else {
      table = criteria_table(model, ds, opt);
    }
    emit(opt, write_profile(table, base), out);
    return 0;
  } catch (const Error& e) {
    err << "hmmep: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "hmmep: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::Data);
  }
}

}  // namespace hmmep::cli
