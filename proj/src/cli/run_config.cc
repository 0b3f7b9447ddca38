#include "medres/cli/run_config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "medres/errors.h"

namespace medres::cli {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

class IniReader {
 public:
  IniReader(const pt::ptree& tree, std::string base_dir)
      : tree_(tree), base_dir_(std::move(base_dir)) {}

  template <typename T>
  void get(const std::string& section, const std::string& key, T& out) {
    const auto raw = lookup(section, key);
    if (!raw) return;
    if (!parse(*raw, out)) {
      throw ConfigError(where(section, key) + ": cannot parse '" + *raw + "'");
    }
  }

  void path(const std::string& section, const std::string& key, std::string& out) {
    const auto raw = lookup(section, key);
    if (!raw) return;
    out = raw->empty() || fs::path(*raw).is_absolute()
              ? *raw
              : (fs::path(base_dir_) / *raw).lexically_normal().string();
  }

  void reject_unknown() const {
    for (const auto& [name, node] : tree_) {
      if (node.empty()) {
        if (!used_.count({"", name}) && !known_sections_.count(name)) {
          throw ConfigError("unknown key '" + name + "'");
        }
        continue;
      }
      if (!known_sections_.count(name)) {
        throw ConfigError("unknown section [" + name + "]");
      }
      for (const auto& [key, leaf] : node) {
        if (!used_.count({name, key})) {
          throw ConfigError("unknown key '" + key + "' in [" + name + "]");
        }
      }
    }
  }

 private:
  static std::string where(const std::string& section, const std::string& key) {
    return section.empty() ? key : "[" + section + "] " + key;
  }

  std::optional<std::string> lookup(const std::string& section, const std::string& key) {
    used_.insert({section, key});
    const pt::ptree* node = &tree_;
    if (!section.empty()) {
      known_sections_.insert(section);
      const auto it = tree_.find(section);
      if (it == tree_.not_found()) return std::nullopt;
      node = &it->second;
    }
    const auto it = node->find(key);
    if (it == node->not_found() || !it->second.empty()) return std::nullopt;
    return it->second.data();
  }

  static bool parse(const std::string& s, std::string& out) {
    out = s;
    return true;
  }
  static bool parse(const std::string& s, bool& out) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return out = true, true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return out = false, true;
    return false;
  }
  template <typename T>
    requires std::is_arithmetic_v<T>
  static bool parse(const std::string& s, T& out) {
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc() && p == s.data() + s.size();
  }
  static bool parse(const std::string& s, std::vector<std::size_t>& out) {
    out.clear();
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto comma = s.find(',', start);
      std::string item = s.substr(start, comma == std::string::npos ? comma : comma - start);
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      std::size_t v = 0;
      if (!parse(item, v)) return false;
      out.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return !out.empty();
  }

  const pt::ptree& tree_;
  std::string base_dir_;
  std::set<std::pair<std::string, std::string>> used_;
  std::set<std::string> known_sections_;
};

void validate(const RunConfig& c) {
  if (c.prepare.source != "synthetic" && c.prepare.source != "citation") {
    throw ConfigError("[prepare] source must be synthetic or citation");
  }
  if (c.metrics.ks.empty()) throw ConfigError("[metrics] k list is empty");
  for (std::size_t k : c.metrics.ks) {
    if (k == 0) throw ConfigError("[metrics] k values must be positive");
  }
  if (c.metrics.tie_policy != "ge") {
    throw ConfigError("[metrics] tie_policy: only 'ge' is supported");
  }
  if (c.model.transforms < 1 || c.model.transforms > 8) {
    throw ConfigError("[model] transforms must be in 1..8");
  }
  if (c.model.layers == 0 || c.model.conv_width == 0) {
    throw ConfigError("[model] layers and conv_width must be positive");
  }
  c.train.check();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::string& base_dir) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  IniReader r(tree, base_dir);
  RunConfig c;
  r.get("", "seed", c.seed);

  auto& p = c.paths;
  r.path("paths", "data", p.data);
  r.path("paths", "graphs", p.graphs);
  r.path("paths", "train", p.train);
  r.path("paths", "val", p.val);
  r.path("paths", "test", p.test);
  r.path("paths", "corpus", p.corpus);
  r.path("paths", "vectors", p.vectors);

  auto& pr = c.prepare;
  r.get("prepare", "source", pr.source);
  auto& s = pr.synthetic;
  r.get("prepare", "users", s.users);
  r.get("prepare", "items", s.items);
  r.get("prepare", "clusters", s.clusters);
  r.get("prepare", "graphs", s.graphs);
  r.get("prepare", "positive_same", s.positive_same);
  r.get("prepare", "positive_cross", s.positive_cross);
  r.get("prepare", "edge_same", s.edge_same);
  r.get("prepare", "edge_cross", s.edge_cross);
  r.get("prepare", "max_weight", s.max_weight);
  r.get("prepare", "pair_rate", s.pair_rate);
  r.get("prepare", "user_dim", s.user_dim);
  r.get("prepare", "item_dim", s.item_dim);
  r.get("prepare", "vector_noise", s.vector_noise);
  r.get("prepare", "train_fraction", pr.fractions.train);
  r.get("prepare", "val_fraction", pr.fractions.val);
  r.get("prepare", "test_fraction", pr.fractions.test);
  auto& ci = pr.citation;
  r.get("prepare", "vector_dim", ci.vector_dim);
  r.get("prepare", "train_first_year", ci.train_window.first);
  r.get("prepare", "train_last_year", ci.train_window.last);
  r.get("prepare", "test_first_year", ci.test_window.first);
  r.get("prepare", "test_last_year", ci.test_window.last);
  r.get("prepare", "candidate_first_year", ci.candidate_first);
  r.get("prepare", "sample_rate", ci.sample_rate);
  r.get("prepare", "min_user_rows", ci.min_user);
  r.get("prepare", "min_author_rows", ci.min_author);
  r.get("prepare", "citation_val_fraction", ci.val_fraction);

  auto& m = c.model;
  std::string mode = to_string(m.mode), encoder = to_string(m.encoder);
  r.get("model", "mode", mode);
  r.get("model", "encoder", encoder);
  m.mode = parse_mode(mode);
  m.encoder = parse_encoder(encoder);
  r.get("model", "layers", m.layers);
  r.get("model", "conv_width", m.conv_width);
  r.get("model", "merge_width", m.merge_width);
  r.get("model", "transforms", m.transforms);
  r.get("model", "per_branch_weights", m.per_branch_weights);
  r.get("model", "normalize", m.normalize);
  r.get("model", "hidden1", m.hidden1);
  r.get("model", "hidden2", m.hidden2);
  r.get("model", "scorer_bias", m.scorer_bias);

  auto& t = c.train;
  r.get("train", "k", t.k);
  r.get("train", "outer_iterations", t.outer_iterations);
  r.get("train", "initial_epochs", t.initial_epochs);
  r.get("train", "inner_epochs", t.inner_epochs);
  r.get("train", "batch_size", t.batch_size);
  r.get("train", "learning_rate", t.learning_rate);
  r.get("train", "l2", t.l2);
  r.get("train", "decay_all", t.decay_all);
  r.get("train", "patience", t.patience);

  r.get("metrics", "k", c.metrics.ks);
  r.get("metrics", "normalized", c.metrics.normalized);
  r.get("metrics", "tie_policy", c.metrics.tie_policy);

  r.reject_unknown();
  validate(c);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_run_config(in, fs::absolute(path).parent_path().string());
}

void write_run_config(const RunConfig& c, std::ostream& out) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "seed = " << c.seed << "\n\n[paths]\n";
  const auto& p = c.paths;
  out << "data = " << p.data << "\ngraphs = " << p.graphs << "\ntrain = " << p.train
      << "\nval = " << p.val << "\ntest = " << p.test << "\ncorpus = " << p.corpus
      << "\nvectors = " << p.vectors << "\n\n[prepare]\n";
  const auto& pr = c.prepare;
  const auto& s = pr.synthetic;
  out << "source = " << pr.source << "\nusers = " << s.users << "\nitems = " << s.items
      << "\nclusters = " << s.clusters << "\ngraphs = " << s.graphs
      << "\npositive_same = " << fmt(s.positive_same)
      << "\npositive_cross = " << fmt(s.positive_cross)
      << "\nedge_same = " << fmt(s.edge_same) << "\nedge_cross = " << fmt(s.edge_cross)
      << "\nmax_weight = " << s.max_weight << "\npair_rate = " << fmt(s.pair_rate)
      << "\nuser_dim = " << s.user_dim << "\nitem_dim = " << s.item_dim
      << "\nvector_noise = " << fmt(s.vector_noise)
      << "\ntrain_fraction = " << fmt(pr.fractions.train)
      << "\nval_fraction = " << fmt(pr.fractions.val)
      << "\ntest_fraction = " << fmt(pr.fractions.test);
  const auto& ci = pr.citation;
  out << "\nvector_dim = " << ci.vector_dim
      << "\ntrain_first_year = " << ci.train_window.first
      << "\ntrain_last_year = " << ci.train_window.last
      << "\ntest_first_year = " << ci.test_window.first
      << "\ntest_last_year = " << ci.test_window.last
      << "\ncandidate_first_year = " << ci.candidate_first
      << "\nsample_rate = " << fmt(ci.sample_rate) << "\nmin_user_rows = " << ci.min_user
      << "\nmin_author_rows = " << ci.min_author
      << "\ncitation_val_fraction = " << fmt(ci.val_fraction) << "\n\n[model]\n";
  const auto& m = c.model;
  out << "mode = " << to_string(m.mode) << "\nencoder = " << to_string(m.encoder)
      << "\nlayers = " << m.layers << "\nconv_width = " << m.conv_width
      << "\nmerge_width = " << m.merge_width << "\ntransforms = " << m.transforms
      << "\nper_branch_weights = " << b(m.per_branch_weights)
      << "\nnormalize = " << b(m.normalize) << "\nhidden1 = " << m.hidden1
      << "\nhidden2 = " << m.hidden2 << "\nscorer_bias = " << b(m.scorer_bias)
      << "\n\n[train]\n";
  const auto& t = c.train;
  out << "k = " << t.k << "\nouter_iterations = " << t.outer_iterations
      << "\ninitial_epochs = " << t.initial_epochs << "\ninner_epochs = " << t.inner_epochs
      << "\nbatch_size = " << t.batch_size << "\nlearning_rate = " << fmt(t.learning_rate)
      << "\nl2 = " << fmt(t.l2) << "\ndecay_all = " << b(t.decay_all)
      << "\npatience = " << t.patience << "\n\n[metrics]\nk = ";
  for (std::size_t i = 0; i < c.metrics.ks.size(); ++i) {
    out << (i ? "," : "") << c.metrics.ks[i];
  }
  out << "\nnormalized = " << b(c.metrics.normalized)
      << "\ntie_policy = " << c.metrics.tie_policy << "\n";
}

}  // namespace medres::cli
