#include "gacn/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "gacn/diff.hpp"
#include "gacn/error.hpp"
#include "gacn/log.hpp"
#include "gacn/text.hpp"

namespace gacn {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestHeader = "gacn-dataset 1";

struct Rows {
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> fields;  // everything after the id
};

Rows read_rows(const std::string& path, std::size_t min_fields, bool numeric_ids) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  Rows rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto tok = text::split_fields(line);
    if (tok.empty() || tok[0][0] == '#' || tok[0][0] == '%') continue;
    if (tok.size() < min_fields) throw ParseError(path, n, "expected at least " + std::to_string(min_fields) + " fields");
    if (numeric_ids && !text::is_unsigned_integer(tok[0]))
      throw ParseError(path, n, "node id '" + std::string(tok[0]) + "' is not a non-negative integer");
    rows.ids.push_back(numeric_ids ? text::strip_leading_zeros(tok[0]) : std::string(tok[0]));
    rows.fields.emplace_back(tok.begin() + 1, tok.end());
  }
  return rows;
}

// Class tokens to dense ids: numeric order for integer tokens, else lexicographic.
std::vector<std::string> class_vocabulary(const std::vector<std::string>& tokens) {
  std::vector<std::string> v(tokens);
  const bool numeric = std::all_of(v.begin(), v.end(), [](const std::string& s) { return text::is_unsigned_integer(s); });
  if (numeric)
    for (auto& s : v) s = text::strip_leading_zeros(s);
  text::sort_ids(v, numeric);
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string edges_text(const std::vector<Edge>& edges) {
  std::string out;
  out.reserve(edges.size() * 12);
  for (const Edge& e : edges) out += std::to_string(e.u) + ' ' + std::to_string(e.v) + '\n';
  return out;
}

std::string lines_text(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + '\n';
  return out;
}

template <class T>
std::string numbers_text(const std::vector<T>& v) {
  std::string out;
  for (const auto& x : v) out += std::to_string(x) + '\n';
  return out;
}

std::map<std::string, std::string> read_key_values(const std::string& path, const std::string& header) {
  std::istringstream in(text::read_file(path));
  std::string line;
  std::size_t n = 0;
  if (!header.empty()) {
    if (!std::getline(in, line) || text::trim(line) != header)
      throw ParseError(path, 1, "expected header '" + header + "'");
    n = 1;
  }
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    ++n;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const auto sp = t.find(' ');
    if (sp == std::string_view::npos) throw ParseError(path, n, "expected 'key value'");
    kv.emplace(std::string(t.substr(0, sp)), std::string(text::trim(t.substr(sp + 1))));
  }
  return kv;
}

std::string need(const std::map<std::string, std::string>& kv, const std::string& key, const std::string& path) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ParseError(path, 0, "missing key '" + key + "'");
  return it->second;
}

std::vector<Edge> read_compact_edges(const std::string& path, std::size_t n_nodes) {
  std::istringstream in(text::read_file(path));
  std::vector<Edge> edges;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto tok = text::split_fields(line);
    if (tok.empty()) continue;
    if (tok.size() != 2) throw ParseError(path, n, "expected 'u v'");
    const auto u = text::parse_int(tok[0], path, n), v = text::parse_int(tok[1], path, n);
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_nodes || static_cast<std::size_t>(v) >= n_nodes)
      throw ParseError(path, n, "node id out of range");
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  return edges;
}

std::vector<NodeId> read_node_list(const std::string& path, std::size_t n_nodes) {
  std::istringstream in(text::read_file(path));
  std::vector<NodeId> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    const auto v = text::parse_int(text::trim(line), path, n);
    if (v < 0 || static_cast<std::size_t>(v) >= n_nodes) throw ParseError(path, n, "node id out of range");
    out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

}  // namespace

Dataset ingest(const IngestRequest& req) {
  Dataset ds;
  const bool numeric = req.options.numeric_ids;
  auto raw = read_edge_tokens(req.edges, req.options, &ds.stats);

  // node id -> class token / feature row
  std::unordered_map<std::string, std::string> label_of;
  std::unordered_map<std::string, std::vector<double>> feature_of;
  std::size_t feature_width = 0;
  std::string feature_source;

  auto take_features = [&](const std::string& path, const std::string& id, const std::vector<std::string>& f,
                           std::size_t count, std::size_t line) {
    if (feature_width == 0) feature_width = count;
    if (count != feature_width)
      throw ParseError(path, line, "expected " + std::to_string(feature_width) + " feature values, got " + std::to_string(count));
    std::vector<double> row(count);
    for (std::size_t k = 0; k < count; ++k) row[k] = text::parse_double(f[k], path, line);
    feature_of[id] = std::move(row);
  };

  if (!req.content.empty()) {
    Rows rows = read_rows(req.content, 3, numeric);
    for (std::size_t i = 0; i < rows.ids.size(); ++i) {
      auto& f = rows.fields[i];
      label_of[rows.ids[i]] = f.back();
      take_features(req.content, rows.ids[i], f, f.size() - 1, i + 1);
    }
    feature_source = req.content;
  }
  if (!req.labels.empty()) {
    Rows rows = read_rows(req.labels, 2, numeric);
    for (std::size_t i = 0; i < rows.ids.size(); ++i) label_of[rows.ids[i]] = rows.fields[i][0];
  }
  if (!req.features.empty()) {
    Rows rows = read_rows(req.features, 2, numeric);
    for (std::size_t i = 0; i < rows.ids.size(); ++i)
      take_features(req.features, rows.ids[i], rows.fields[i], rows.fields[i].size(), i + 1);
    feature_source = req.features;
  }

  std::vector<std::string> extra;
  if (!label_of.empty()) {
    std::vector<std::pair<std::string, std::string>> kept;
    for (auto& p : raw) {
      if (label_of.count(p.first) && label_of.count(p.second))
        kept.push_back(std::move(p));
      else
        ++ds.edges_dropped_unlabelled;
    }
    raw = std::move(kept);
    if (raw.empty()) throw ParseError(req.edges, 0, "no edge joins two labelled nodes");
    if (ds.edges_dropped_unlabelled)
      log::warn("ingest: dropped " + std::to_string(ds.edges_dropped_unlabelled) + " edge(s) touching unlabelled nodes");
    for (const auto& [id, cls] : label_of) extra.push_back(id);
  }

  Graph g = graph_from_tokens(raw, std::move(extra), numeric, &ds.stats);
  if (ds.stats.self_loops_dropped)
    log::warn(req.edges + ": dropped " + std::to_string(ds.stats.self_loops_dropped) + " self-loop(s)");

  if (!label_of.empty()) {
    std::vector<std::string> tokens;
    for (const auto& [id, cls] : label_of) tokens.push_back(cls);
    ds.class_names = class_vocabulary(tokens);
    const bool numeric_classes =
        std::all_of(tokens.begin(), tokens.end(), [](const std::string& s) { return text::is_unsigned_integer(s); });
    std::unordered_map<std::string, int> class_id;
    for (std::size_t k = 0; k < ds.class_names.size(); ++k) class_id[ds.class_names[k]] = static_cast<int>(k);
    std::vector<int> y(g.n_nodes());
    for (NodeId v = 0; v < g.n_nodes(); ++v) {
      std::string cls = label_of.at(g.id_map()[v]);
      if (numeric_classes) cls = text::strip_leading_zeros(cls);
      y[v] = class_id.at(cls);
    }
    g = g.with_labels(std::move(y));
  }

  if (feature_width > 0) {
    DenseMatrix x = DenseMatrix::Zero(static_cast<Eigen::Index>(g.n_nodes()), static_cast<Eigen::Index>(feature_width));
    std::size_t missing = 0;
    for (NodeId v = 0; v < g.n_nodes(); ++v) {
      auto it = feature_of.find(g.id_map()[v]);
      if (it == feature_of.end()) {
        ++missing;
        continue;
      }
      for (std::size_t k = 0; k < feature_width; ++k) x(v, static_cast<Eigen::Index>(k)) = it->second[k];
    }
    if (missing) log::warn(feature_source + ": " + std::to_string(missing) + " node(s) without features get zero rows");
    g = g.with_features(std::move(x));
  }

  SplitKind kind = req.split;
  if (kind == SplitKind::automatic) kind = g.labels() ? SplitKind::nodes : SplitKind::edges;
  if (kind == SplitKind::edges) g = split_edges(g, req.edge_ratios, req.split_seed);
  if (kind == SplitKind::nodes) g = split_nodes(g, req.train_per_class, req.n_val, req.n_test, req.split_seed);
  ds.graph = std::move(g);
  return ds;
}

std::string dataset_fingerprint(const Graph& g) {
  return std::to_string(g.n_edges()) + "-" + text::fnv1a_hex(edges_text(g.edges()));
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  const Graph& g = ds.graph;
  fs::create_directories(dir);
  auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };

  std::ostringstream m;
  m << kManifestHeader << "\n"
    << "n_nodes " << g.n_nodes() << "\n"
    << "n_edges " << g.n_edges() << "\n"
    << "fingerprint " << dataset_fingerprint(g) << "\n"
    << "labels " << (g.labels() ? "yes" : "no") << "\n"
    << "features " << (g.features() ? "yes" : "no") << "\n"
    << "edge_split " << (g.edge_split() ? "yes" : "no") << "\n"
    << "node_split " << (g.node_split() ? "yes" : "no") << "\n";

  text::write_file_atomic(path("edges.txt"), edges_text(g.edges()));
  std::vector<std::string> ids(g.n_nodes());
  for (NodeId v = 0; v < g.n_nodes(); ++v) ids[v] = g.original_id(v);
  text::write_file_atomic(path("id_map.txt"), lines_text(ids));
  if (g.labels()) {
    text::write_file_atomic(path("labels.txt"), numbers_text(*g.labels()));
    std::vector<std::string> names = ds.class_names;
    for (int k = static_cast<int>(names.size()); k < g.n_classes(); ++k) names.push_back(std::to_string(k));
    text::write_file_atomic(path("classes.txt"), lines_text(names));
  }
  if (g.features()) {
    std::ostringstream f;
    diff::write_matrix(f, *g.features());
    text::write_file_atomic(path("features.txt"), f.str());
  }
  if (const auto& s = g.edge_split()) {
    text::write_file_atomic(path("train_edges.txt"), edges_text(g.split_edges_of(s->train)));
    text::write_file_atomic(path("val_edges.txt"), edges_text(g.split_edges_of(s->val)));
    text::write_file_atomic(path("test_edges.txt"), edges_text(g.split_edges_of(s->test)));
    text::write_file_atomic(path("edge_split.txt"), "seed " + std::to_string(s->seed) + "\n");
  }
  if (const auto& s = g.node_split()) {
    text::write_file_atomic(path("train_nodes.txt"), numbers_text(s->train));
    text::write_file_atomic(path("val_nodes.txt"), numbers_text(s->val));
    text::write_file_atomic(path("test_nodes.txt"), numbers_text(s->test));
    text::write_file_atomic(path("node_split.txt"),
                            "seed " + std::to_string(s->seed) + "\nprovenance " + s->provenance + "\n");
  }
  // Manifest last: its presence marks a complete directory.
  text::write_file_atomic(path("dataset.txt"), m.str());
}

Dataset load_dataset(const std::string& dir) {
  auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  const std::string manifest = path("dataset.txt");
  if (!fs::exists(manifest)) throw ParseError(manifest, 0, "not a dataset directory (no dataset.txt)");
  const auto kv = read_key_values(manifest, kManifestHeader);
  const auto n = static_cast<std::size_t>(text::parse_int(need(kv, "n_nodes", manifest), manifest, 0));

  Dataset ds;
  Graph g(n, read_compact_edges(path("edges.txt"), n));
  {
    std::istringstream in(text::read_file(path("id_map.txt")));
    std::vector<std::string> ids;
    for (std::string line; std::getline(in, line);) ids.emplace_back(text::trim(line));
    if (ids.size() != n) throw ParseError(path("id_map.txt"), 0, "expected " + std::to_string(n) + " ids");
    g = g.with_id_map(std::move(ids));
  }
  if (dataset_fingerprint(g) != need(kv, "fingerprint", manifest))
    throw ParseError(manifest, 0, "edges.txt does not match the recorded fingerprint");

  if (need(kv, "labels", manifest) == "yes") {
    std::istringstream in(text::read_file(path("labels.txt")));
    std::vector<int> y;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (!text::trim(line).empty()) y.push_back(static_cast<int>(text::parse_int(text::trim(line), path("labels.txt"), line_no)));
    }
    if (y.size() != n) throw ParseError(path("labels.txt"), 0, "expected one label per node");
    g = g.with_labels(std::move(y));
    std::istringstream names(text::read_file(path("classes.txt")));
    for (std::string line; std::getline(names, line);) ds.class_names.emplace_back(text::trim(line));
  }
  if (need(kv, "features", manifest) == "yes") {
    std::istringstream in(text::read_file(path("features.txt")));
    g = g.with_features(diff::read_matrix(in, path("features.txt")));
  }
  if (need(kv, "edge_split", manifest) == "yes") {
    std::unordered_map<std::uint64_t, std::size_t> index;
    for (std::size_t i = 0; i < g.n_edges(); ++i) index.emplace(pair_key(g.edges()[i].u, g.edges()[i].v), i);
    auto part = [&](const char* name) {
      std::vector<std::size_t> idx;
      for (const Edge& e : read_compact_edges(path(name), n)) {
        auto it = index.find(pair_key(e.u, e.v));
        if (it == index.end()) throw ParseError(path(name), 0, "split edge not in edges.txt");
        idx.push_back(it->second);
      }
      return idx;
    };
    EdgeSplit s;
    s.train = part("train_edges.txt");
    s.val = part("val_edges.txt");
    s.test = part("test_edges.txt");
    const auto skv = read_key_values(path("edge_split.txt"), "");
    s.seed = static_cast<std::uint64_t>(text::parse_int(need(skv, "seed", path("edge_split.txt")), path("edge_split.txt"), 1));
    g = g.with_edge_split(std::move(s));
  }
  if (need(kv, "node_split", manifest) == "yes") {
    NodeSplit s;
    s.train = read_node_list(path("train_nodes.txt"), n);
    s.val = read_node_list(path("val_nodes.txt"), n);
    s.test = read_node_list(path("test_nodes.txt"), n);
    const auto skv = read_key_values(path("node_split.txt"), "");
    s.seed = static_cast<std::uint64_t>(text::parse_int(need(skv, "seed", path("node_split.txt")), path("node_split.txt"), 1));
    if (auto it = skv.find("provenance"); it != skv.end()) s.provenance = it->second;
    g = g.with_node_split(std::move(s));
  }
  ds.graph = std::move(g);
  return ds;
}

}  // namespace gacn
