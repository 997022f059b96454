#include "gacn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "gacn/error.hpp"
#include "gacn/log.hpp"
#include "gacn/rng.hpp"
#include "gacn/text.hpp"

namespace gacn {

namespace {

void check_disjoint_indices(const std::vector<std::vector<std::size_t>>& parts, std::size_t bound,
                            const char* what) {
  std::vector<char> seen(bound, 0);
  for (const auto& part : parts) {
    for (std::size_t i : part) {
      require(i < bound, std::string(what) + " split references index out of range");
      require(!seen[i], std::string(what) + " splits overlap");
      seen[i] = 1;
    }
  }
}

}  // namespace

Graph::Graph(std::size_t n_nodes, std::vector<Edge> edges) : n_nodes_(n_nodes), edges_(std::move(edges)) {
  require(n_nodes_ <= std::numeric_limits<NodeId>::max(), "graph: too many nodes");
  std::unordered_set<std::uint64_t> keys;
  keys.reserve(edges_.size() * 2);
  for (const Edge& e : edges_) {
    require(e.u < n_nodes_ && e.v < n_nodes_, "graph: edge endpoint out of range");
    require(e.u != e.v, "graph: self-loop");
    require(keys.insert(pair_key(e.u, e.v)).second, "graph: duplicate edge");
  }
  adjacency_ = symmetric_pattern(n_nodes_, edges_);
}

int Graph::n_classes() const {
  if (!labels_ || labels_->empty()) return 0;
  return *std::max_element(labels_->begin(), labels_->end()) + 1;
}

std::string Graph::original_id(NodeId v) const {
  return v < id_map_.size() ? id_map_[v] : std::to_string(v);
}

std::vector<Edge> Graph::train_edges() const {
  if (!edge_split_) return edges_;
  return split_edges_of(edge_split_->train);
}

std::vector<Edge> Graph::split_edges_of(const std::vector<std::size_t>& idx) const {
  std::vector<Edge> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(edges_[i]);
  return out;
}

Graph Graph::train_graph() const {
  Graph g(n_nodes_, train_edges());
  g.labels_ = labels_;
  g.features_ = features_;
  g.id_map_ = id_map_;
  g.node_split_ = node_split_;
  return g;
}

Graph Graph::with_labels(std::vector<int> labels) const {
  require(labels.size() == n_nodes_, "labels: one label per node required");
  for (int y : labels) require(y >= 0, "labels: class ids must be non-negative");
  Graph g = *this;
  g.labels_ = std::move(labels);
  return g;
}

Graph Graph::with_features(DenseMatrix features) const {
  require(static_cast<std::size_t>(features.rows()) == n_nodes_, "features: one row per node required");
  require(features.allFinite(), "features: non-finite entry");
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph Graph::with_id_map(std::vector<std::string> ids) const {
  require(ids.size() == n_nodes_, "id map: one id per node required");
  Graph g = *this;
  g.id_map_ = std::move(ids);
  return g;
}

Graph Graph::with_edge_split(EdgeSplit split) const {
  check_disjoint_indices({split.train, split.val, split.test}, edges_.size(), "edge");
  Graph g = *this;
  g.edge_split_ = std::move(split);
  return g;
}

Graph Graph::with_node_split(NodeSplit split) const {
  auto widen = [](const std::vector<NodeId>& v) { return std::vector<std::size_t>(v.begin(), v.end()); };
  check_disjoint_indices({widen(split.train), widen(split.val), widen(split.test)}, n_nodes_, "node");
  Graph g = *this;
  g.node_split_ = std::move(split);
  return g;
}

Graph graph_from_pairs(std::size_t n_nodes, const std::vector<Edge>& pairs, IngestStats* stats) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  std::unordered_set<std::uint64_t> keys;
  keys.reserve(pairs.size() * 2);
  IngestStats local;
  for (const Edge& e : pairs) {
    if (e.u == e.v) {
      ++local.self_loops_dropped;
      continue;
    }
    if (!keys.insert(pair_key(e.u, e.v)).second) {
      ++local.duplicates_merged;
      continue;
    }
    edges.push_back(e);
  }
  if (stats) {
    stats->self_loops_dropped += local.self_loops_dropped;
    stats->duplicates_merged += local.duplicates_merged;
  }
  return Graph(n_nodes, std::move(edges));
}

std::vector<std::pair<std::string, std::string>> read_edge_tokens(const std::string& path,
                                                                 const IngestOptions& options, IngestStats* stats) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");

  IngestStats local;
  std::vector<std::pair<std::string, std::string>> raw;
  std::string line;
  while (std::getline(in, line)) {
    ++local.lines;
    const auto tokens = text::split_fields(line);
    if (tokens.empty()) continue;
    if (tokens[0][0] == '#' || tokens[0][0] == '%') {
      ++local.comments_skipped;
      continue;
    }
    if (tokens.size() < 2) throw ParseError(path, local.lines, "expected two node ids");
    if (options.numeric_ids) {
      for (int k = 0; k < 2; ++k) {
        if (!text::is_unsigned_integer(tokens[k])) {
          throw ParseError(path, local.lines, "node id '" + std::string(tokens[k]) + "' is not a non-negative integer");
        }
      }
      raw.emplace_back(text::strip_leading_zeros(tokens[0]), text::strip_leading_zeros(tokens[1]));
    } else {
      raw.emplace_back(std::string(tokens[0]), std::string(tokens[1]));
    }
  }
  if (raw.empty()) throw ParseError(path, 0, "empty graph: no edge lines");
  if (stats) *stats = local;
  return raw;
}

Graph graph_from_tokens(const std::vector<std::pair<std::string, std::string>>& raw, std::vector<std::string> ids,
                        bool numeric_ids, IngestStats* stats) {
  for (const auto& [a, b] : raw) {
    ids.push_back(a);
    ids.push_back(b);
  }
  text::sort_ids(ids, numeric_ids);
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::unordered_map<std::string, NodeId> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], static_cast<NodeId>(i));

  std::vector<Edge> pairs;
  pairs.reserve(raw.size());
  for (const auto& [a, b] : raw) pairs.push_back({index.at(a), index.at(b)});
  return graph_from_pairs(ids.size(), pairs, stats).with_id_map(std::move(ids));
}

Graph load_edge_list(const std::string& path, const IngestOptions& options, IngestStats* stats) {
  IngestStats local;
  const auto raw = read_edge_tokens(path, options, &local);
  Graph g = graph_from_tokens(raw, {}, options.numeric_ids, &local);
  if (local.self_loops_dropped) log::warn(path + ": dropped " + std::to_string(local.self_loops_dropped) + " self-loop(s)");
  if (stats) *stats = local;
  return g;
}

CandidateSet build_candidate_set(const Graph& g, std::size_t top_k, std::size_t max_candidates) {
  require(top_k >= 1, "build_candidate_set: top_k must be >= 1");
  const std::size_t n = g.n_nodes();
  if (max_candidates == 0) max_candidates = kCandidateCapPerEdge * g.n_edges();

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });

  CandidateSet c;
  const std::size_t hubs = std::min(top_k, n);
  // Each pair is visited once, from its better-ranked endpoint.
  for (std::size_t a = 0; a < hubs && c.pairs.size() < max_candidates; ++a) {
    const NodeId t = order[a];
    for (std::size_t b = a + 1; b < n && c.pairs.size() < max_candidates; ++b) {
      const NodeId x = order[b];
      if (!g.has_edge(t, x)) c.pairs.push_back({std::min(t, x), std::max(t, x)});
    }
  }
  std::sort(c.pairs.begin(), c.pairs.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  return c;
}

Graph split_edges(const Graph& g, SplitRatios ratios, std::uint64_t seed) {
  require(ratios.train > 0 && ratios.val >= 0 && ratios.test >= 0, "split_edges: ratios must be non-negative, train positive");
  require(std::abs(ratios.train + ratios.val + ratios.test - 1.0) < 1e-9, "split_edges: ratios must sum to 1");

  const std::size_t m = g.n_edges();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(RngStreams::derive_seed(seed, "split"));
  std::shuffle(idx.begin(), idx.end(), rng);

  const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * static_cast<double>(m)));
  const auto n_test = static_cast<std::size_t>(std::floor(ratios.test * static_cast<double>(m)));
  const std::size_t n_train = m - n_val - n_test;

  EdgeSplit s;
  s.seed = seed;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
               idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());

  std::vector<char> touched(g.n_nodes(), 0);
  for (std::size_t i : s.train) touched[g.edges()[i].u] = touched[g.edges()[i].v] = 1;
  std::size_t stranded = 0;
  for (NodeId v = 0; v < g.n_nodes(); ++v) stranded += (g.degree(v) > 0 && !touched[v]);
  if (stranded) log::info("split_edges: " + std::to_string(stranded) + " node(s) have no train edge");

  return g.with_edge_split(std::move(s));
}

Graph split_nodes(const Graph& g, std::size_t train_per_class, std::size_t n_val, std::size_t n_test,
                  std::uint64_t seed) {
  if (!g.labels()) throw ConfigError("split_nodes: graph has no labels");
  const auto& y = *g.labels();
  std::vector<NodeId> perm(g.n_nodes());
  std::iota(perm.begin(), perm.end(), NodeId{0});
  Rng rng(RngStreams::derive_seed(seed, "node-split"));
  std::shuffle(perm.begin(), perm.end(), rng);

  NodeSplit s;
  s.seed = seed;
  s.provenance = "random:" + std::to_string(train_per_class) + "-per-class/" + std::to_string(n_val) + "/" +
                 std::to_string(n_test) + "@seed=" + std::to_string(seed);
  std::vector<std::size_t> taken(static_cast<std::size_t>(g.n_classes()), 0);
  std::vector<NodeId> rest;
  for (NodeId v : perm) {
    auto& t = taken[static_cast<std::size_t>(y[v])];
    if (t < train_per_class) {
      s.train.push_back(v);
      ++t;
    } else {
      rest.push_back(v);
    }
  }
  require(n_val + n_test <= rest.size(), "split_nodes: not enough nodes for val/test");
  s.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_val),
                rest.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return g.with_node_split(std::move(s));
}

}  // namespace gacn
