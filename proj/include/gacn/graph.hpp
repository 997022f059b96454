#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gacn/sparse.hpp"

namespace gacn {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Edge-index partition used by link prediction.
struct EdgeSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Node partition used by node classification.
struct NodeSplit {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
  std::uint64_t seed = 0;
  std::string provenance;
};

// Immutable undirected simple graph with optional labels, features and splits.
//
// Every edge is stored once, in the orientation in which it was first read.
// The adjacency holds both directions. Constructors validate the invariants
// (no loops, no duplicates, ids in range, disjoint in-range splits) and throw
// ContractViolation otherwise.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t n_nodes, std::vector<Edge> edges);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const CsrPattern& adjacency() const noexcept { return adjacency_; }
  bool has_edge(NodeId a, NodeId b) const noexcept { return adjacency_.contains(a, b); }
  std::size_t degree(NodeId v) const noexcept { return adjacency_.row_length(v); }

  const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }
  int n_classes() const;
  const std::optional<DenseMatrix>& features() const noexcept { return features_; }
  // Original id of every compact node id; empty when the graph was built in memory.
  const std::vector<std::string>& id_map() const noexcept { return id_map_; }
  std::string original_id(NodeId v) const;

  const std::optional<EdgeSplit>& edge_split() const noexcept { return edge_split_; }
  const std::optional<NodeSplit>& node_split() const noexcept { return node_split_; }

  // Edges visible to training: the train part of the edge split, or all edges.
  std::vector<Edge> train_edges() const;
  std::vector<Edge> split_edges_of(const std::vector<std::size_t>& idx) const;
  // Graph restricted to training edges, carrying labels, features, id map and node split.
  Graph train_graph() const;

  Graph with_labels(std::vector<int> labels) const;
  Graph with_features(DenseMatrix features) const;
  Graph with_id_map(std::vector<std::string> ids) const;
  Graph with_edge_split(EdgeSplit split) const;
  Graph with_node_split(NodeSplit split) const;

 private:
  std::size_t n_nodes_ = 0;
  std::vector<Edge> edges_;
  CsrPattern adjacency_;
  std::optional<std::vector<int>> labels_;
  std::optional<DenseMatrix> features_;
  std::vector<std::string> id_map_;
  std::optional<EdgeSplit> edge_split_;
  std::optional<NodeSplit> node_split_;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_merged = 0;
  std::size_t comments_skipped = 0;
};

struct IngestOptions {
  // Reject non-integer node ids. When false any token is a valid id.
  bool numeric_ids = true;
};

// Reads "u v [weight ...]" lines (whitespace or comma separated); lines starting
// with '#' or '%' are comments. Ids are compacted to 0..n-1 (ascending numeric
// order for numeric ids, lexicographic otherwise) and the mapping is kept.
// Throws ParseError on malformed lines and on files without any edge line.
Graph load_edge_list(const std::string& path, const IngestOptions& options = {},
                     IngestStats* stats = nullptr);

// The raw id tokens of every edge line, validated as load_edge_list does.
std::vector<std::pair<std::string, std::string>> read_edge_tokens(const std::string& path,
                                                                 const IngestOptions& options = {},
                                                                 IngestStats* stats = nullptr);

// Compacts the ids of `raw` together with `extra_ids` (nodes that may have no
// edge) and builds the graph with its id map.
Graph graph_from_tokens(const std::vector<std::pair<std::string, std::string>>& raw,
                        std::vector<std::string> extra_ids, bool numeric_ids, IngestStats* stats = nullptr);

// Dedup + self-loop removal over raw pairs of compact ids.
Graph graph_from_pairs(std::size_t n_nodes, const std::vector<Edge>& pairs,
                       IngestStats* stats = nullptr);

struct CandidateSet {
  std::vector<Edge> pairs;  // (lo, hi), lexicographically sorted
  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

// Default cap on |C| relative to |E|.
inline constexpr std::size_t kCandidateCapPerEdge = 50;

// Non-edges incident to at least one of the `top_k` highest-degree nodes (ties
// broken by lower id). At most `max_candidates` pairs are kept (0 selects
// kCandidateCapPerEdge * |E|): pairs are taken in order of the degree rank of
// their better-ranked endpoint, then of the other endpoint.
CandidateSet build_candidate_set(const Graph& g, std::size_t top_k, std::size_t max_candidates = 0);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Seeded shuffle of edge indices. Val and test get floor(ratio * |E|) edges,
// train gets the rest.
Graph split_edges(const Graph& g, SplitRatios ratios, std::uint64_t seed);

// Per-class train nodes plus fixed-size val/test sets drawn from the remaining
// nodes (the usual public-split convention: 20 per class, 500, 1000).
Graph split_nodes(const Graph& g, std::size_t train_per_class, std::size_t n_val, std::size_t n_test,
                  std::uint64_t seed);

}  // namespace gacn
