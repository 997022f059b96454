#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gacn/graph.hpp"

namespace gacn {

enum class SplitKind { automatic, edges, nodes, none };

struct IngestRequest {
  std::string edges;     // edge list
  std::string labels;    // optional "node class" lines
  std::string features;  // optional "node f1 ... fF" lines
  std::string content;   // optional LINQS content file: "node f1 ... fF class"
  IngestOptions options;
  // automatic: a node split when labels are present, an edge split otherwise.
  SplitKind split = SplitKind::automatic;
  SplitRatios edge_ratios;
  std::size_t train_per_class = 20;
  std::size_t n_val = 500;
  std::size_t n_test = 1000;
  std::uint64_t split_seed = 0;
};

struct Dataset {
  Graph graph;
  std::vector<std::string> class_names;  // index = class id
  IngestStats stats;
  std::size_t edges_dropped_unlabelled = 0;
};

// Reads the raw files into one id space. With labels, edges touching an
// unlabelled node are dropped (and counted) and labelled nodes without edges
// are kept as isolated nodes. Nodes missing from a feature file get zero rows.
Dataset ingest(const IngestRequest& req);

// Canonical directory: dataset.txt (manifest), edges.txt (compact ids in
// stored order), id_map.txt, optional labels.txt, classes.txt, features.txt,
// {train,val,test}_edges.txt + edge_split.txt, {train,val,test}_nodes.txt +
// node_split.txt.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

// Edge count plus a content hash of the canonical edge list.
std::string dataset_fingerprint(const Graph& g);

}  // namespace gacn
