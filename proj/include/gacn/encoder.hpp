#pragma once

#include <span>
#include <vector>

#include "gacn/diff.hpp"
#include "gacn/graph.hpp"
#include "gacn/rng.hpp"

// LightGCN propagation: layer l is adj_norm applied l times to the table, and
// the readout is the mean of layers 0..L.
namespace gacn {

using diff::Index;
using diff::Matrix;

struct EncoderOutput {
  std::vector<diff::Var> per_layer;  // L + 1 entries
  diff::Var final;
};

EncoderOutput encode(diff::Var table, const diff::SparseVar& adj_norm, int layers);

// Tape-free readout, for evaluation and export.
Matrix encode(const Matrix& table, const diff::SparseMatrix& adj_norm, int layers);

// Unit weights on both directions of every edge, then D^-1/2 A D^-1/2.
diff::SparseMatrix normalized_adjacency(std::size_t n_nodes, std::span<const Edge> edges);
inline diff::SparseMatrix normalized_adjacency(const Graph& g) {
  return normalized_adjacency(g.n_nodes(), g.edges());
}

// Random normal table with standard deviation `init_std`. With node features
// the table is a fixed random projection of the row-normalised features,
// rescaled to the same standard deviation.
Matrix init_embedding_table(const Graph& g, int dim, double init_std, Rng& rng);

}  // namespace gacn
