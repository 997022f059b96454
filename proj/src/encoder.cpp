#include "gacn/encoder.hpp"

#include <cmath>

#include "gacn/error.hpp"

namespace gacn {

EncoderOutput encode(diff::Var table, const diff::SparseVar& adj_norm, int layers) {
  require(layers >= 0, "encode: layer count must be >= 0");
  require(adj_norm.pattern->n_rows == static_cast<std::size_t>(table.rows()),
          "encode: adjacency and table disagree on node count");
  EncoderOutput out;
  out.per_layer.push_back(table);
  diff::Var acc = table;
  for (int l = 1; l <= layers; ++l) {
    out.per_layer.push_back(diff::spmm(adj_norm, out.per_layer.back()));
    acc = diff::add(acc, out.per_layer.back());
  }
  out.final = layers == 0 ? table : diff::scale(acc, 1.0 / (layers + 1));
  return out;
}

Matrix encode(const Matrix& table, const diff::SparseMatrix& adj_norm, int layers) {
  require(layers >= 0, "encode: layer count must be >= 0");
  require(adj_norm.n_rows() == static_cast<std::size_t>(table.rows()),
          "encode: adjacency and table disagree on node count");
  Matrix layer = table;
  Matrix acc = table;
  for (int l = 1; l <= layers; ++l) {
    layer = diff::spmm(adj_norm, layer);
    acc += layer;
  }
  return acc / static_cast<double>(layers + 1);
}

diff::SparseMatrix normalized_adjacency(std::size_t n_nodes, std::span<const Edge> edges) {
  auto pattern = std::make_shared<const CsrPattern>(symmetric_pattern(n_nodes, edges));
  return diff::normalize_adjacency(diff::SparseMatrix{pattern, std::vector<double>(pattern->nnz(), 1.0)});
}

Matrix init_embedding_table(const Graph& g, int dim, double init_std, Rng& rng) {
  require(dim >= 1, "init_embedding_table: dim must be >= 1");
  const auto n = static_cast<Index>(g.n_nodes());
  std::normal_distribution<double> normal(0.0, 1.0);
  if (!g.features()) {
    Matrix t(n, dim);
    for (Index i = 0; i < t.size(); ++i) t.data()[i] = init_std * normal(rng);
    return t;
  }
  Matrix x = *g.features();
  for (Index r = 0; r < x.rows(); ++r) {
    const double s = x.row(r).cwiseAbs().sum();
    if (s > 0) x.row(r) /= s;
  }
  Matrix proj(x.cols(), dim);
  for (Index i = 0; i < proj.size(); ++i) proj.data()[i] = normal(rng);
  Matrix t = x * proj;
  const double mean = t.mean();
  const double sd = std::sqrt((t.array() - mean).square().mean());
  if (sd > 0) t = (t.array() - mean) * (init_std / sd);
  return t;
}

}  // namespace gacn
