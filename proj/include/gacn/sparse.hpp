#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace gacn {

using NodeId = std::uint32_t;

// An unordered node pair, stored in the orientation it was first seen.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  NodeId lo() const noexcept { return u < v ? u : v; }
  NodeId hi() const noexcept { return u < v ? v : u; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Canonical (lo, hi) key packed into one integer.
inline std::uint64_t pair_key(NodeId a, NodeId b) noexcept {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Sparsity structure of a CSR matrix. Columns are strictly increasing within a row.
struct CsrPattern {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<NodeId> col;

  std::size_t nnz() const noexcept { return col.size(); }
  std::size_t row_length(std::size_t r) const noexcept { return row_ptr[r + 1] - row_ptr[r]; }
  std::span<const NodeId> row(std::size_t r) const noexcept {
    return {col.data() + row_ptr[r], row_length(r)};
  }
  // Entry index of (r, c), or nnz() when absent.
  std::size_t find(std::size_t r, NodeId c) const noexcept;
  bool contains(std::size_t r, NodeId c) const noexcept { return find(r, c) != nnz(); }
};

// Square pattern holding both directions of every pair. When `pair_of_entry`
// is given it receives, for each CSR entry, the index of the pair it mirrors.
// Pairs must be distinct and loop-free.
CsrPattern symmetric_pattern(std::size_t n, std::span<const Edge> pairs,
                             std::vector<std::size_t>* pair_of_entry = nullptr);

// Identity-shaped pattern (one diagonal entry per row).
CsrPattern diagonal_pattern(std::size_t n);

}  // namespace gacn
