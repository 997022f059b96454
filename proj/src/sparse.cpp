#include "gacn/sparse.hpp"

#include <algorithm>
#include <numeric>

namespace gacn {

std::size_t CsrPattern::find(std::size_t r, NodeId c) const noexcept {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return nnz();
  return static_cast<std::size_t>(it - col.begin());
}

CsrPattern symmetric_pattern(std::size_t n, std::span<const Edge> pairs,
                             std::vector<std::size_t>* pair_of_entry) {
  CsrPattern p;
  p.n_rows = p.n_cols = n;
  p.row_ptr.assign(n + 1, 0);
  for (const Edge& e : pairs) {
    ++p.row_ptr[e.u + 1];
    ++p.row_ptr[e.v + 1];
  }
  std::partial_sum(p.row_ptr.begin(), p.row_ptr.end(), p.row_ptr.begin());

  // Fill unsorted, then sort each row together with its pair ids.
  std::vector<std::pair<NodeId, std::size_t>> slots(2 * pairs.size());
  std::vector<std::size_t> cursor(p.row_ptr.begin(), p.row_ptr.end() - 1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    slots[cursor[pairs[k].u]++] = {pairs[k].v, k};
    slots[cursor[pairs[k].v]++] = {pairs[k].u, k};
  }
  for (std::size_t r = 0; r < n; ++r) {
    std::sort(slots.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[r]),
              slots.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[r + 1]));
  }
  p.col.resize(slots.size());
  if (pair_of_entry) pair_of_entry->resize(slots.size());
  for (std::size_t k = 0; k < slots.size(); ++k) {
    p.col[k] = slots[k].first;
    if (pair_of_entry) (*pair_of_entry)[k] = slots[k].second;
  }
  return p;
}

CsrPattern diagonal_pattern(std::size_t n) {
  CsrPattern p;
  p.n_rows = p.n_cols = n;
  p.row_ptr.resize(n + 1);
  std::iota(p.row_ptr.begin(), p.row_ptr.end(), std::size_t{0});
  p.col.resize(n);
  std::iota(p.col.begin(), p.col.end(), NodeId{0});
  return p;
}

}  // namespace gacn
