#pragma once

#include <span>
#include <vector>

#include "gacn/diff.hpp"
#include "gacn/graph.hpp"
#include "gacn/rng.hpp"

namespace gacn {

using diff::Index;
using diff::Matrix;

// sum_v [ logsumexp_u(dp_u . dg_v / tau) - dp_v . dg_v / tau ]. Unnormalised
// dot products; every node is a negative for every other node.
diff::Var contrastive_loss(diff::Var dp, diff::Var dg, double tau_f);
// The same loss restricted to the rows in `pool`.
diff::Var contrastive_loss(diff::Var dp, diff::Var dg, double tau_f, std::span<const std::size_t> pool);

struct Triple {
  NodeId i = 0;
  NodeId j = 0;  // neighbour of i
  NodeId k = 0;  // non-neighbour of i
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleBatch {
  std::vector<Triple> triples;
  std::size_t skipped = 0;  // edges whose anchor had no reachable negative
};

inline constexpr int kMaxNegativeRejections = 100;

// Draws `count` edges of g uniformly (with replacement, random orientation) and
// rejection-samples a negative k for each anchor.
TripleBatch sample_triples(const Graph& g, std::size_t count, Rng& rng);

// -mean log sigmoid(d_i . d_j - d_i . d_k).
diff::Var bpr_loss(diff::Var final, const TripleBatch& batch);

diff::Var ssl_loss(diff::Var gcl, diff::Var bpr, double lambda_gcl, double lambda_bpr);

}  // namespace gacn
