#include "gacn/ssl.hpp"

#include "gacn/error.hpp"
#include "gacn/log.hpp"

namespace gacn {

diff::Var contrastive_loss(diff::Var dp, diff::Var dg, double tau_f) {
  require(tau_f > 0, "contrastive_loss: tau_f must be positive");
  require(dp.rows() == dg.rows() && dp.cols() == dg.cols(), "contrastive_loss: view shapes differ");
  // Row v of the logits holds dp_u . dg_v over u.
  diff::Var logits = diff::scale(diff::matmul(dg, diff::transpose(dp)), 1.0 / tau_f);
  diff::Var positive = diff::scale(diff::dot_rows(dp, dg), 1.0 / tau_f);
  return diff::sum(diff::sub(diff::logsumexp_rows(logits), positive));
}

diff::Var contrastive_loss(diff::Var dp, diff::Var dg, double tau_f, std::span<const std::size_t> pool) {
  return contrastive_loss(diff::gather_rows(dp, pool), diff::gather_rows(dg, pool), tau_f);
}

TripleBatch sample_triples(const Graph& g, std::size_t count, Rng& rng) {
  require(g.n_edges() >= 1, "sample_triples: graph has no edges");
  TripleBatch batch;
  batch.triples.reserve(count);
  const std::size_t n = g.n_nodes();
  for (std::size_t s = 0; s < count; ++s) {
    const Edge& e = g.edges()[uniform_index(rng, g.n_edges())];
    const bool flip = uniform_index(rng, 2) == 1;
    const NodeId i = flip ? e.v : e.u;
    const NodeId j = flip ? e.u : e.v;
    bool found = false;
    for (int attempt = 0; attempt < kMaxNegativeRejections; ++attempt) {
      const auto k = static_cast<NodeId>(uniform_index(rng, n));
      if (k != i && !g.has_edge(i, k)) {
        batch.triples.push_back({i, j, k});
        found = true;
        break;
      }
    }
    if (!found) ++batch.skipped;
  }
  if (batch.skipped) log::info("sample_triples: skipped " + std::to_string(batch.skipped) + " anchor(s) without negatives");
  return batch;
}

diff::Var bpr_loss(diff::Var final, const TripleBatch& batch) {
  require(!batch.triples.empty(), "bpr_loss: empty batch");
  std::vector<std::size_t> is, js, ks;
  for (const Triple& t : batch.triples) {
    is.push_back(t.i);
    js.push_back(t.j);
    ks.push_back(t.k);
  }
  diff::Var di = diff::gather_rows(final, is);
  diff::Var gap = diff::sub(diff::dot_rows(di, diff::gather_rows(final, js)),
                            diff::dot_rows(di, diff::gather_rows(final, ks)));
  return diff::scale(diff::mean(diff::log_sigmoid(gap)), -1.0);
}

diff::Var ssl_loss(diff::Var gcl, diff::Var bpr, double lambda_gcl, double lambda_bpr) {
  return diff::add(diff::scale(gcl, lambda_gcl), diff::scale(bpr, lambda_bpr));
}

}  // namespace gacn
