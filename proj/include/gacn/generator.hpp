#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gacn/diff.hpp"
#include "gacn/graph.hpp"
#include "gacn/rng.hpp"

namespace gacn {

using diff::Index;
using diff::Matrix;

// The pairs a generated view can weight: the training edges first, then the
// candidate non-edges. One slot per unordered pair; `pattern` holds both
// directions and `pair_of_entry` maps each CSR entry back to its slot.
struct ViewSupport {
  std::size_t n_nodes = 0;
  std::vector<Edge> pairs;
  std::size_t n_existing = 0;
  std::shared_ptr<const CsrPattern> pattern;
  std::vector<std::size_t> pair_of_entry;

  std::size_t size() const noexcept { return pairs.size(); }
  std::size_t n_candidates() const noexcept { return pairs.size() - n_existing; }
};

std::shared_ptr<const ViewSupport> make_view_support(const Graph& g, const CandidateSet& c);

struct GeneratorParams {
  std::shared_ptr<const ViewSupport> support;
  Matrix w;  // size() x 1
  double tau_g = 1e-4;
  double lambda_g = 0.5;
  double gamma = 0.75;
};

// w = (1 - gamma) lambda_g on edges and gamma lambda_g |E| / |C| on candidates.
// Throws ConfigError when gamma > 0 and the candidate set is empty.
GeneratorParams init_weights(const Graph& g, const CandidateSet& c, double lambda_g, double gamma,
                             double tau_g = 1e-4);

struct RelaxedView {
  std::shared_ptr<const ViewSupport> support;
  diff::Var p;  // size() x 1, inside [kProbFloor, kProbCeil]
  std::uint64_t noise_seed = 0;

  // Mirrored weighted adjacency over the support (not normalised).
  diff::SparseVar adjacency() const;
};

// p = sigmoid((w - x) / tau_g) with x ~ U(0,1) drawn fresh per pair. The noise
// comes from a sub-generator seeded by one draw of `rng` (kept as noise_seed).
RelaxedView sample_relaxed_view(diff::Tape& tape, diff::Var w, const GeneratorParams& params, Rng& rng);
// Same draw with w held constant.
RelaxedView sample_relaxed_view(diff::Tape& tape, const GeneratorParams& params, Rng& rng);

// |lambda_g |E| - sum p|, each unordered pair counted once.
diff::Var edge_count_loss(const RelaxedView& view, const Graph& g, double lambda_g);
// Relaxed mass on support pairs that are not edges of g.
diff::Var new_edge_loss(const RelaxedView& view, const Graph& g);
diff::Var regularization_loss(const RelaxedView& view, const Graph& g, double lambda_cnt, double lambda_new,
                              double lambda_g);

// Nodes ranked by (degree, id) ascending and cut into equal-count buckets.
std::vector<std::size_t> degree_buckets(const Graph& g, std::size_t n_buckets);

struct ViewStats {
  std::size_t edges = 0;     // pairs with p >= threshold
  std::size_t existing = 0;  // ... that are edges of g
  std::size_t new_edges = 0;
  // New edges credited to the bucket of their higher-degree endpoint.
  std::vector<std::size_t> new_by_bucket;
};

ViewStats view_statistics(const ViewSupport& support, std::span<const double> p, const Graph& g,
                          double threshold, std::size_t n_buckets = 10);
ViewStats view_statistics(const RelaxedView& view, const Graph& g, double threshold, std::size_t n_buckets = 10);

// E[p] over x ~ U(0,1): tau (softplus(w / tau) - softplus((w - 1) / tau)).
double expected_edge_probability(double w, double tau_g);

struct ViewMass {
  double existing = 0.0;
  double candidate = 0.0;
  double total() const noexcept { return existing + candidate; }
};
ViewMass expected_view_mass(const GeneratorParams& params);

void save_generator(std::ostream& os, const GeneratorParams& params);
GeneratorParams load_generator(std::istream& is, const std::string& source = "generator");

}  // namespace gacn
