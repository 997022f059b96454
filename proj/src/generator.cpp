#include "gacn/generator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "gacn/error.hpp"

namespace gacn {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<double> non_edge_mask(const ViewSupport& s, const Graph& g) {
  std::vector<double> mask(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) mask[k] = g.has_edge(s.pairs[k].u, s.pairs[k].v) ? 0.0 : 1.0;
  return mask;
}

Matrix column(const std::vector<double>& v) {
  return Eigen::Map<const Matrix>(v.data(), static_cast<Index>(v.size()), 1);
}

std::shared_ptr<const ViewSupport> finish_support(ViewSupport s) {
  s.pattern = std::make_shared<const CsrPattern>(symmetric_pattern(s.n_nodes, s.pairs, &s.pair_of_entry));
  return std::make_shared<const ViewSupport>(std::move(s));
}

}  // namespace

std::shared_ptr<const ViewSupport> make_view_support(const Graph& g, const CandidateSet& c) {
  ViewSupport s;
  s.n_nodes = g.n_nodes();
  s.pairs.reserve(g.n_edges() + c.size());
  for (const Edge& e : g.edges()) s.pairs.push_back({e.lo(), e.hi()});
  s.n_existing = s.pairs.size();
  for (const Edge& e : c.pairs) {
    require(!g.has_edge(e.u, e.v), "view support: candidate pair is an edge");
    s.pairs.push_back(e);
  }
  return finish_support(std::move(s));
}

GeneratorParams init_weights(const Graph& g, const CandidateSet& c, double lambda_g, double gamma, double tau_g) {
  require(tau_g > 0 && tau_g <= 1, "init_weights: tau_g must lie in (0, 1]");
  require(gamma >= 0 && gamma <= 1, "init_weights: gamma must lie in [0, 1]");
  require(lambda_g >= 0, "init_weights: lambda_g must be >= 0");
  if (gamma > 0 && c.empty()) throw ConfigError("init_weights: gamma > 0 needs a non-empty candidate set");

  GeneratorParams p;
  p.support = make_view_support(g, c);
  p.tau_g = tau_g;
  p.lambda_g = lambda_g;
  p.gamma = gamma;
  p.w.resize(static_cast<Index>(p.support->size()), 1);
  const double on_edge = (1.0 - gamma) * lambda_g;
  const double on_candidate =
      c.empty() ? 0.0 : gamma * lambda_g * static_cast<double>(g.n_edges()) / static_cast<double>(c.size());
  for (std::size_t k = 0; k < p.support->size(); ++k) {
    p.w(static_cast<Index>(k), 0) = k < p.support->n_existing ? on_edge : on_candidate;
  }
  return p;
}

diff::SparseVar RelaxedView::adjacency() const {
  return {support->pattern, diff::gather(p, support->pair_of_entry)};
}

RelaxedView sample_relaxed_view(diff::Tape& tape, diff::Var w, const GeneratorParams& params, Rng& rng) {
  const auto& s = params.support;
  require(w.rows() == static_cast<Index>(s->size()) && w.cols() == 1, "sample_relaxed_view: w shape mismatch");
  RelaxedView view;
  view.support = s;
  view.noise_seed = rng();
  Rng noise(view.noise_seed);
  Matrix x(w.rows(), 1);
  for (Index k = 0; k < x.rows(); ++k) x(k, 0) = uniform01(noise);
  diff::Var z = diff::scale(diff::sub(w, tape.constant(std::move(x))), 1.0 / params.tau_g);
  view.p = diff::clamp(diff::sigmoid(z), diff::kProbFloor, diff::kProbCeil);
  return view;
}

RelaxedView sample_relaxed_view(diff::Tape& tape, const GeneratorParams& params, Rng& rng) {
  return sample_relaxed_view(tape, tape.constant(params.w), params, rng);
}

diff::Var edge_count_loss(const RelaxedView& view, const Graph& g, double lambda_g) {
  diff::Tape& t = *view.p.tape();
  return diff::abs(diff::sub(t.scalar(lambda_g * static_cast<double>(g.n_edges())), diff::sum(view.p)));
}

diff::Var new_edge_loss(const RelaxedView& view, const Graph& g) {
  diff::Tape& t = *view.p.tape();
  return diff::sum(diff::mul(view.p, t.constant(column(non_edge_mask(*view.support, g)))));
}

diff::Var regularization_loss(const RelaxedView& view, const Graph& g, double lambda_cnt, double lambda_new,
                              double lambda_g) {
  return diff::add(diff::scale(edge_count_loss(view, g, lambda_g), lambda_cnt),
                   diff::scale(new_edge_loss(view, g), lambda_new));
}

std::vector<std::size_t> degree_buckets(const Graph& g, std::size_t n_buckets) {
  require(n_buckets >= 1, "degree_buckets: need at least one bucket");
  const std::size_t n = g.n_nodes();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return g.degree(a) < g.degree(b); });
  std::vector<std::size_t> bucket(n);
  for (std::size_t r = 0; r < n; ++r) bucket[order[r]] = r * n_buckets / n;
  return bucket;
}

ViewStats view_statistics(const ViewSupport& support, std::span<const double> p, const Graph& g,
                          double threshold, std::size_t n_buckets) {
  require(threshold > 0 && threshold < 1, "view_statistics: threshold must lie in (0, 1)");
  require(p.size() == support.size(), "view_statistics: one probability per support pair required");
  ViewStats st;
  st.new_by_bucket.assign(n_buckets, 0);
  const auto bucket = degree_buckets(g, n_buckets);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] < threshold) continue;
    ++st.edges;
    const Edge& e = support.pairs[k];
    if (g.has_edge(e.u, e.v)) {
      ++st.existing;
      continue;
    }
    ++st.new_edges;
    const NodeId hub = g.degree(e.u) != g.degree(e.v) ? (g.degree(e.u) > g.degree(e.v) ? e.u : e.v) : e.lo();
    ++st.new_by_bucket[bucket[hub]];
  }
  return st;
}

ViewStats view_statistics(const RelaxedView& view, const Graph& g, double threshold, std::size_t n_buckets) {
  const Matrix& p = view.p.value();
  return view_statistics(*view.support, std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), g,
                         threshold, n_buckets);
}

double expected_edge_probability(double w, double tau_g) {
  return tau_g * (softplus(w / tau_g) - softplus((w - 1.0) / tau_g));
}

ViewMass expected_view_mass(const GeneratorParams& params) {
  ViewMass m;
  for (std::size_t k = 0; k < params.support->size(); ++k) {
    const double e = expected_edge_probability(params.w(static_cast<Index>(k), 0), params.tau_g);
    (k < params.support->n_existing ? m.existing : m.candidate) += e;
  }
  return m;
}

void save_generator(std::ostream& os, const GeneratorParams& params) {
  const auto& s = *params.support;
  os.precision(17);
  os << "gacn-generator 1\n"
     << "n_nodes " << s.n_nodes << "\n"
     << "tau_g " << params.tau_g << "\nlambda_g " << params.lambda_g << "\ngamma " << params.gamma << "\n"
     << "pairs " << s.size() << " existing " << s.n_existing << "\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    os << s.pairs[k].u << ' ' << s.pairs[k].v << ' ' << params.w(static_cast<Index>(k), 0) << '\n';
  }
}

GeneratorParams load_generator(std::istream& is, const std::string& source) {
  auto expect = [&](const char* key) {
    std::string k;
    if (!(is >> k) || k != key) throw ParseError(source, 0, std::string("expected '") + key + "'");
  };
  expect("gacn-generator");
  int version = 0;
  is >> version;
  if (version != 1) throw ParseError(source, 0, "unsupported generator version");
  ViewSupport s;
  GeneratorParams p;
  std::size_t m = 0;
  expect("n_nodes");
  is >> s.n_nodes;
  expect("tau_g");
  is >> p.tau_g;
  expect("lambda_g");
  is >> p.lambda_g;
  expect("gamma");
  is >> p.gamma;
  expect("pairs");
  is >> m;
  expect("existing");
  is >> s.n_existing;
  if (!is || s.n_existing > m) throw ParseError(source, 0, "bad generator header");
  s.pairs.resize(m);
  p.w.resize(static_cast<Index>(m), 1);
  for (std::size_t k = 0; k < m; ++k) {
    if (!(is >> s.pairs[k].u >> s.pairs[k].v >> p.w(static_cast<Index>(k), 0))) {
      throw ParseError(source, 0, "truncated generator weights");
    }
    require(s.pairs[k].u < s.n_nodes && s.pairs[k].v < s.n_nodes, "generator: pair out of range");
  }
  p.support = finish_support(std::move(s));
  return p;
}

}  // namespace gacn
