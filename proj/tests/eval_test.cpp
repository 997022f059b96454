#include "gacn/eval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "gacn/error.hpp"
#include "test_util.hpp"

namespace gacn {
namespace {

using testing::TempDir;

// Gaussian blobs, one per class, centred far apart along distinct axes.
Graph labelled_blobs(std::size_t per_class, int classes, double sep, std::uint64_t seed, Matrix* emb) {
  const std::size_t n = per_class * static_cast<std::size_t>(classes);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  *emb = Matrix(static_cast<Index>(n), 8);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
    for (Index c = 0; c < 8; ++c) (*emb)(static_cast<Index>(i), c) = noise(rng) + (c == y[i] ? sep : 0.0);
  }
  Graph g = testing::random_graph(n, n, seed).with_labels(y);
  return split_nodes(g, per_class / 4, per_class / 4 * static_cast<std::size_t>(classes),
                     per_class / 2 * static_cast<std::size_t>(classes), seed);
}

// Mean cross-entropy plus the weight penalty, written out independently.
double probe_objective(const Matrix& w, const Matrix& x, const std::vector<int>& y, double l2) {
  double loss = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<double> z(static_cast<std::size_t>(w.cols()));
    for (Index k = 0; k < w.cols(); ++k) {
      z[static_cast<std::size_t>(k)] = w(x.cols(), k);
      for (Index d = 0; d < x.cols(); ++d) z[static_cast<std::size_t>(k)] += x(i, d) * w(d, k);
    }
    double mx = *std::max_element(z.begin(), z.end()), s = 0.0;
    for (double v : z) s += std::exp(v - mx);
    loss += mx + std::log(s) - z[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
  }
  loss /= static_cast<double>(x.rows());
  return loss + 0.5 * l2 * w.topRows(x.cols()).squaredNorm();
}

TEST(MacroScores, WorkedExample) {
  // Class 0: P 1, R 1/2, F1 2/3. Class 1: P 2/3, R 1, F1 4/5.
  MacroScores s = macro_scores({0, 0, 1, 1}, {0, 1, 1, 1});
  EXPECT_NEAR(s.precision, (1.0 + 2.0 / 3.0) / 2, 1e-12);
  EXPECT_NEAR(s.recall, 0.75, 1e-12);
  EXPECT_NEAR(s.f1, (2.0 / 3.0 + 0.8) / 2, 1e-12);
  EXPECT_NEAR(s.accuracy, 0.75, 1e-12);
}

TEST(MacroScores, PredictedOnlyClassCountsWithZero) {
  // Class 2 never occurs in truth: P 0, R 0 (zero division), F1 0.
  MacroScores s = macro_scores({0, 0}, {0, 2});
  EXPECT_NEAR(s.f1, (2.0 / 3.0 + 0.0) / 2, 1e-12);
  EXPECT_NEAR(s.precision, 0.5, 1e-12);
}

TEST(LogisticRegression, ReachesStationaryPointOfTheObjective) {
  Matrix emb;
  Graph g = labelled_blobs(40, 3, 2.0, 1, &emb);
  std::vector<int> y(emb.rows());
  for (Index i = 0; i < emb.rows(); ++i) y[static_cast<std::size_t>(i)] = (*g.labels())[static_cast<std::size_t>(i)];
  ProbeOptions opt;
  const ProbeFit fit = fit_logistic_regression(emb, y, 3, opt, 7);
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(fit.grad_norm, opt.grad_tol);
  // Convex objective: every nearby point is no better.
  const double best = probe_objective(fit.weights, emb, y, opt.l2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> step(0.0, 1e-3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix w = fit.weights;
    for (Index i = 0; i < w.size(); ++i) w.data()[i] += step(rng);
    EXPECT_GE(probe_objective(w, emb, y, opt.l2), best - 1e-12);
  }
}

TEST(LinearProbe, SeparableClassesScorePerfectly) {
  Matrix emb;
  Graph g = labelled_blobs(40, 4, 50.0, 2, &emb);
  MetricsRecord r = linear_probe(emb, g, 3);
  EXPECT_DOUBLE_EQ(r.get("f1"), 1.0);
  EXPECT_DOUBLE_EQ(r.get("precision"), 1.0);
  EXPECT_DOUBLE_EQ(r.get("recall"), 1.0);
  EXPECT_EQ(r.task, "node_classification");
  EXPECT_EQ(r.tag("part"), "test");
}

TEST(LinearProbe, RandomLabelsScoreAtChance) {
  const int classes = 7;
  double total = 0.0;
  const int reps = 5;
  for (int rep = 0; rep < reps; ++rep) {
    const std::size_t n = 2100;
    std::mt19937_64 rng(100 + rep);
    std::normal_distribution<double> noise(0.0, 1.0);
    Matrix emb(static_cast<Index>(n), 16);
    for (Index i = 0; i < emb.size(); ++i) emb.data()[i] = noise(rng);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % classes);
    std::shuffle(y.begin(), y.end(), rng);
    Graph g = split_nodes(testing::random_graph(n, n, rep).with_labels(y), 20, 500, 1000, rep);
    total += linear_probe(emb, g, 1).get("f1");
  }
  EXPECT_NEAR(total / reps, 1.0 / classes, 0.05);
}

TEST(LinearProbe, DeterministicAndRotationStable) {
  Matrix emb;
  Graph g = labelled_blobs(60, 3, 1.0, 4, &emb);
  const MetricsRecord a = linear_probe(emb, g, 4);
  const MetricsRecord b = linear_probe(emb, g, 4);
  EXPECT_EQ(a.metrics, b.metrics);

  // The penalised objective is rotation invariant, so only the random start
  // differs: the optimum (and the score) should barely move.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix m(8, 8);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = noise(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(m).householderQ();
  const MetricsRecord r = linear_probe(emb * q, g, 4);
  EXPECT_NEAR(r.get("f1"), a.get("f1"), 0.01);
}

TEST(LinearProbe, MissingLabelsOrSplitIsAConfigError) {
  Graph g = testing::path_graph(5);
  Matrix emb = Matrix::Zero(5, 2);
  EXPECT_THROW(linear_probe(emb, g), ConfigError);
  EXPECT_THROW(linear_probe(emb, g.with_labels({0, 1, 0, 1, 0})), ConfigError);
}

// ---- link ranking ----

// Rank of v counted directly: unmasked nodes strictly ahead of it.
std::size_t counted_rank(const Matrix& emb, const Graph& g, const Edge& q, const std::set<std::uint64_t>& known) {
  auto score = [&](NodeId w) {
    double s = 0.0;
    for (Index d = 0; d < emb.cols(); ++d) s += emb(q.u, d) * emb(w, d);
    return s;
  };
  const double sv = score(q.v);
  std::size_t ahead = 0;
  for (NodeId w = 0; w < g.n_nodes(); ++w) {
    if (w == q.u || w == q.v || known.count(pair_key(q.u, w))) continue;
    const double sw = score(w);
    ahead += (sw > sv || (sw == sv && w < q.v));
  }
  return ahead + 1;
}

TEST(LinkRank, WorkedExample) {
  // Path 0-1-2-3; edge (0,1) train, (1,2) val, (2,3) test... plus a chord (0,3) test.
  Graph g = Graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  EdgeSplit s;
  s.train = {0};
  s.val = {1};
  s.test = {2, 3};
  g = g.with_edge_split(s);
  Matrix emb(4, 1);
  emb << 1, 3, 2, 2;
  // Query (2,3): u=2 excludes itself and its val neighbour 1; candidates 0 (2), 3 (4). Rank 1.
  // Query (0,3): excludes 0 and train neighbour 1; candidates 2 (2), 3 (2) tie, lower id first. Rank 2.
  EXPECT_EQ(link_ranks(emb, g), (std::vector<std::size_t>{1, 2}));
  MetricsRecord r = link_rank(emb, g, {{1, 2}});
  EXPECT_DOUBLE_EQ(r.get("mrr"), 0.75);
  EXPECT_DOUBLE_EQ(r.get("hits@1"), 0.5);
  EXPECT_DOUBLE_EQ(r.get("hits@2"), 1.0);
}

TEST(LinkRank, UniquelyMaximalTargetsRankFirst) {
  Graph g = split_edges(testing::random_graph(20, 40, 4), {0.8, 0.1, 0.1}, 4);
  for (const Edge& q : g.split_edges_of(g.edge_split()->test)) {
    // One query at a time: give v a private direction shared with u.
    EdgeSplit one = *g.edge_split();
    one.test.clear();
    for (std::size_t i = 0; i < g.n_edges(); ++i)
      if (g.edges()[i] == q) one.test.push_back(i);
    Matrix emb = Matrix::Zero(20, 2);
    emb.col(0).setOnes();
    emb(q.u, 1) = 1.0;
    emb(q.v, 1) = 5.0;
    MetricsRecord r = link_rank(emb, g.with_edge_split(one));
    EXPECT_EQ(r.get("mrr"), 1.0);
    EXPECT_EQ(r.get("hits@20"), 1.0);
  }
}

TEST(LinkRank, IdenticalEmbeddingsRankByIdAmongUnmasked) {
  // 5 nodes, train 0-1, val 0-2, test 0-3 and 4-2.
  Graph g(5, {{0, 1}, {0, 2}, {0, 3}, {4, 2}});
  EdgeSplit s;
  s.train = {0};
  s.val = {1};
  s.test = {2, 3};
  g = g.with_edge_split(s);
  Matrix emb = Matrix::Ones(5, 3);
  // (0,3): nodes 1, 2 masked, candidates {3, 4} -> rank 1.
  // (4,2): nothing known about 4, candidates {0, 1, 2, 3} -> rank 3.
  EXPECT_EQ(link_ranks(emb, g), (std::vector<std::size_t>{1, 3}));
  EXPECT_NEAR(link_rank(emb, g).get("mrr"), (1.0 + 1.0 / 3.0) / 2, 1e-15);
}

TEST(LinkRank, MatchesCountingOracleOnSmallGraphs) {
  std::mt19937_64 rng(11);
  std::size_t checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 6;
    const std::size_t m = 2 + rng() % std::min<std::size_t>(n * (n - 1) / 2 - 1, 12);
    Graph g = split_edges(testing::random_graph(n, m, rng()), {0.5, 0.25, 0.25}, rng());
    // Small integers: exact scores and plenty of ties.
    Matrix emb(static_cast<Index>(n), 2);
    for (Index i = 0; i < emb.size(); ++i) emb.data()[i] = static_cast<double>(static_cast<int>(rng() % 5) - 2);
    for (SplitPart part : {SplitPart::val, SplitPart::test}) {
      const auto& sp = *g.edge_split();
      const auto& idx = part == SplitPart::val ? sp.val : sp.test;
      if (idx.empty()) continue;
      std::set<std::uint64_t> known;
      for (std::size_t i : sp.train) known.insert(pair_key(g.edges()[i].u, g.edges()[i].v));
      if (part == SplitPart::test)
        for (std::size_t i : sp.val) known.insert(pair_key(g.edges()[i].u, g.edges()[i].v));
      LinkRankOptions opt;
      opt.part = part;
      const auto ranks = link_ranks(emb, g, opt);
      ASSERT_EQ(ranks.size(), idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        EXPECT_EQ(ranks[k], counted_rank(emb, g, g.edges()[idx[k]], known)) << "trial " << trial;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 300u);
}

TEST(LinkRank, MetricsStayInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = split_edges(testing::random_graph(30, 80, seed), {0.8, 0.1, 0.1}, seed);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Matrix emb(30, 4);
    for (Index i = 0; i < emb.size(); ++i) emb.data()[i] = noise(rng);
    for (const auto& [k, v] : link_rank(emb, g).metrics) {
      EXPECT_GE(v, 0.0) << k;
      EXPECT_LE(v, 1.0) << k;
    }
  }
}

TEST(LinkRank, LargeGraphsUseAFlaggedPool) {
  Graph g = split_edges(testing::random_graph(60, 150, 3), {0.8, 0.1, 0.1}, 3);
  Matrix emb = Matrix::Ones(60, 2);
  LinkRankOptions opt;
  opt.max_candidates = 20;
  MetricsRecord r = link_rank(emb, g, opt);
  EXPECT_FALSE(r.tag("candidate_pool").empty());
  for (std::size_t rank : link_ranks(emb, g, opt)) EXPECT_LE(rank, 21u);
  EXPECT_TRUE(link_rank(emb, g).tag("candidate_pool").empty());
}

TEST(LinkRank, NeedsAnEdgeSplit) {
  EXPECT_THROW(link_rank(Matrix::Zero(3, 1), testing::path_graph(3)), ConfigError);
}

// ---- records ----

TEST(MetricsRecord, JsonlRoundTrip) {
  TempDir dir;
  MetricsRecord r;
  r.task = "link_prediction";
  r.metrics = {{"mrr", 0.25}, {"hits@50", 0.5}};
  r.seed = 42;
  r.config_hash = "abc";
  r.wall_time = 1.5;
  r.tags = {{"variant", "wo_gan"}};
  append_jsonl(dir.path("m.jsonl"), r);
  append_jsonl(dir.path("m.jsonl"), r);
  const auto back = read_jsonl(dir.path("m.jsonl"));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].metrics, r.metrics);
  EXPECT_EQ(back[1].tags, r.tags);
  EXPECT_EQ(back[1].seed, 42u);
  EXPECT_TRUE(std::isnan(r.get("f1")));
  EXPECT_THROW(read_jsonl(dir.file("bad.jsonl", "{\"task\": 1}\n")), ParseError);
}

// ---- degree profile ----

TEST(Spearman, Examples) {
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-12);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-12);
  // Average ranks {1, 2.5, 2.5, 4} against {1, 2, 3, 4}: 4.5 / sqrt(4.5 * 5).
  EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 4.5 / std::sqrt(22.5), 1e-12);
  EXPECT_TRUE(std::isnan(spearman({1, 1, 1}, {1, 2, 3})));
}

TEST(DegreeProfile, HubWeightedGeneratorCorrelatesWithDegree) {
  Graph g = testing::star_graph(6);  // hub 0
  CandidateSet c = build_candidate_set(g, 7, 1000);
  GeneratorParams gen = init_weights(g, c, 0.5, 0.75);
  const auto& s = *gen.support;
  // Only pairs among leaves exist as candidates; weight the ones touching leaf 1.
  for (std::size_t i = 0; i < s.n_candidates(); ++i) {
    const Edge& e = s.pairs[s.n_existing + i];
    gen.w(static_cast<Index>(s.n_existing + i), 0) = (e.u == 1 || e.v == 1) ? 2.0 : -1.0;
  }
  DegreeProfile p = new_edge_degree_profile(g, gen, 2);
  EXPECT_NEAR(p.total_mass, 5.0, 1e-9);
  EXPECT_NEAR(p.node_mass[1], 5.0, 1e-9);
  EXPECT_NEAR(p.node_mass[0], 0.0, 1e-9);
  EXPECT_NEAR(p.bucket_mass[0] + p.bucket_mass[1], 5.0, 1e-9);
}

// Chung-Lu graph with power-law expected degrees, sparse enough that even the
// hubs touch a small share of the nodes.
Graph skewed_sparse_graph(NodeId n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> w(n);
  for (NodeId i = 0; i < n; ++i) w[i] = 40.0 * std::pow(i + 1.0, -0.6);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (uniform01(rng) < std::min(1.0, w[i] * w[j] / total)) edges.push_back({i, j});
  return Graph(n, edges);
}

TEST(DegreeProfile, MassOnTheTopHubGivesPositiveCorrelation) {
  Graph g = skewed_sparse_graph(200, 1);
  NodeId hub = 0;
  for (NodeId v = 1; v < g.n_nodes(); ++v)
    if (g.degree(v) > g.degree(hub)) hub = v;
  CandidateSet c = build_candidate_set(g, 200, 100000);
  GeneratorParams gen = init_weights(g, c, 0.5, 0.75);
  const auto& s = *gen.support;
  // One new edge, from the hub to its first non-neighbour.
  bool placed = false;
  for (std::size_t i = 0; i < s.n_candidates(); ++i) {
    const Edge& e = s.pairs[s.n_existing + i];
    const bool pick = !placed && (e.u == hub || e.v == hub);
    placed |= pick;
    gen.w(static_cast<Index>(s.n_existing + i), 0) = pick ? 2.0 : -1.0;
  }
  DegreeProfile p = new_edge_degree_profile(g, gen);
  EXPECT_NEAR(p.total_mass, 1.0, 1e-12);
  EXPECT_NEAR(p.node_mass[hub], 1.0, 1e-12);
  EXPECT_GT(p.spearman, 0.0);
  EXPECT_NEAR(p.bucket_mass.back(), p.total_mass, 1e-9);  // credited to the hub's decile
}

TEST(DegreeProfile, EmptyCandidateSetGivesEmptyProfile) {
  Graph g = testing::complete_graph(4);
  GeneratorParams gen = init_weights(g, build_candidate_set(g, 4), 0.5, 0.0);
  DegreeProfile p = new_edge_degree_profile(g, gen);
  EXPECT_TRUE(p.bucket_mass.empty());
  EXPECT_EQ(p.total_mass, 0.0);
  EXPECT_TRUE(std::isnan(p.spearman));
}

TEST(DegreeProfile, RandomEdgesCentreOnZero) {
  Graph g = skewed_sparse_graph(1000, 5);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    DegreeProfile p = random_edge_profile(g, 2000, seed);
    EXPECT_NEAR(p.total_mass, 2000.0, 1e-12);
    mean += p.spearman / 20;
  }
  EXPECT_LT(std::abs(mean), 0.1);
}

TEST(DegreeProfile, SaturatedHubsPullTheBaselineNegative) {
  // A hub adjacent to everything has no non-edges left to draw.
  Graph g = testing::star_graph(30);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) mean += random_edge_profile(g, 60, seed).spearman / 20;
  EXPECT_LT(mean, 0.0);
}

// ---- experiments ----

TrainConfig tiny_config() {
  TrainConfig c;
  c.dim = 8;
  c.seed = 3;
  c.max_iters = 12;
  c.eval_every = 4;
  c.patience = 2;
  c.top_k = 5;
  return c;
}

TEST(Variants, MapToTheRightSwitches) {
  const TrainConfig base = tiny_config();
  EXPECT_EQ(to_text(apply_variant(base, Variant::full)), to_text(base));
  EXPECT_EQ(apply_variant(base, Variant::wo_reg).lambda_cnt, 0.0);
  EXPECT_EQ(apply_variant(base, Variant::wo_reg).lambda_new, 0.0);
  TrainConfig gan = apply_variant(base, Variant::wo_gan);
  EXPECT_EQ(gan.n_g, 0);
  EXPECT_EQ(gan.n_d, 0);
  EXPECT_EQ(gan.gcl_view, "dropout");
  EXPECT_EQ(apply_variant(base, Variant::wo_ssl).n_e, 0);
  EXPECT_EQ(apply_variant(base, Variant::wo_gcl).lambda_gcl, 0.0);
  EXPECT_EQ(apply_variant(base, Variant::wo_bpr).lambda_bpr, 0.0);
  for (auto name : {"full", "wo_reg", "wo_gan", "wo_ssl", "wo_gcl", "wo_bpr"})
    EXPECT_EQ(variant_name(parse_variant(name)), name);
  EXPECT_THROW(parse_variant("wo_everything"), ConfigError);
}

TEST(Experiments, LinkPredictionRunProducesATaggedRecord) {
  Graph g = split_edges(testing::random_graph(40, 120, 1), {0.8, 0.1, 0.1}, 1);
  ExperimentOutcome o = run_experiment(g, tiny_config());
  EXPECT_EQ(o.record.task, "link_prediction");
  EXPECT_EQ(o.record.config_hash, config_hash(tiny_config()));
  EXPECT_FALSE(std::isnan(o.record.get("mrr")));
  EXPECT_FALSE(std::isnan(o.train.best_val));
  MetricsRecord abl = run_ablation(Variant::wo_gcl, g, tiny_config());
  EXPECT_EQ(abl.tag("variant"), "wo_gcl");
}

TEST(Experiments, ZeroReplacementEqualsSimpleGcl) {
  Graph g = split_edges(testing::random_graph(40, 120, 2), {0.8, 0.1, 0.1}, 2);
  const auto curve = edge_replacement_experiment(g, {0.0, 0.5}, tiny_config());
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_EQ(curve[0].value, run_ablation(Variant::wo_gan, g, tiny_config()).get("mrr"));
  EXPECT_EQ(curve_table(curve, "mrr").substr(0, 9), "rate\tmrr\n");
}

TEST(Experiments, SweepAtTheBaseValueHasUnitEta) {
  Graph g = split_edges(testing::random_graph(40, 120, 3), {0.8, 0.1, 0.1}, 3);
  const auto rows = sweep(g, tiny_config(), "lambda_g", {"0.5", "0.25"});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].eta, 1.0);
  EXPECT_THROW(sweep(g, tiny_config(), "no_such_key", {"1"}), ConfigError);
}

TEST(Experiments, NodeClassificationRun) {
  Matrix unused;
  Graph g = labelled_blobs(20, 3, 1.0, 5, &unused);
  ExperimentOutcome o = run_experiment(g, tiny_config(), {.probe_inits = 2});
  EXPECT_EQ(o.record.task, "node_classification");
  EXPECT_GE(o.record.get("f1"), 0.0);
  EXPECT_THROW(infer_task(testing::path_graph(3)), ConfigError);
}

}  // namespace
}  // namespace gacn
