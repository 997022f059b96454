#include "gacn/generator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gacn/error.hpp"
#include "test_util.hpp"

namespace gacn {
namespace {

// A graph with |E| edges and a candidate set of exactly `nc` pairs.
std::pair<Graph, CandidateSet> graph_with_candidates(std::size_t n, std::size_t m, std::size_t nc,
                                                     std::uint64_t seed) {
  Graph g = testing::random_graph(n, m, seed);
  CandidateSet c = build_candidate_set(g, n, nc);
  return {g, c};
}

TEST(InitWeights, Defaults) {
  auto [g, c] = graph_with_candidates(60, 100, 1000, 1);
  ASSERT_EQ(c.size(), 1000u);
  GeneratorParams p = init_weights(g, c, 0.5, 0.75);
  ASSERT_EQ(p.support->size(), 1100u);
  for (std::size_t k = 0; k < 100; ++k) EXPECT_DOUBLE_EQ(p.w(static_cast<Index>(k), 0), 0.125);
  for (std::size_t k = 100; k < 1100; ++k) EXPECT_DOUBLE_EQ(p.w(static_cast<Index>(k), 0), 0.0375);
}

TEST(InitWeights, GammaExtremes) {
  auto [g, c] = graph_with_candidates(10, 10, 5, 2);
  GeneratorParams none = init_weights(g, c, 0.5, 0.0);
  EXPECT_DOUBLE_EQ(none.w(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(none.w(10, 0), 0.0);
  GeneratorParams all = init_weights(g, c, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(all.w(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(all.w(10, 0), 1.0);
  EXPECT_THROW(init_weights(testing::complete_graph(4), build_candidate_set(testing::complete_graph(4), 4), 0.5, 0.5),
               ConfigError);
  EXPECT_NO_THROW(init_weights(testing::complete_graph(4), CandidateSet{}, 0.5, 0.0));
}

GeneratorParams single_pair(double w, double tau) {
  Graph g = testing::path_graph(2);
  GeneratorParams p = init_weights(g, {}, 0.5, 0.0, tau);
  p.w(0, 0) = w;
  return p;
}

// The first uniform draw of the noise sub-generator, reproduced independently.
double first_noise(std::uint64_t rng_seed) {
  Rng outer(rng_seed);
  Rng noise(outer());
  return uniform01(noise);
}

TEST(RelaxedView, EqualDrawGivesHalf) {
  const double x = first_noise(11);
  for (double tau : {1.0, 0.1, 1e-4}) {
    GeneratorParams p = single_pair(x, tau);
    diff::Tape t;
    Rng rng(11);
    EXPECT_DOUBLE_EQ(sample_relaxed_view(t, p, rng).p.scalar(), 0.5);
  }
}

TEST(RelaxedView, UnitTemperatureValue) {
  // Pick a seed, then place w so that w - x = -0.5 for that draw.
  const double x = first_noise(3);
  GeneratorParams p = single_pair(x - 0.5, 1.0);
  diff::Tape t;
  Rng rng(3);
  EXPECT_NEAR(sample_relaxed_view(t, p, rng).p.scalar(), 1.0 / (1.0 + std::exp(0.5)), 1e-15);
  EXPECT_NEAR(1.0 / (1.0 + std::exp(0.5)), 0.37754, 1e-5);
}

TEST(RelaxedView, SaturatesToClamp) {
  const double x = first_noise(5);
  GeneratorParams hi = single_pair(x + 0.3, 1e-4);
  GeneratorParams lo = single_pair(x - 0.3, 1e-4);
  diff::Tape t;
  Rng r1(5), r2(5);
  EXPECT_EQ(sample_relaxed_view(t, hi, r1).p.scalar(), diff::kProbCeil);
  EXPECT_EQ(sample_relaxed_view(t, lo, r2).p.scalar(), diff::kProbFloor);
}

TEST(RelaxedView, SameSeedBitIdentical) {
  auto [g, c] = graph_with_candidates(30, 60, 200, 4);
  GeneratorParams p = init_weights(g, c, 0.5, 0.75, 0.3);
  diff::Tape t;
  Rng a(9), b(9);
  auto va = sample_relaxed_view(t, p, a);
  auto vb = sample_relaxed_view(t, p, b);
  EXPECT_EQ(va.noise_seed, vb.noise_seed);
  EXPECT_EQ(va.p.value(), vb.p.value());
  EXPECT_EQ(va.adjacency().values.rows(), static_cast<Index>(2 * p.support->size()));
}

TEST(RelaxedView, ConvergesToIndicatorAsTemperatureShrinks) {
  auto [g, c] = graph_with_candidates(20, 30, 50, 6);
  GeneratorParams p = init_weights(g, c, 0.5, 0.5, 1.0);
  Rng wr(1);
  for (Index k = 0; k < p.w.rows(); ++k) p.w(k, 0) = uniform01(wr);
  Rng outer(21);
  Rng noise(outer());
  std::vector<double> x(p.support->size());
  for (double& v : x) v = uniform01(noise);
  double prev = 1e300;
  for (double tau : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
    p.tau_g = tau;
    diff::Tape t;
    Rng rng(21);
    const Matrix& pv = sample_relaxed_view(t, p, rng).p.value();
    double err = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (std::abs(p.w(static_cast<Index>(k), 0) - x[k]) < 1e-3) continue;
      err = std::max(err, std::abs(pv(static_cast<Index>(k), 0) - (x[k] < p.w(static_cast<Index>(k), 0) ? 1.0 : 0.0)));
    }
    EXPECT_LE(err, prev);
    prev = err;
  }
  EXPECT_LE(prev, diff::kProbFloor);
}

// Builds a view with prescribed probabilities on the given support.
RelaxedView fixed_view(diff::Tape& t, const GeneratorParams& p, const std::vector<double>& values) {
  RelaxedView v;
  v.support = p.support;
  v.p = t.leaf(Eigen::Map<const Matrix>(values.data(), static_cast<Index>(values.size()), 1), true);
  return v;
}

TEST(RegularizationLosses, Examples) {
  auto [g, c] = graph_with_candidates(12, 10, 1, 7);
  GeneratorParams p = init_weights(g, c, 0.5, 0.5);
  diff::Tape t;
  // Sum p = 7 over 10 edges + 1 candidate (candidate p = 0.6).
  std::vector<double> vals(11, 0.64);
  vals[10] = 0.6;
  auto view = fixed_view(t, p, vals);
  EXPECT_NEAR(edge_count_loss(view, g, 0.5).scalar(), 2.0, 1e-12);
  EXPECT_NEAR(new_edge_loss(view, g).scalar(), 0.6, 1e-12);
  EXPECT_NEAR(regularization_loss(view, g, 1.0, 0.5, 0.5).scalar(), 2.3, 1e-12);
  EXPECT_DOUBLE_EQ(regularization_loss(view, g, 0.0, 0.0, 0.5).scalar(), 0.0);

  std::vector<double> at_target(11, 0.0);
  for (int k = 0; k < 10; ++k) at_target[static_cast<std::size_t>(k)] = 0.5;
  auto v2 = fixed_view(t, p, at_target);
  EXPECT_DOUBLE_EQ(edge_count_loss(v2, g, 0.5).scalar(), 0.0);
  EXPECT_DOUBLE_EQ(regularization_loss(v2, g, 1.0, 0.0, 0.5).scalar(), 0.0);

  Graph g4 = testing::path_graph(5);
  GeneratorParams p4 = init_weights(g4, {}, 0.5, 0.0);
  auto v4 = fixed_view(t, p4, std::vector<double>(4, 0.0));
  EXPECT_DOUBLE_EQ(edge_count_loss(v4, g4, 0.5).scalar(), 2.0);
  EXPECT_DOUBLE_EQ(new_edge_loss(v4, g4).scalar(), 0.0);

  auto [g5, c5] = graph_with_candidates(12, 10, 5, 8);
  GeneratorParams p5 = init_weights(g5, c5, 0.5, 0.5);
  std::vector<double> ones(15, 0.2);
  for (int k = 10; k < 15; ++k) ones[static_cast<std::size_t>(k)] = 1.0;
  EXPECT_DOUBLE_EQ(new_edge_loss(fixed_view(t, p5, ones), g5).scalar(), 5.0);
}

TEST(RegularizationLosses, GradientSigns) {
  auto [g, c] = graph_with_candidates(20, 30, 40, 9);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GeneratorParams p = init_weights(g, c, 0.3, 0.75, 0.05);
    diff::Tape t;
    diff::Var w = t.leaf(p.w, true);
    Rng rng(seed);
    auto view = sample_relaxed_view(t, w, p, rng);
    ASSERT_LT(view.p.value().sum(), 0.5 * 30);
    t.backward(edge_count_loss(view, g, 0.5));
    // Below target: raising any weight lowers the loss.
    EXPECT_TRUE((w.grad().array() <= 0).all());

    diff::Tape t2;
    diff::Var w2 = t2.leaf(p.w, true);
    Rng rng2(seed);
    t2.backward(new_edge_loss(sample_relaxed_view(t2, w2, p, rng2), g));
    EXPECT_TRUE((w2.grad().array() >= 0).all());
    EXPECT_TRUE((w2.grad().topRows(30).array() == 0).all());
  }
}

TEST(RegularizationLosses, GradientCheck) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto [g, c] = graph_with_candidates(8, 6, 6, seed);
    GeneratorParams p = init_weights(g, c, 0.5, 0.75, 0.5);
    Rng wr(seed);
    Matrix w0(p.w.rows(), 1);
    for (Index k = 0; k < w0.rows(); ++k) w0(k, 0) = uniform01(wr);
    auto make = [&, seed](double lc, double ln) {
      return diff::ScalarFn([&, lc, ln, seed](diff::Tape& t, std::span<const diff::Var> q) {
        Rng rng(seed);
        auto view = sample_relaxed_view(t, q[0], p, rng);
        return regularization_loss(view, g, lc, ln, 0.5);
      });
    };
    for (auto [lc, ln] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.5}}) {
      auto r = diff::gradient_check(make(lc, ln), {w0});
      ASSERT_TRUE(r.passed) << seed << " " << lc << " " << ln << " err " << r.max_rel_error;
    }
  }
}

TEST(ViewStatistics, CountsAndBuckets) {
  auto [g, c] = graph_with_candidates(10, 4, 1, 10);
  GeneratorParams p = init_weights(g, c, 0.5, 0.5);
  std::vector<double> all(5, 0.9);
  ViewStats s = view_statistics(*p.support, all, g, 0.5);
  EXPECT_EQ(s.edges, 5u);
  EXPECT_EQ(s.new_edges, 1u);
  EXPECT_EQ(s.existing, 4u);
  ViewStats none = view_statistics(*p.support, all, g, 0.95);
  EXPECT_EQ(none.edges, 0u);
  EXPECT_EQ(none.new_edges, 0u);

  // Star with one extra leaf pair missing: the hub end of a new pair decides the bucket.
  Graph star = testing::star_graph(4);
  CandidateSet cs = build_candidate_set(star, 5);
  GeneratorParams ps = init_weights(star, cs, 0.5, 0.5);
  std::vector<double> only_new(ps.support->size(), 0.0);
  for (std::size_t k = ps.support->n_existing; k < only_new.size(); ++k) only_new[k] = 1.0;
  ViewStats sb = view_statistics(*ps.support, only_new, star, 0.5, 5);
  const auto bucket = degree_buckets(star, 5);
  EXPECT_EQ(bucket[0], 4u);  // the centre has the highest degree
  std::size_t total = 0;
  for (auto b : sb.new_by_bucket) total += b;
  EXPECT_EQ(total, cs.size());
}

TEST(ExpectedMass, ClosedFormMatchesMonteCarlo) {
  for (double tau : {1.0, 0.3, 0.05}) {
    for (double w : {-0.2, 0.1, 0.5, 0.93, 1.4}) {
      Rng rng(static_cast<std::uint64_t>(w * 1000 + tau * 10));
      double acc = 0;
      const int n = 200000;
      for (int i = 0; i < n; ++i) acc += 1.0 / (1.0 + std::exp(-(w - uniform01(rng)) / tau));
      EXPECT_NEAR(expected_edge_probability(w, tau), acc / n, 3e-3) << w << " " << tau;
    }
  }
  EXPECT_NEAR(expected_edge_probability(0.37, 1e-4), 0.37, 1e-9);
  EXPECT_NEAR(expected_edge_probability(-0.5, 1e-4), 0.0, 1e-12);
}

TEST(GeneratorCheckpoint, RoundTrip) {
  auto [g, c] = graph_with_candidates(15, 20, 30, 12);
  GeneratorParams p = init_weights(g, c, 0.5, 0.75, 1e-4);
  p.w(3, 0) = 0.123456789012345678;
  std::stringstream ss;
  save_generator(ss, p);
  GeneratorParams q = load_generator(ss);
  EXPECT_EQ(q.w, p.w);
  EXPECT_EQ(q.support->pairs, p.support->pairs);
  EXPECT_EQ(q.support->n_existing, p.support->n_existing);
  EXPECT_EQ(q.support->pair_of_entry, p.support->pair_of_entry);
  EXPECT_EQ(q.tau_g, p.tau_g);
  std::stringstream bad("gacn-generator 2\n");
  EXPECT_THROW(load_generator(bad), ParseError);
}

}  // namespace
}  // namespace gacn
