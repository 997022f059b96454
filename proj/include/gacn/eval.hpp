#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gacn/config.hpp"
#include "gacn/generator.hpp"
#include "gacn/graph.hpp"
#include "gacn/trainer.hpp"

namespace gacn {

// One evaluation result. Metric values lie in [0, 1]; tags carry provenance
// (split description, variant, sampled-pool flags).
struct MetricsRecord {
  std::string task;
  std::vector<std::pair<std::string, double>> metrics;
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_time = 0.0;
  std::vector<std::pair<std::string, std::string>> tags;

  double get(const std::string& key) const;  // NaN when absent
  std::string tag(const std::string& key) const;
  std::string to_json() const;
  static MetricsRecord from_json(const std::string& line);
};

void append_jsonl(const std::string& path, const MetricsRecord& record);
std::vector<MetricsRecord> read_jsonl(const std::string& path);

enum class SplitPart { val, test };

// ---- node classification ----------------------------------------------------

struct ProbeOptions {
  double l2 = 1e-4;
  double grad_tol = 1e-5;
  int max_iters = 1000;
  std::uint64_t seed = 0;
};

struct ProbeFit {
  Matrix weights;  // (D + 1) x C, last row is the bias
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Multinomial logistic regression, mean cross-entropy plus l2/2 |W|^2 (bias
// unpenalised), minimised by L-BFGS from a small random start.
ProbeFit fit_logistic_regression(const Matrix& x, const std::vector<int>& y, int n_classes, const ProbeOptions& opt,
                                 std::uint64_t init_seed);
std::vector<int> predict(const ProbeFit& fit, const Matrix& x);

struct MacroScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};
// Averaged over the classes present in y_true or y_pred.
MacroScores macro_scores(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Fits on the train nodes, scores `part`; macro P/R/F1 averaged over n_inits
// classifier initialisations. ConfigError without labels or node split.
MetricsRecord linear_probe(const Matrix& emb, const Graph& g, std::size_t n_inits = 10, const ProbeOptions& opt = {},
                           SplitPart part = SplitPart::test);

// ---- link prediction --------------------------------------------------------

struct LinkRankOptions {
  std::vector<int> ks{20, 50, 100};
  SplitPart part = SplitPart::test;
  // Graphs with more nodes rank against a fixed sampled pool of this size.
  std::size_t max_candidates = 10000;
  std::uint64_t seed = 0;
};

// For each held-out edge (u, v) in its stored orientation, every node w is
// scored by d_u . d_w; u and its known neighbours (train, plus val when scoring
// test) are excluded, ties go to the lower id. Reports H@k and MRR.
MetricsRecord link_rank(const Matrix& emb, const Graph& g, const LinkRankOptions& opt = {});

// 1-based rank of every query, in split order.
std::vector<std::size_t> link_ranks(const Matrix& emb, const Graph& g, const LinkRankOptions& opt = {});

// ---- experiments ------------------------------------------------------------

enum class Variant { full, wo_reg, wo_gan, wo_ssl, wo_gcl, wo_bpr };
Variant parse_variant(const std::string& name);  // ConfigError on unknown names
std::string variant_name(Variant v);
TrainConfig apply_variant(TrainConfig cfg, Variant v);

enum class Task { node_classification, link_prediction };
// Link prediction when the graph carries an edge split, node classification
// when it carries labels and a node split; ConfigError otherwise.
Task infer_task(const Graph& g);

struct ExperimentOptions {
  std::size_t probe_inits = 10;
  ProbeOptions probe;
  LinkRankOptions link;
  std::string checkpoint_dir;
};

struct ExperimentOutcome {
  TrainResult train;
  MetricsRecord record;
  CandidateSet candidates;
  GeneratorParams generator;
};

// Trains with validation-based early stopping, then scores the test part.
ExperimentOutcome run_experiment(const Graph& g, const TrainConfig& cfg, const ExperimentOptions& opt = {});

// The headline metric of a task: macro F1 or MRR.
std::string primary_metric(Task task);

MetricsRecord run_ablation(Variant variant, const Graph& g, const TrainConfig& cfg, const ExperimentOptions& opt = {});

struct CurvePoint {
  double rate = 0.0;
  double value = 0.0;
};

// Simple-GCL (the wo_gan path) where the second view swaps a share of its
// kept edges for random non-edges. One point per rate.
std::vector<CurvePoint> edge_replacement_experiment(const Graph& g, const std::vector<double>& rates,
                                                    const TrainConfig& cfg, const ExperimentOptions& opt = {});
std::string curve_table(const std::vector<CurvePoint>& curve, const std::string& value_name);

struct SweepRow {
  std::string value;
  double metric = 0.0;
  double reference = 0.0;  // metric at the base configuration
  double eta = 0.0;        // metric / reference
};
std::vector<SweepRow> sweep(const Graph& g, const TrainConfig& base, const std::string& key,
                            const std::vector<std::string>& values, const ExperimentOptions& opt = {});

// ---- generated-view degree profile ------------------------------------------

struct DegreeProfile {
  std::vector<double> bucket_mass;  // by train-degree decile of the higher-degree endpoint
  std::vector<double> node_mass;    // mass of new pairs touching each node
  double spearman = 0.0;            // degree vs node_mass; NaN when undefined
  double total_mass = 0.0;
};

// New-edge mass of a trained generator: the expected relaxed weight of every
// candidate pair. Without candidates the profile is empty (spearman NaN).
DegreeProfile new_edge_degree_profile(const Graph& train_graph, const GeneratorParams& gen, std::size_t n_buckets = 10);
// Baseline: `n_new` distinct non-edges drawn uniformly, unit mass each.
DegreeProfile random_edge_profile(const Graph& train_graph, std::size_t n_new, std::uint64_t seed,
                                  std::size_t n_buckets = 10);

// Rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gacn
