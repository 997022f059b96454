#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gacn/config.hpp"
#include "gacn/diff.hpp"
#include "gacn/discriminator.hpp"
#include "gacn/encoder.hpp"
#include "gacn/generator.hpp"
#include "gacn/graph.hpp"
#include "gacn/optim.hpp"
#include "gacn/rng.hpp"

namespace gacn {

// One row of the training history: a phase tag ("g", "d", "e" or "eval") and
// named values in insertion order.
struct StepRecord {
  std::string phase;
  std::size_t iter = 0;
  std::vector<std::pair<std::string, double>> values;

  // NaN when absent.
  double get(const std::string& key) const;
};

std::string history_to_jsonl(const std::vector<StepRecord>& history);

// Validation score of a clean-graph readout; larger is better.
using Evaluator = std::function<double(const Matrix& embeddings)>;

struct TrainResult {
  Matrix table;
  Matrix embeddings;
  std::vector<StepRecord> history;
  std::size_t iterations = 0;
  bool early_stopped = false;
  double best_val = std::numeric_limits<double>::quiet_NaN();
  std::size_t best_iter = 0;
};

// Alternates G-, D- and E-steps. Each phase updates exactly one parameter
// group (W, the MLP, the table) unless d_step_updates_encoder is set. Training
// only ever sees the train edges of the graph it is given.
class Trainer {
 public:
  Trainer(const Graph& g, const TrainConfig& cfg);

  StepRecord g_step();
  StepRecord d_step();
  StepRecord e_step();

  // Runs until max_iters or early stopping. With an evaluator, validation runs
  // every eval_every iterations. A non-empty checkpoint_dir receives the state
  // at every improvement, at the end, and (as last good state) on failure.
  TrainResult train(const Evaluator& eval = {}, const std::string& checkpoint_dir = {});

  // Clean train-graph readout of the current table.
  Matrix embeddings() const;

  const TrainConfig& config() const noexcept { return cfg_; }
  const Graph& train_graph() const noexcept { return train_; }
  const CandidateSet& candidates() const noexcept { return candidates_; }
  GeneratorParams& generator() noexcept { return gen_; }
  const GeneratorParams& generator() const noexcept { return gen_; }
  MlpParams& discriminator() noexcept { return mlp_; }
  const MlpParams& discriminator() const noexcept { return mlp_; }
  Matrix& table() noexcept { return table_; }
  const Matrix& table() const noexcept { return table_; }
  RngStreams& rng() noexcept { return rng_; }
  std::size_t iteration() const noexcept { return iter_; }

  // Train edges kept independently with probability dropout_keep.
  std::vector<Edge> dropout_edges(Rng& rng) const;
  // A dropout view with floor(replace_rate * kept) kept edges swapped for
  // uniformly drawn non-edges (the swap draws come from `swap_rng`).
  std::vector<Edge> replaced_edges(Rng& rng, Rng& swap_rng) const;

  void save_checkpoint(const std::string& dir) const;
  void load_checkpoint(const std::string& dir);

 private:
  diff::SparseVar discrete_view(diff::Tape& t, const std::vector<Edge>& edges) const;
  diff::SparseVar relaxed_view(diff::Tape& t, diff::Var w, Rng& rng) const;
  std::vector<std::size_t> contrastive_pool();

  TrainConfig cfg_;
  Graph train_;
  diff::SparseMatrix clean_adj_;
  CandidateSet candidates_;
  GeneratorParams gen_;
  MlpParams mlp_;
  Matrix table_;
  RngStreams rng_;
  Adam adam_;
  std::size_t iter_ = 0;
};

}  // namespace gacn
