#include "gacn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "gacn/error.hpp"
#include "gacn/log.hpp"
#include "gacn/ssl.hpp"
#include "gacn/text.hpp"

namespace gacn {

namespace fs = std::filesystem;

double StepRecord::get(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

std::string history_to_jsonl(const std::vector<StepRecord>& history) {
  std::string out;
  for (const StepRecord& r : history) {
    nlohmann::ordered_json j;
    j["iter"] = r.iter;
    j["phase"] = r.phase;
    for (const auto& [k, v] : r.values) j[k] = v;
    out += j.dump() + "\n";
  }
  return out;
}

Trainer::Trainer(const Graph& g, const TrainConfig& cfg)
    : cfg_(cfg), train_(g.train_graph()), rng_(cfg.seed), adam_(AdamOptions{.lr = cfg.lr}) {
  validate(cfg_);
  require(train_.n_nodes() >= 1, "trainer: empty graph");
  clean_adj_ = normalized_adjacency(train_);
  candidates_ = build_candidate_set(train_, static_cast<std::size_t>(cfg_.top_k),
                                    static_cast<std::size_t>(cfg_.candidate_cap_factor) * train_.n_edges());
  double gamma = cfg_.gamma;
  if (candidates_.empty() && gamma > 0) {
    log::warn("trainer: no candidate pairs, generator starts with gamma = 0");
    gamma = 0;
  }
  gen_ = init_weights(train_, candidates_, cfg_.lambda_g, gamma, cfg_.tau_g);
  table_ = init_embedding_table(train_, cfg_.dim, cfg_.init_std, rng_.stream("init.table"));
  const Index hidden = cfg_.mlp_hidden > 0 ? cfg_.mlp_hidden : 2 * cfg_.dim;
  mlp_ = init_mlp(2 * cfg_.dim, hidden, cfg_.mlp_layers, rng_.stream("init.mlp"));
}

Matrix Trainer::embeddings() const { return encode(table_, clean_adj_, cfg_.layers); }

std::vector<Edge> Trainer::dropout_edges(Rng& rng) const {
  std::vector<Edge> kept;
  kept.reserve(train_.n_edges());
  for (const Edge& e : train_.edges())
    if (uniform01(rng) < cfg_.dropout_keep) kept.push_back(e);
  return kept;
}

std::vector<Edge> Trainer::replaced_edges(Rng& rng, Rng& swap_rng) const {
  std::vector<Edge> kept = dropout_edges(rng);
  const auto n_swap = static_cast<std::size_t>(std::floor(cfg_.replace_rate * static_cast<double>(kept.size())));
  if (n_swap == 0) return kept;
  // Drop n_swap kept edges (partial shuffle), then add as many fresh non-edges.
  for (std::size_t i = 0; i < n_swap; ++i) {
    const std::size_t j = i + uniform_index(swap_rng, kept.size() - i);
    std::swap(kept[i], kept[j]);
  }
  kept.erase(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(n_swap));
  std::unordered_set<std::uint64_t> added;
  const std::size_t n = train_.n_nodes();
  const std::size_t budget = 100 * n_swap + 1000;
  for (std::size_t tries = 0; added.size() < n_swap && tries < budget; ++tries) {
    const auto a = static_cast<NodeId>(uniform_index(swap_rng, n));
    const auto b = static_cast<NodeId>(uniform_index(swap_rng, n));
    if (a == b || train_.has_edge(a, b) || !added.insert(pair_key(a, b)).second) continue;
    kept.push_back({a, b});
  }
  return kept;
}

diff::SparseVar Trainer::discrete_view(diff::Tape& t, const std::vector<Edge>& edges) const {
  diff::SparseMatrix a = normalized_adjacency(train_.n_nodes(), edges);
  return {a.pattern, t.constant(Eigen::Map<const Matrix>(a.values.data(), static_cast<Index>(a.values.size()), 1))};
}

diff::SparseVar Trainer::relaxed_view(diff::Tape& t, diff::Var w, Rng& rng) const {
  RelaxedView v = sample_relaxed_view(t, w, gen_, rng);
  return diff::normalize_adjacency(v.adjacency(), cfg_.degree_floor);
}

std::vector<std::size_t> Trainer::contrastive_pool() {
  const std::size_t n = train_.n_nodes();
  const auto k = std::min<std::size_t>(n, static_cast<std::size_t>(cfg_.negative_pool));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng& rng = rng_.stream("e.pool");
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

StepRecord Trainer::g_step() {
  diff::Tape t;
  diff::Var w = t.leaf(gen_.w, true);
  RelaxedView view = sample_relaxed_view(t, w, gen_, rng_.stream("g.noise"));
  diff::Var cnt = edge_count_loss(view, train_, cfg_.lambda_g);
  diff::Var fresh = new_edge_loss(view, train_);
  diff::Var loss = diff::add(diff::scale(cnt, cfg_.lambda_cnt), diff::scale(fresh, cfg_.lambda_new));
  const double reg = loss.scalar();
  double adv = 0.0, p_fake = std::numeric_limits<double>::quiet_NaN();
  if (cfg_.adversarial) {
    diff::SparseVar adj = diff::normalize_adjacency(view.adjacency(), cfg_.degree_floor);
    EncoderOutput enc = encode(t.constant(table_), adj, cfg_.layers);
    Discrimination d = discriminate(pool_graph(enc), bind_mlp(t, mlp_, false));
    diff::Var a = adversarial_loss_with_logit(d.logit);
    adv = a.scalar();
    p_fake = d.p.scalar();
    loss = diff::add(loss, a);
  }
  t.backward(loss);
  adam_.step("w", gen_.w, w.grad());
  StepRecord r{"g", iter_, {{"loss", loss.scalar()}, {"reg", reg}, {"cnt", cnt.scalar()}, {"new", fresh.scalar()}}};
  r.values.emplace_back("mass", view.p.value().sum());
  if (cfg_.adversarial) {
    r.values.emplace_back("adv", adv);
    r.values.emplace_back("p_fake", p_fake);
  }
  return r;
}

StepRecord Trainer::d_step() {
  diff::Tape t;
  MlpVars mlp = bind_mlp(t, mlp_, true);
  diff::Var table = t.leaf(table_, cfg_.d_step_updates_encoder);
  diff::Var total = t.scalar(0.0);
  std::size_t correct = 0;
  const auto views = static_cast<std::size_t>(cfg_.views_per_d_step);
  for (std::size_t i = 0; i < views; ++i) {
    // Label 1: predefined augmentation (edge dropout).
    EncoderOutput real = encode(table, discrete_view(t, dropout_edges(rng_.stream("d.dropout"))), cfg_.layers);
    Discrimination dr = discriminate(pool_graph(real), mlp);
    total = diff::add(total, bce_with_logit(dr.logit, 1));
    correct += dr.p.scalar() > 0.5;
    // Label 0: generated view.
    EncoderOutput fake = encode(table, relaxed_view(t, t.constant(gen_.w), rng_.stream("d.noise")), cfg_.layers);
    Discrimination df = discriminate(pool_graph(fake), mlp);
    total = diff::add(total, bce_with_logit(df.logit, 0));
    correct += df.p.scalar() <= 0.5;
  }
  diff::Var loss = diff::scale(total, 1.0 / static_cast<double>(2 * views));
  t.backward(loss);
  for (std::size_t l = 0; l < mlp_.n_layers(); ++l) {
    adam_.step("mlp.W" + std::to_string(l), mlp_.weights[l], mlp.weights[l].grad());
    adam_.step("mlp.b" + std::to_string(l), mlp_.biases[l], mlp.biases[l].grad());
  }
  if (cfg_.d_step_updates_encoder) adam_.step("table", table_, table.grad());
  return {"d", iter_, {{"loss", loss.scalar()}, {"acc", static_cast<double>(correct) / static_cast<double>(2 * views)}}};
}

StepRecord Trainer::e_step() {
  StepRecord r{"e", iter_, {}};
  const bool use_gcl = cfg_.lambda_gcl > 0;
  const bool use_bpr = cfg_.lambda_bpr > 0 && train_.n_edges() > 0;
  if (!use_gcl && !use_bpr) {
    r.values.emplace_back("loss", 0.0);
    return r;
  }
  diff::Tape t;
  diff::Var table = t.leaf(table_, true);
  diff::Var loss = t.scalar(0.0);
  EncoderOutput enc_p;
  if (use_gcl || (use_bpr && cfg_.bpr_source == "dropout")) {
    enc_p = encode(table, discrete_view(t, dropout_edges(rng_.stream("e.dropout"))), cfg_.layers);
  }
  if (use_gcl) {
    diff::SparseVar second;
    if (cfg_.gcl_view == "generator") {
      second = relaxed_view(t, t.constant(gen_.w), rng_.stream("e.noise"));
    } else if (cfg_.gcl_view == "dropout") {
      second = discrete_view(t, dropout_edges(rng_.stream("e.dropout")));
    } else {
      second = discrete_view(t, replaced_edges(rng_.stream("e.dropout"), rng_.stream("e.replace")));
    }
    EncoderOutput enc_g = encode(table, second, cfg_.layers);
    diff::Var gcl = train_.n_nodes() > static_cast<std::size_t>(cfg_.large_graph_threshold)
                        ? contrastive_loss(enc_p.final, enc_g.final, cfg_.tau_f, contrastive_pool())
                        : contrastive_loss(enc_p.final, enc_g.final, cfg_.tau_f);
    r.values.emplace_back("gcl", gcl.scalar());
    loss = diff::add(loss, diff::scale(gcl, cfg_.lambda_gcl));
  }
  if (use_bpr) {
    const std::size_t count = cfg_.triples_per_step > 0 ? static_cast<std::size_t>(cfg_.triples_per_step)
                                                        : train_.n_edges();
    TripleBatch batch = sample_triples(train_, count, rng_.stream("e.triples"));
    if (!batch.triples.empty()) {
      diff::Var fin = cfg_.bpr_source == "clean"
                          ? encode(table, diff::SparseVar{clean_adj_.pattern,
                                                          t.constant(Eigen::Map<const Matrix>(
                                                              clean_adj_.values.data(),
                                                              static_cast<Index>(clean_adj_.values.size()), 1))},
                                   cfg_.layers)
                                .final
                          : enc_p.final;
      diff::Var bpr = bpr_loss(fin, batch);
      r.values.emplace_back("bpr", bpr.scalar());
      loss = diff::add(loss, diff::scale(bpr, cfg_.lambda_bpr));
    }
  }
  t.backward(loss);
  adam_.step("table", table_, table.grad());
  r.values.insert(r.values.begin(), {"loss", loss.scalar()});
  return r;
}

TrainResult Trainer::train(const Evaluator& eval, const std::string& checkpoint_dir) {
  TrainResult res;
  Matrix best_table = table_;
  double best = -std::numeric_limits<double>::infinity();
  int stale = 0;
  try {
    for (int it = 0; it < cfg_.max_iters; ++it) {
      for (int s = 0; s < cfg_.n_g; ++s) res.history.push_back(g_step());
      for (int s = 0; s < cfg_.n_d; ++s) res.history.push_back(d_step());
      for (int s = 0; s < cfg_.n_e; ++s) res.history.push_back(e_step());
      ++iter_;
      ++res.iterations;
      if (!eval || iter_ % static_cast<std::size_t>(cfg_.eval_every) != 0) continue;
      const double v = eval(embeddings());
      res.history.push_back({"eval", iter_, {{"val", v}}});
      if (v > best) {
        best = v;
        best_table = table_;
        res.best_iter = iter_;
        stale = 0;
        if (!checkpoint_dir.empty()) save_checkpoint(checkpoint_dir);
      } else if (++stale >= cfg_.patience) {
        res.early_stopped = true;
        break;
      }
    }
  } catch (const Error& e) {
    // Parameters are only written after a finite gradient, so the current
    // state is the last good one.
    if (!checkpoint_dir.empty()) {
      save_checkpoint(checkpoint_dir);
      text::write_file_atomic((fs::path(checkpoint_dir) / "error.txt").string(), std::string(e.what()) + "\n");
    }
    throw;
  }
  if (eval && cfg_.restore_best && res.best_iter > 0) table_ = best_table;
  if (res.best_iter > 0) res.best_val = best;
  if (!checkpoint_dir.empty()) save_checkpoint(checkpoint_dir);
  res.table = table_;
  res.embeddings = embeddings();
  return res;
}

void Trainer::save_checkpoint(const std::string& dir) const {
  const fs::path target(dir);
  const fs::path tmp = target.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  auto put = [&](const char* name, const std::string& contents) {
    text::write_file_atomic((tmp / name).string(), contents);
  };
  std::ostringstream gen, disc, emb, opt, rng;
  save_generator(gen, gen_);
  save_mlp(disc, mlp_);
  diff::write_matrix(emb, table_);
  adam_.save(opt);
  rng_.save(rng);
  put("config.txt", to_text(cfg_));
  put("generator.txt", gen.str());
  put("discriminator.txt", disc.str());
  put("embeddings.txt", emb.str());
  put("optimizer.txt", opt.str());
  put("rng-state.txt", rng.str());
  put("manifest.txt", "gacn-checkpoint 1\niteration " + std::to_string(iter_) + "\nconfig_hash " + config_hash(cfg_) +
                          "\nn_nodes " + std::to_string(train_.n_nodes()) + "\n");
  fs::remove_all(target);
  fs::rename(tmp, target);
}

void Trainer::load_checkpoint(const std::string& dir) {
  const fs::path root(dir);
  auto open = [&](const char* name) {
    std::ifstream in(root / name);
    if (!in) throw ParseError((root / name).string(), 0, "cannot open checkpoint file");
    return in;
  };
  auto manifest = open("manifest.txt");
  std::string tag, key;
  int version = 0;
  std::size_t iteration = 0;
  if (!(manifest >> tag >> version >> key >> iteration) || tag != "gacn-checkpoint" || key != "iteration") {
    throw ParseError((root / "manifest.txt").string(), 0, "bad checkpoint manifest");
  }
  auto gin = open("generator.txt");
  GeneratorParams gen = load_generator(gin, (root / "generator.txt").string());
  auto din = open("discriminator.txt");
  MlpParams mlp = load_mlp(din, (root / "discriminator.txt").string());
  auto ein = open("embeddings.txt");
  Matrix table = diff::read_matrix(ein, (root / "embeddings.txt").string());
  require(table.rows() == table_.rows() && table.cols() == table_.cols(), "checkpoint: embedding shape mismatch");
  require(gen.support->pairs == gen_.support->pairs, "checkpoint: generator support differs from this graph");
  require(mlp.n_layers() == mlp_.n_layers() && mlp.in_width() == mlp_.in_width(),
          "checkpoint: discriminator shape mismatch");
  auto oin = open("optimizer.txt");
  Adam adam;
  adam.load(oin, (root / "optimizer.txt").string());
  auto rin = open("rng-state.txt");
  RngStreams rng;
  rng.load(rin);
  gen_ = std::move(gen);
  mlp_ = std::move(mlp);
  table_ = std::move(table);
  adam_ = std::move(adam);
  rng_ = std::move(rng);
  iter_ = iteration;
}

}  // namespace gacn
