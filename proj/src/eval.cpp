#include "gacn/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "gacn/error.hpp"
#include "gacn/log.hpp"
#include "gacn/rng.hpp"
#include "gacn/text.hpp"

namespace gacn {

namespace {

using Json = nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- L-BFGS ----------------------------------------------------------------

using Vec = Eigen::VectorXd;
using Objective = std::function<double(const Vec& x, Vec& grad)>;

struct LbfgsResult {
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Two-loop recursion with a backtracking Armijo line search. Convergence is
// judged on the largest absolute gradient component.
LbfgsResult lbfgs(const Objective& f, Vec& x, double grad_tol, int max_iters, int memory = 10) {
  Vec g(x.size());
  double fx = f(x, g);
  std::deque<Vec> s_hist, y_hist;
  std::deque<double> rho_hist;
  LbfgsResult r;
  r.grad_norm = g.cwiseAbs().maxCoeff();
  Vec x_new(x.size()), g_new(x.size());
  for (r.iterations = 0; r.iterations < max_iters; ++r.iterations) {
    if (r.grad_norm <= grad_tol) {
      r.converged = true;
      return r;
    }
    Vec d = -g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(d);
    if (!(slope < 0)) {  // lost descent: restart from steepest descent
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    double step = s_hist.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k < 50; ++k) {
      x_new = x + step * d;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no further progress possible at this precision
    Vec s = x_new - x, y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front(), y_hist.pop_front(), rho_hist.pop_front();
      }
    }
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    r.grad_norm = g.cwiseAbs().maxCoeff();
  }
  r.converged = r.grad_norm <= grad_tol;
  return r;
}

Matrix with_bias(const Matrix& x) {
  Matrix xb(x.rows(), x.cols() + 1);
  xb.leftCols(x.cols()) = x;
  xb.col(x.cols()).setOnes();
  return xb;
}

Matrix gather(const Matrix& x, const std::vector<NodeId>& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(static_cast<Index>(rows[i]));
  return out;
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

// Higher-degree endpoint, ties to the lower id.
NodeId anchor(const Graph& g, const Edge& e) {
  const std::size_t du = g.degree(e.u), dv = g.degree(e.v);
  if (du != dv) return du > dv ? e.u : e.v;
  return std::min(e.u, e.v);
}

DegreeProfile profile_from_pairs(const Graph& g, const std::vector<Edge>& pairs, const std::vector<double>& mass,
                                 std::size_t n_buckets) {
  DegreeProfile p;
  p.spearman = kNaN;
  if (pairs.empty()) return p;
  p.bucket_mass.assign(n_buckets, 0.0);
  p.node_mass.assign(g.n_nodes(), 0.0);
  const auto bucket = degree_buckets(g, n_buckets);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    p.bucket_mass[bucket[anchor(g, pairs[i])]] += mass[i];
    p.node_mass[pairs[i].u] += mass[i];
    p.node_mass[pairs[i].v] += mass[i];
    p.total_mass += mass[i];
  }
  std::vector<double> deg(g.n_nodes());
  for (NodeId v = 0; v < g.n_nodes(); ++v) deg[v] = static_cast<double>(g.degree(v));
  p.spearman = spearman(deg, p.node_mass);
  return p;
}

}  // namespace

// ---- records ----------------------------------------------------------------

double MetricsRecord::get(const std::string& key) const {
  for (const auto& [k, v] : metrics)
    if (k == key) return v;
  return kNaN;
}

std::string MetricsRecord::tag(const std::string& key) const {
  for (const auto& [k, v] : tags)
    if (k == key) return v;
  return {};
}

std::string MetricsRecord::to_json() const {
  Json j;
  j["task"] = task;
  Json m = Json::object();
  for (const auto& [k, v] : metrics) m[k] = v;
  j["metrics"] = std::move(m);
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["wall_time"] = wall_time;
  Json t = Json::object();
  for (const auto& [k, v] : tags) t[k] = v;
  j["tags"] = std::move(t);
  return j.dump();
}

MetricsRecord MetricsRecord::from_json(const std::string& line) {
  MetricsRecord r;
  try {
    const Json j = Json::parse(line);
    r.task = j.at("task").get<std::string>();
    for (const auto& [k, v] : j.at("metrics").items()) r.metrics.emplace_back(k, v.is_null() ? kNaN : v.get<double>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.value("config_hash", std::string{});
    r.wall_time = j.value("wall_time", 0.0);
    if (j.contains("tags"))
      for (const auto& [k, v] : j.at("tags").items()) r.tags.emplace_back(k, v.get<std::string>());
  } catch (const Json::exception& e) {
    throw ParseError("metrics", 0, e.what());
  }
  return r;
}

void append_jsonl(const std::string& path, const MetricsRecord& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open " + path + " for appending");
  out << record.to_json() << '\n';
}

std::vector<MetricsRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::vector<MetricsRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(MetricsRecord::from_json(line));
    } catch (const ParseError& e) {
      throw ParseError(path, n, e.what());
    }
  }
  return out;
}

// ---- node classification ------------------------------------------------------

ProbeFit fit_logistic_regression(const Matrix& x, const std::vector<int>& y, int n_classes, const ProbeOptions& opt,
                                 std::uint64_t init_seed) {
  require(static_cast<std::size_t>(x.rows()) == y.size(), "logistic regression: one label per row required");
  require(n_classes >= 1 && x.rows() > 0, "logistic regression: empty problem");
  const Matrix xb = with_bias(x);
  const Index d = xb.cols(), c = n_classes, n = xb.rows();
  Matrix onehot = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    require(yi >= 0 && yi < n_classes, "logistic regression: label out of range");
    onehot(i, yi) = 1.0;
  }

  Objective f = [&](const Vec& flat, Vec& grad) {
    Eigen::Map<const Matrix> w(flat.data(), d, c);
    Matrix logits = xb * w;
    Eigen::VectorXd lse(n);
    for (Index i = 0; i < n; ++i) {
      const double mx = logits.row(i).maxCoeff();
      lse(i) = mx + std::log((logits.row(i).array() - mx).exp().sum());
    }
    double loss = (lse - (logits.cwiseProduct(onehot)).rowwise().sum()).mean();
    const auto w_pen = w.topRows(d - 1);
    loss += 0.5 * opt.l2 * w_pen.squaredNorm();
    Matrix prob = (logits.colwise() - lse).array().exp().matrix();
    Matrix gw = xb.transpose() * (prob - onehot) / static_cast<double>(n);
    gw.topRows(d - 1) += opt.l2 * w_pen;
    grad = Eigen::Map<const Vec>(gw.data(), gw.size());
    return loss;
  };

  Rng rng(init_seed);
  std::normal_distribution<double> normal(0.0, 0.01);
  Vec flat(d * c);
  for (Index i = 0; i < flat.size(); ++i) flat(i) = normal(rng);
  const LbfgsResult r = lbfgs(f, flat, opt.grad_tol, opt.max_iters);

  ProbeFit fit;
  fit.weights = Eigen::Map<const Matrix>(flat.data(), d, c);
  fit.iterations = r.iterations;
  fit.grad_norm = r.grad_norm;
  fit.converged = r.converged;
  return fit;
}

std::vector<int> predict(const ProbeFit& fit, const Matrix& x) {
  require(x.cols() + 1 == fit.weights.rows(), "predict: feature width mismatch");
  const Matrix logits = with_bias(x) * fit.weights;
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) {
    Index best = 0;
    logits.row(i).maxCoeff(&best);  // first maximum
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

MacroScores macro_scores(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  require(y_true.size() == y_pred.size(), "macro_scores: length mismatch");
  MacroScores s;
  if (y_true.empty()) return s;
  std::vector<int> classes(y_true);
  classes.insert(classes.end(), y_pred.begin(), y_pred.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) correct += (y_true[i] == y_pred[i]);
  for (int k : classes) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      tp += (y_pred[i] == k && y_true[i] == k);
      fp += (y_pred[i] == k && y_true[i] != k);
      fn += (y_pred[i] != k && y_true[i] == k);
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    s.precision += p;
    s.recall += r;
    s.f1 += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  const auto k = static_cast<double>(classes.size());
  s.precision /= k;
  s.recall /= k;
  s.f1 /= k;
  s.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
  return s;
}

MetricsRecord linear_probe(const Matrix& emb, const Graph& g, std::size_t n_inits, const ProbeOptions& opt,
                           SplitPart part) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!g.labels()) throw ConfigError("node classification needs labels");
  if (!g.node_split()) throw ConfigError("node classification needs a node split");
  require(static_cast<std::size_t>(emb.rows()) == g.n_nodes(), "linear_probe: one embedding row per node required");
  require(n_inits >= 1, "linear_probe: n_inits must be >= 1");
  const auto& split = *g.node_split();
  const auto& eval_nodes = part == SplitPart::val ? split.val : split.test;
  if (split.train.empty() || eval_nodes.empty()) throw ConfigError("node classification: empty train or eval split");
  const auto& labels = *g.labels();

  std::vector<int> y_train, y_eval;
  for (NodeId v : split.train) y_train.push_back(labels[v]);
  for (NodeId v : eval_nodes) y_eval.push_back(labels[v]);
  const Matrix x_train = gather(emb, split.train), x_eval = gather(emb, eval_nodes);

  double p = 0, r = 0, f1 = 0, acc = 0, f1_sq = 0;
  std::size_t unconverged = 0;
  for (std::size_t i = 0; i < n_inits; ++i) {
    const auto fit = fit_logistic_regression(x_train, y_train, g.n_classes(), opt,
                                             RngStreams::derive_seed(opt.seed, "probe." + std::to_string(i)));
    unconverged += !fit.converged;
    const MacroScores s = macro_scores(y_eval, predict(fit, x_eval));
    p += s.precision, r += s.recall, f1 += s.f1, acc += s.accuracy, f1_sq += s.f1 * s.f1;
  }
  const auto k = static_cast<double>(n_inits);
  MetricsRecord rec;
  rec.task = "node_classification";
  const double f1_mean = f1 / k;
  rec.metrics = {{"precision", p / k},
                 {"recall", r / k},
                 {"f1", f1_mean},
                 {"accuracy", acc / k},
                 {"f1_std", std::sqrt(std::max(0.0, f1_sq / k - f1_mean * f1_mean))}};
  rec.seed = opt.seed;
  rec.tags = {{"part", part == SplitPart::val ? "val" : "test"},
              {"split", split.provenance.empty() ? "seed=" + std::to_string(split.seed) : split.provenance},
              {"n_inits", std::to_string(n_inits)}};
  if (unconverged) {
    rec.tags.emplace_back("unconverged_fits", std::to_string(unconverged));
    log::warn("linear_probe: " + std::to_string(unconverged) + " fit(s) stopped before the gradient tolerance");
  }
  rec.wall_time = seconds_since(t0);
  return rec;
}

// ---- link prediction ----------------------------------------------------------

std::vector<std::size_t> link_ranks(const Matrix& emb, const Graph& g, const LinkRankOptions& opt) {
  if (!g.edge_split()) throw ConfigError("link prediction needs an edge split");
  require(static_cast<std::size_t>(emb.rows()) == g.n_nodes(), "link_rank: one embedding row per node required");
  const auto& split = *g.edge_split();
  const auto queries = g.split_edges_of(opt.part == SplitPart::val ? split.val : split.test);
  if (queries.empty()) throw ConfigError("link prediction: the evaluated split has no edges");

  std::vector<Edge> known = g.split_edges_of(split.train);
  if (opt.part == SplitPart::test) {
    const auto val = g.split_edges_of(split.val);
    known.insert(known.end(), val.begin(), val.end());
  }
  const CsrPattern mask = symmetric_pattern(g.n_nodes(), known);

  const std::size_t n = g.n_nodes();
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  if (n > opt.max_candidates) {
    Rng rng(RngStreams::derive_seed(opt.seed, "link.pool"));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(opt.max_candidates);
    std::sort(pool.begin(), pool.end());
  }

  std::vector<std::size_t> ranks;
  ranks.reserve(queries.size());
  std::vector<std::pair<double, NodeId>> cand;
  for (const Edge& q : queries) {
    const auto du = emb.row(static_cast<Index>(q.u));
    cand.clear();
    bool has_v = false;
    for (NodeId w : pool) {
      if (w == q.u || (w != q.v && mask.contains(q.u, w))) continue;
      has_v |= (w == q.v);
      cand.emplace_back(du.dot(emb.row(static_cast<Index>(w))), w);
    }
    if (!has_v) cand.emplace_back(du.dot(emb.row(static_cast<Index>(q.v))), q.v);
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const auto it = std::find_if(cand.begin(), cand.end(), [&](const auto& c) { return c.second == q.v; });
    ranks.push_back(static_cast<std::size_t>(it - cand.begin()) + 1);
  }
  return ranks;
}

MetricsRecord link_rank(const Matrix& emb, const Graph& g, const LinkRankOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ranks = link_ranks(emb, g, opt);
  MetricsRecord rec;
  rec.task = "link_prediction";
  const auto q = static_cast<double>(ranks.size());
  double mrr = 0;
  for (std::size_t r : ranks) mrr += 1.0 / static_cast<double>(r);
  for (int k : opt.ks) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [&](std::size_t r) { return r <= static_cast<std::size_t>(k); });
    rec.metrics.emplace_back("hits@" + std::to_string(k), static_cast<double>(hits) / q);
  }
  rec.metrics.emplace_back("mrr", mrr / q);
  rec.seed = opt.seed;
  rec.tags = {{"part", opt.part == SplitPart::val ? "val" : "test"},
              {"split", "edge-split seed=" + std::to_string(g.edge_split()->seed)},
              {"queries", std::to_string(ranks.size())}};
  if (g.n_nodes() > opt.max_candidates)
    rec.tags.emplace_back("candidate_pool", "sampled " + std::to_string(opt.max_candidates) + " of " +
                                                std::to_string(g.n_nodes()) + " nodes");
  rec.wall_time = seconds_since(t0);
  return rec;
}

// ---- experiments --------------------------------------------------------------

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::full, Variant::wo_reg, Variant::wo_gan, Variant::wo_ssl, Variant::wo_gcl, Variant::wo_bpr})
    if (variant_name(v) == name) return v;
  throw ConfigError("unknown ablation variant '" + name + "' (full, wo_reg, wo_gan, wo_ssl, wo_gcl, wo_bpr)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::wo_reg: return "wo_reg";
    case Variant::wo_gan: return "wo_gan";
    case Variant::wo_ssl: return "wo_ssl";
    case Variant::wo_gcl: return "wo_gcl";
    case Variant::wo_bpr: return "wo_bpr";
  }
  return "full";
}

TrainConfig apply_variant(TrainConfig cfg, Variant v) {
  switch (v) {
    case Variant::full: break;
    case Variant::wo_reg:
      cfg.lambda_cnt = 0.0;
      cfg.lambda_new = 0.0;
      break;
    case Variant::wo_gan:
      // Simple-GCL: two random dropout views, no generator or discriminator.
      cfg.n_g = 0;
      cfg.n_d = 0;
      cfg.gcl_view = "dropout";
      break;
    case Variant::wo_ssl: cfg.n_e = 0; break;
    case Variant::wo_gcl: cfg.lambda_gcl = 0.0; break;
    case Variant::wo_bpr: cfg.lambda_bpr = 0.0; break;
  }
  return cfg;
}

Task infer_task(const Graph& g) {
  if (g.edge_split()) return Task::link_prediction;
  if (g.labels() && g.node_split()) return Task::node_classification;
  throw ConfigError("dataset has neither an edge split nor labels with a node split; nothing to evaluate");
}

std::string primary_metric(Task task) { return task == Task::link_prediction ? "mrr" : "f1"; }

ExperimentOutcome run_experiment(const Graph& g, const TrainConfig& cfg, const ExperimentOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Task task = infer_task(g);
  Evaluator eval;
  if (task == Task::node_classification) {
    if (!g.node_split()->val.empty()) {
      ProbeOptions p = opt.probe;
      eval = [&g, p](const Matrix& emb) { return linear_probe(emb, g, 1, p, SplitPart::val).get("f1"); };
    }
  } else if (!g.edge_split()->val.empty()) {
    LinkRankOptions l = opt.link;
    l.part = SplitPart::val;
    eval = [&g, l](const Matrix& emb) { return link_rank(emb, g, l).get("mrr"); };
  }

  Trainer trainer(g, cfg);
  ExperimentOutcome out;
  out.train = trainer.train(eval, opt.checkpoint_dir);
  out.candidates = trainer.candidates();
  out.generator = trainer.generator();

  if (task == Task::node_classification) {
    out.record = linear_probe(out.train.embeddings, g, opt.probe_inits, opt.probe, SplitPart::test);
  } else {
    LinkRankOptions l = opt.link;
    l.part = SplitPart::test;
    out.record = link_rank(out.train.embeddings, g, l);
  }
  out.record.seed = cfg.seed;
  out.record.config_hash = config_hash(cfg);
  out.record.tags.emplace_back("iterations", std::to_string(out.train.iterations));
  out.record.tags.emplace_back("early_stopped", out.train.early_stopped ? "true" : "false");
  out.record.tags.emplace_back("best_iter", std::to_string(out.train.best_iter));
  out.record.wall_time = seconds_since(t0);
  return out;
}

MetricsRecord run_ablation(Variant variant, const Graph& g, const TrainConfig& cfg, const ExperimentOptions& opt) {
  MetricsRecord rec = run_experiment(g, apply_variant(cfg, variant), opt).record;
  rec.tags.insert(rec.tags.begin(), {"variant", variant_name(variant)});
  return rec;
}

std::vector<CurvePoint> edge_replacement_experiment(const Graph& g, const std::vector<double>& rates,
                                                    const TrainConfig& cfg, const ExperimentOptions& opt) {
  const std::string metric = primary_metric(infer_task(g));
  std::vector<CurvePoint> curve;
  for (double r : rates) {
    require(r >= 0.0 && r < 1.0, "edge replacement rate must lie in [0, 1)");
    TrainConfig c = apply_variant(cfg, Variant::wo_gan);
    c.gcl_view = "replace";
    c.replace_rate = r;
    curve.push_back({r, run_experiment(g, c, opt).record.get(metric)});
    log::info("replacement rate " + std::to_string(r) + ": " + metric + " " + std::to_string(curve.back().value));
  }
  return curve;
}

std::string curve_table(const std::vector<CurvePoint>& curve, const std::string& value_name) {
  std::ostringstream os;
  os.precision(6);
  os << "rate\t" << value_name << '\n';
  for (const auto& p : curve) os << p.rate << '\t' << p.value << '\n';
  return os.str();
}

std::vector<SweepRow> sweep(const Graph& g, const TrainConfig& base, const std::string& key,
                            const std::vector<std::string>& values, const ExperimentOptions& opt) {
  const std::string metric = primary_metric(infer_task(g));
  const double reference = run_experiment(g, base, opt).record.get(metric);
  const std::string base_text = to_text(base);
  std::vector<SweepRow> rows;
  for (const auto& value : values) {
    TrainConfig c = base;
    set_config_value(c, key, value);
    validate(c);
    const double m = to_text(c) == base_text ? reference : run_experiment(g, c, opt).record.get(metric);
    rows.push_back({value, m, reference, reference > 0 ? m / reference : kNaN});
  }
  return rows;
}

// ---- degree profile -------------------------------------------------------------

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "spearman: length mismatch");
  if (x.size() < 2) return kNaN;
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

DegreeProfile new_edge_degree_profile(const Graph& train_graph, const GeneratorParams& gen, std::size_t n_buckets) {
  require(gen.support != nullptr, "degree profile: generator has no support");
  const ViewSupport& s = *gen.support;
  std::vector<Edge> pairs(s.pairs.begin() + static_cast<std::ptrdiff_t>(s.n_existing), s.pairs.end());
  std::vector<double> mass(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    mass[i] = expected_edge_probability(gen.w(static_cast<Index>(s.n_existing + i), 0), gen.tau_g);
  return profile_from_pairs(train_graph, pairs, mass, n_buckets);
}

DegreeProfile random_edge_profile(const Graph& train_graph, std::size_t n_new, std::uint64_t seed,
                                  std::size_t n_buckets) {
  const std::size_t n = train_graph.n_nodes();
  const std::size_t total = n * (n - 1) / 2;
  require(n_new <= total - train_graph.n_edges(), "random_edge_profile: more edges requested than non-edges exist");
  Rng rng(RngStreams::derive_seed(seed, "random-edges"));
  std::unordered_set<std::uint64_t> seen;
  std::vector<Edge> pairs;
  while (pairs.size() < n_new) {
    const auto a = static_cast<NodeId>(uniform_index(rng, n));
    const auto b = static_cast<NodeId>(uniform_index(rng, n));
    if (a == b || train_graph.has_edge(a, b) || !seen.insert(pair_key(a, b)).second) continue;
    pairs.push_back({std::min(a, b), std::max(a, b)});
  }
  return profile_from_pairs(train_graph, pairs, std::vector<double>(pairs.size(), 1.0), n_buckets);
}

}  // namespace gacn
