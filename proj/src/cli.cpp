#include "gacn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gacn/config.hpp"
#include "gacn/dataset.hpp"
#include "gacn/error.hpp"
#include "gacn/eval.hpp"
#include "gacn/log.hpp"
#include "gacn/text.hpp"
#include "gacn/trainer.hpp"

#ifndef GACN_BUILD_ID
#define GACN_BUILD_ID "unknown"
#endif

namespace gacn {

namespace fs = std::filesystem;

namespace {

using Json = nlohmann::ordered_json;
constexpr const char* kRunHeader = "gacn-run 1";

// Usage problems detected after CLI11 parsing (exit code 2).
struct UsageError : Error {
  using Error::Error;
};

struct ConfigFlags {
  std::string file;
  std::string variant = "full";
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f, bool with_variant = true) {
  cmd->add_option("--config", f.file, "Config file of 'key = value' lines");
  if (with_variant) cmd->add_option("--variant", f.variant, "Ablation variant: full, wo_reg, wo_gan, wo_ssl, wo_gcl, wo_bpr");
  for (const auto& key : config_keys()) {
    auto* opt = cmd->add_option("--" + key.name, f.values[key.name], key.help)->type_name("VALUE")->group("Config")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    f.options.emplace_back(key.name, opt);
  }
}

// Defaults, then the config file, then flags.
TrainConfig resolve_config(const ConfigFlags& f) {
  TrainConfig cfg = f.file.empty() ? TrainConfig{} : load_config_file(f.file);
  for (const auto& [name, opt] : f.options)
    if (opt->count() > 0) set_config_value(cfg, name, f.values.at(name));
  validate(cfg);
  return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto f : text::split_fields(s)) out.emplace_back(f);
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& t : split_list(s)) {
    if (!text::is_unsigned_integer(t)) throw UsageError("seed '" + t + "' is not a non-negative integer");
    out.push_back(std::stoull(t));
  }
  if (out.empty()) throw UsageError("no seeds given");
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& t : split_list(s)) out.push_back(text::parse_double(t, what, 0));
  return out;
}

std::string fixed(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// ---- run directories ----

struct RunInfo {
  std::string dir;
  std::string dataset;
  std::string fingerprint;
  std::string variant;
  TrainConfig config;
};

std::string run_manifest(const RunInfo& r) {
  std::ostringstream m;
  m << kRunHeader << "\n"
    << "build " << GACN_BUILD_ID << "\n"
    << "seed " << r.config.seed << "\n"
    << "variant " << r.variant << "\n"
    << "dataset " << r.dataset << "\n"
    << "fingerprint " << r.fingerprint << "\n"
    << "config_hash " << config_hash(r.config) << "\n"
    << "output " << r.dir << "\n";
  std::istringstream cfg(to_text(r.config));
  for (std::string line; std::getline(cfg, line);)
    if (!text::trim(line).empty()) m << "config " << line << "\n";
  return m.str();
}

RunInfo read_run(const std::string& dir) {
  const std::string path = (fs::path(dir) / "manifest.txt").string();
  if (!fs::exists(path)) throw Error(dir + ": not a run directory (no manifest.txt)");
  std::istringstream in(text::read_file(path));
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != kRunHeader) throw ParseError(path, 1, "bad run manifest header");
  RunInfo r;
  r.dir = dir;
  std::string cfg_text;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    const auto t = std::string(text::trim(line));
    const auto sp = t.find(' ');
    if (sp == std::string::npos) continue;
    const std::string key = t.substr(0, sp), value = t.substr(sp + 1);
    if (key == "dataset") r.dataset = value;
    else if (key == "fingerprint") r.fingerprint = value;
    else if (key == "variant") r.variant = value;
    else if (key == "config") cfg_text += value + "\n";
  }
  r.config = parse_config(cfg_text, {}, path);
  return r;
}

Dataset load_run_dataset(const RunInfo& r) {
  Dataset ds = load_dataset(r.dataset);
  if (dataset_fingerprint(ds.graph) != r.fingerprint)
    throw Error(r.dataset + ": dataset fingerprint differs from the one recorded in " + r.dir);
  return ds;
}

void write_embeddings(const std::string& path, const Matrix& emb) {
  std::ostringstream os;
  diff::write_matrix(os, emb);
  text::write_file_atomic(path, os.str());
}

Matrix read_embeddings(const std::string& run_dir) {
  const std::string path = (fs::path(run_dir) / "embeddings.txt").string();
  if (!fs::exists(path)) throw Error(run_dir + ": run has no embeddings.txt");
  std::ifstream in(path);
  return diff::read_matrix(in, path);
}

Json record_json(const MetricsRecord& r) { return Json::parse(r.to_json()); }

// ---- subcommands ----

struct IngestArgs {
  IngestRequest req;
  std::string out;
  std::string split = "auto";
  std::string ratios = "0.8,0.1,0.1";
  bool string_ids = false;
};

int run_ingest(IngestArgs& a, std::ostream& out) {
  if (a.string_ids) a.req.options.numeric_ids = false;
  if (a.split == "auto") a.req.split = SplitKind::automatic;
  else if (a.split == "edges") a.req.split = SplitKind::edges;
  else if (a.split == "nodes") a.req.split = SplitKind::nodes;
  else if (a.split == "none") a.req.split = SplitKind::none;
  else throw UsageError("--split must be auto, edges, nodes or none");
  const auto r = parse_doubles(a.ratios, "--ratios");
  if (r.size() != 3) throw UsageError("--ratios needs three comma-separated fractions");
  a.req.edge_ratios = {r[0], r[1], r[2]};
  if (a.out.empty())
    a.out = (fs::path(output_root()) / "datasets" / fs::path(a.req.edges).stem()).string();

  Dataset ds = ingest(a.req);
  save_dataset(ds, a.out);
  const Graph& g = ds.graph;
  Json j;
  j["dataset"] = fs::absolute(a.out).string();
  j["fingerprint"] = dataset_fingerprint(g);
  j["n_nodes"] = g.n_nodes();
  j["n_edges"] = g.n_edges();
  j["n_classes"] = g.n_classes();
  j["features"] = g.features() ? g.features()->cols() : 0;
  j["split"] = g.edge_split() ? "edges" : g.node_split() ? "nodes" : "none";
  j["self_loops_dropped"] = ds.stats.self_loops_dropped;
  j["duplicates_merged"] = ds.stats.duplicates_merged;
  j["edges_dropped_unlabelled"] = ds.edges_dropped_unlabelled;
  out << j.dump() << '\n';
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string run_dir;
  std::size_t probe_inits = 10;
  ConfigFlags flags;
};

int run_train(TrainArgs& a, std::ostream& out) {
  const Variant variant = parse_variant(a.flags.variant);
  const TrainConfig cfg = apply_variant(resolve_config(a.flags), variant);
  Dataset ds = load_dataset(a.data);

  RunInfo info;
  info.dataset = fs::absolute(a.data).lexically_normal().string();
  info.fingerprint = dataset_fingerprint(ds.graph);
  info.variant = variant_name(variant);
  info.config = cfg;
  if (a.run_dir.empty()) {
    a.run_dir = (fs::path(output_root()) /
                 (fs::path(info.dataset).filename().string() + "-" + info.variant + "-seed" + std::to_string(cfg.seed) +
                  "-" + config_hash(cfg).substr(0, 8)))
                    .string();
  }
  info.dir = fs::absolute(a.run_dir).lexically_normal().string();
  if (fs::exists(fs::path(a.run_dir) / "manifest.txt"))
    throw Error(a.run_dir + ": run directory already has a manifest; choose another --run-dir");
  fs::create_directories(a.run_dir);
  text::write_file_atomic((fs::path(a.run_dir) / "manifest.txt").string(), run_manifest(info));
  text::write_file_atomic((fs::path(a.run_dir) / "config.txt").string(), to_text(cfg));

  ExperimentOptions opt;
  opt.probe_inits = a.probe_inits;
  opt.checkpoint_dir = (fs::path(a.run_dir) / "checkpoint").string();
  ExperimentOutcome o = run_experiment(ds.graph, cfg, opt);
  o.record.tags.insert(o.record.tags.begin(), {"variant", info.variant});

  text::write_file_atomic((fs::path(a.run_dir) / "history.jsonl").string(), history_to_jsonl(o.train.history));
  write_embeddings((fs::path(a.run_dir) / "embeddings.txt").string(), o.train.embeddings);
  append_jsonl((fs::path(a.run_dir) / "metrics.jsonl").string(), o.record);

  Json j;
  j["run"] = info.dir;
  j["iterations"] = o.train.iterations;
  j["early_stopped"] = o.train.early_stopped;
  j["record"] = record_json(o.record);
  out << j.dump() << '\n';
  return 0;
}

struct EvalArgs {
  std::string run;
  std::string task = "auto";
  std::size_t inits = 10;
  std::string ks = "20,50,100";
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const RunInfo info = read_run(a.run);
  const Matrix emb = read_embeddings(a.run);
  const Dataset ds = load_run_dataset(info);
  Task task;
  if (a.task == "auto") task = infer_task(ds.graph);
  else if (a.task == "node") task = Task::node_classification;
  else if (a.task == "link") task = Task::link_prediction;
  else throw UsageError("--task must be auto, node or link");

  MetricsRecord rec;
  if (task == Task::node_classification) {
    ProbeOptions p;
    p.seed = a.seed;
    rec = linear_probe(emb, ds.graph, a.inits, p);
  } else {
    LinkRankOptions l;
    l.ks.clear();
    for (double k : parse_doubles(a.ks, "--ks")) l.ks.push_back(static_cast<int>(k));
    l.seed = a.seed;
    rec = link_rank(emb, ds.graph, l);
  }
  rec.config_hash = config_hash(info.config);
  rec.tags.insert(rec.tags.begin(), {"variant", info.variant});
  rec.tags.emplace_back("run", info.dir);
  append_jsonl((fs::path(a.run) / "eval.jsonl").string(), rec);
  out << rec.to_json() << '\n';
  return 0;
}

struct AblateArgs {
  std::string data;
  std::string variants = "full,wo_reg,wo_gan,wo_ssl,wo_gcl,wo_bpr";
  std::string seeds = "0";
  std::string replacement_rates;
  std::string out;
  std::size_t probe_inits = 10;
  ConfigFlags flags;
};

int run_ablate(AblateArgs& a, std::ostream& out) {
  const TrainConfig base = resolve_config(a.flags);
  const Dataset ds = load_dataset(a.data);
  const auto seeds = parse_seeds(a.seeds);
  ExperimentOptions opt;
  opt.probe_inits = a.probe_inits;

  if (!a.replacement_rates.empty()) {
    const auto rates = parse_doubles(a.replacement_rates, "--replacement-rates");
    std::vector<CurvePoint> mean(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) mean[i].rate = rates[i];
    for (auto seed : seeds) {
      TrainConfig c = base;
      c.seed = seed;
      const auto curve = edge_replacement_experiment(ds.graph, rates, c, opt);
      for (std::size_t i = 0; i < curve.size(); ++i) mean[i].value += curve[i].value / static_cast<double>(seeds.size());
    }
    const std::string table = curve_table(mean, primary_metric(infer_task(ds.graph)));
    if (!a.out.empty()) text::write_file_atomic(a.out, table);
    out << table;
    return 0;
  }

  std::vector<Variant> variants;
  for (const auto& v : split_list(a.variants)) variants.push_back(parse_variant(v));
  for (Variant v : variants) {
    for (auto seed : seeds) {
      TrainConfig c = base;
      c.seed = seed;
      const MetricsRecord rec = run_ablation(v, ds.graph, c, opt);
      if (!a.out.empty()) append_jsonl(a.out, rec);
      out << rec.to_json() << '\n' << std::flush;
    }
  }
  return 0;
}

struct SweepArgs {
  std::string data;
  std::string key;
  std::string values;
  std::string seeds = "0";
  std::size_t probe_inits = 10;
  ConfigFlags flags;
};

int run_sweep(SweepArgs& a, std::ostream& out) {
  const TrainConfig base = resolve_config(a.flags);
  const Dataset ds = load_dataset(a.data);
  const auto values = split_list(a.values);
  if (values.empty()) throw UsageError("--values is empty");
  ExperimentOptions opt;
  opt.probe_inits = a.probe_inits;
  std::vector<double> metric(values.size(), 0.0), reference(values.size(), 0.0);
  for (auto seed : parse_seeds(a.seeds)) {
    TrainConfig c = base;
    c.seed = seed;
    const auto rows = sweep(ds.graph, c, a.key, values, opt);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      metric[i] += rows[i].metric;
      reference[i] += rows[i].reference;
    }
  }
  const std::string name = primary_metric(infer_task(ds.graph));
  out << a.key << '\t' << name << "\teta\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    // Ratio of seed sums, so a grid point equal to the base gives exactly 1.
    const double eta = reference[i] > 0 ? metric[i] / reference[i] : std::nan("");
    const double n = static_cast<double>(parse_seeds(a.seeds).size());
    out << values[i] << '\t' << fixed(metric[i] / n) << '\t' << fixed(eta) << '\n';
  }
  return 0;
}

int run_export(const std::string& run, const std::string& path, std::ostream& out) {
  const RunInfo info = read_run(run);
  const Matrix emb = read_embeddings(run);
  const Dataset ds = load_run_dataset(info);
  std::ostringstream os;
  os << std::setprecision(17);
  for (Index i = 0; i < emb.rows(); ++i) {
    os << ds.graph.original_id(static_cast<NodeId>(i));
    for (Index k = 0; k < emb.cols(); ++k) os << '\t' << emb(i, k);
    os << '\n';
  }
  if (path.empty()) out << os.str();
  else text::write_file_atomic(path, os.str());
  return 0;
}

struct ViewStatsArgs {
  std::string run;
  double threshold = 0.5;
  std::size_t buckets = 10;
  std::size_t baseline_seeds = 20;
};

int run_view_stats(const ViewStatsArgs& a, std::ostream& out) {
  const RunInfo info = read_run(a.run);
  const Dataset ds = load_run_dataset(info);
  const std::string path = (fs::path(a.run) / "checkpoint" / "generator.txt").string();
  std::ifstream in(path);
  if (!in) throw Error(a.run + ": run has no generator checkpoint");
  const GeneratorParams gen = load_generator(in, path);
  const Graph train = ds.graph.train_graph();
  if (gen.support->n_nodes != train.n_nodes()) throw Error(path + ": generator does not match the dataset");

  const ViewMass mass = expected_view_mass(gen);
  const DegreeProfile prof = new_edge_degree_profile(train, gen, a.buckets);

  diff::Tape tape;
  Rng rng(RngStreams::derive_seed(info.config.seed, "view-stats"));
  const RelaxedView view = sample_relaxed_view(tape, gen, rng);
  const ViewStats sampled = view_statistics(view, train, a.threshold, a.buckets);

  Json j;
  j["run"] = info.dir;
  j["edges_train"] = train.n_edges();
  j["candidates"] = gen.support->n_candidates();
  j["expected_mass"] = {{"existing", mass.existing}, {"candidate", mass.candidate}, {"total", mass.total()}};
  j["sampled_view"] = {{"edges", sampled.edges},
                       {"existing", sampled.existing},
                       {"new", sampled.new_edges},
                       {"new_by_bucket", sampled.new_by_bucket}};
  j["new_edge_mass_by_bucket"] = prof.bucket_mass;
  j["spearman_degree_vs_new_mass"] = std::isnan(prof.spearman) ? Json(nullptr) : Json(prof.spearman);

  const auto n_new = static_cast<std::size_t>(std::llround(prof.total_mass));
  if (n_new > 0 && a.baseline_seeds > 0) {
    double sum = 0.0, worst = 0.0;
    for (std::size_t s = 0; s < a.baseline_seeds; ++s) {
      const double rho = random_edge_profile(train, n_new, s, a.buckets).spearman;
      sum += rho;
      worst = std::max(worst, std::abs(rho));
    }
    j["random_baseline"] = {{"edges", n_new},
                            {"seeds", a.baseline_seeds},
                            {"mean_spearman", sum / static_cast<double>(a.baseline_seeds)},
                            {"max_abs_spearman", worst}};
  }
  out << j.dump() << '\n';
  return 0;
}

}  // namespace

std::string output_root() {
  const char* env = std::getenv("GACN_OUTPUT_ROOT");
  return env && *env ? env : "runs";
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GACN: graph contrastive learning with generated views"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");
  app.add_flag("-q,--quiet", quiet, "Errors only");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a canonical dataset directory from raw files");
  ingest_cmd->add_option("--edges", ingest_args.req.edges, "Edge list (u v per line)")->required();
  ingest_cmd->add_option("--labels", ingest_args.req.labels, "Node labels (node class per line)");
  ingest_cmd->add_option("--features", ingest_args.req.features, "Node features (node f1 ... fF per line)");
  ingest_cmd->add_option("--content", ingest_args.req.content, "LINQS content file (node f1 ... fF class)");
  ingest_cmd->add_flag("--string-ids", ingest_args.string_ids, "Accept non-integer node ids");
  ingest_cmd->add_option("--split", ingest_args.split, "auto, edges, nodes or none")->capture_default_str();
  ingest_cmd->add_option("--ratios", ingest_args.ratios, "Edge split train,val,test")->capture_default_str();
  ingest_cmd->add_option("--train-per-class", ingest_args.req.train_per_class)->capture_default_str();
  ingest_cmd->add_option("--val", ingest_args.req.n_val, "Validation nodes")->capture_default_str();
  ingest_cmd->add_option("--test", ingest_args.req.n_test, "Test nodes")->capture_default_str();
  ingest_cmd->add_option("--split-seed", ingest_args.req.split_seed)->capture_default_str();
  ingest_cmd->add_option("-o,--out", ingest_args.out, "Dataset directory (default $GACN_OUTPUT_ROOT/datasets/<name>)");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train on a dataset directory and write a run directory");
  train_cmd->add_option("--data", train_args.data, "Dataset directory")->required();
  train_cmd->add_option("--run-dir", train_args.run_dir, "Run directory (default under $GACN_OUTPUT_ROOT)");
  train_cmd->add_option("--probe-inits", train_args.probe_inits, "Classifier initialisations for the test probe")
      ->capture_default_str();
  add_config_flags(train_cmd, train_args.flags);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score the embeddings of a run directory");
  eval_cmd->add_option("--run", eval_args.run, "Run directory")->required();
  eval_cmd->add_option("--task", eval_args.task, "auto, node or link")->capture_default_str();
  eval_cmd->add_option("--inits", eval_args.inits, "Probe initialisations")->capture_default_str();
  eval_cmd->add_option("--ks", eval_args.ks, "Hit-rate cutoffs")->capture_default_str();
  eval_cmd->add_option("--seed", eval_args.seed, "Probe / candidate-pool seed")->capture_default_str();

  AblateArgs ablate_args;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train and score ablation variants, or the edge-replacement curve");
  ablate_cmd->add_option("--data", ablate_args.data, "Dataset directory")->required();
  ablate_cmd->add_option("--variants", ablate_args.variants, "Comma-separated variants")->capture_default_str();
  ablate_cmd->add_option("--seeds", ablate_args.seeds, "Comma-separated seeds")->capture_default_str();
  ablate_cmd->add_option("--replacement-rates", ablate_args.replacement_rates,
                         "Run the edge-replacement curve over these rates instead");
  ablate_cmd->add_option("-o,--out", ablate_args.out, "Also append records (or the curve table) here");
  ablate_cmd->add_option("--probe-inits", ablate_args.probe_inits)->capture_default_str();
  add_config_flags(ablate_cmd, ablate_args.flags, false);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Vary one config key; report the metric and eta per value");
  sweep_cmd->add_option("--data", sweep_args.data, "Dataset directory")->required();
  sweep_cmd->add_option("--key", sweep_args.key, "Config key to vary")->required();
  sweep_cmd->add_option("--values", sweep_args.values, "Comma-separated values")->required();
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "Comma-separated seeds")->capture_default_str();
  sweep_cmd->add_option("--probe-inits", sweep_args.probe_inits)->capture_default_str();
  add_config_flags(sweep_cmd, sweep_args.flags, false);

  std::string export_run, export_out;
  auto* export_cmd = app.add_subcommand("export-embeddings", "Write embeddings as 'original_id<TAB>values'");
  export_cmd->add_option("--run", export_run, "Run directory")->required();
  export_cmd->add_option("-o,--out", export_out, "Output file (default stdout)");

  ViewStatsArgs vs_args;
  auto* vs_cmd = app.add_subcommand("view-stats", "Generated-view statistics of a trained run");
  vs_cmd->add_option("--run", vs_args.run, "Run directory")->required();
  vs_cmd->add_option("--threshold", vs_args.threshold, "Edge threshold for the sampled view")->capture_default_str();
  vs_cmd->add_option("--buckets", vs_args.buckets, "Degree buckets")->capture_default_str();
  vs_cmd->add_option("--baseline-seeds", vs_args.baseline_seeds, "Random-edge baseline seeds")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  const log::Level saved = log::level();
  log::set_level(quiet ? log::Level::error : verbose ? log::Level::info : log::Level::warn);
  int code = 1;
  try {
    if (*ingest_cmd) code = run_ingest(ingest_args, out);
    else if (*train_cmd) code = run_train(train_args, out);
    else if (*eval_cmd) code = run_eval(eval_args, out);
    else if (*ablate_cmd) code = run_ablate(ablate_args, out);
    else if (*sweep_cmd) code = run_sweep(sweep_args, out);
    else if (*export_cmd) code = run_export(export_run, export_out, out);
    else if (*vs_cmd) code = run_view_stats(vs_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    code = 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = 1;
  }
  log::set_level(saved);
  return code;
}

}  // namespace gacn
