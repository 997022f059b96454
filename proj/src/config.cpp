#include "gacn/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <type_traits>

#include "gacn/error.hpp"
#include "gacn/text.hpp"

namespace gacn {

namespace {

std::string format(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <class T>
ConfigKey make_key(const char* name, T TrainConfig::*member, const char* help) {
  ConfigKey k;
  k.name = name;
  k.help = help;
  k.get = [member](const TrainConfig& c) -> std::string {
    if constexpr (std::is_same_v<T, bool>) {
      return c.*member ? "true" : "false";
    } else if constexpr (std::is_same_v<T, std::string>) {
      return c.*member;
    } else if constexpr (std::is_floating_point_v<T>) {
      return format(c.*member);
    } else {
      return std::to_string(c.*member);
    }
  };
  k.set = [member, name = std::string(name)](TrainConfig& c, const std::string& raw) {
    const std::string v = std::string(text::trim(raw));
    auto bad = [&]() { return ConfigError("config key '" + name + "': bad value '" + raw + "'"); };
    if constexpr (std::is_same_v<T, bool>) {
      if (v == "true" || v == "1") {
        c.*member = true;
      } else if (v == "false" || v == "0") {
        c.*member = false;
      } else {
        throw bad();
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      c.*member = v;
    } else {
      T out{};
      const char* first = v.data();
      const char* last = v.data() + v.size();
      auto [ptr, ec] = std::from_chars(first, last, out);
      if (ec != std::errc() || ptr != last) throw bad();
      if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(out)) throw bad();
      }
      c.*member = out;
    }
  };
  return k;
}

std::vector<ConfigKey> build_keys() {
  return {
      make_key("lr", &TrainConfig::lr, "Adam learning rate"),
      make_key("dim", &TrainConfig::dim, "embedding dimension D"),
      make_key("layers", &TrainConfig::layers, "propagation layers L"),
      make_key("tau_g", &TrainConfig::tau_g, "relaxation temperature of generated edges"),
      make_key("tau_f", &TrainConfig::tau_f, "contrastive temperature"),
      make_key("lambda_g", &TrainConfig::lambda_g, "target edge ratio of generated views"),
      make_key("lambda_cnt", &TrainConfig::lambda_cnt, "weight of the edge count loss"),
      make_key("lambda_new", &TrainConfig::lambda_new, "weight of the new edge loss"),
      make_key("lambda_gcl", &TrainConfig::lambda_gcl, "weight of the contrastive loss"),
      make_key("lambda_bpr", &TrainConfig::lambda_bpr, "weight of the BPR loss"),
      make_key("gamma", &TrainConfig::gamma, "initial share of generator mass on candidates"),
      make_key("dropout_keep", &TrainConfig::dropout_keep, "edge keep rate of dropout views"),
      make_key("n_g", &TrainConfig::n_g, "G-steps per iteration"),
      make_key("n_d", &TrainConfig::n_d, "D-steps per iteration"),
      make_key("n_e", &TrainConfig::n_e, "E-steps per iteration"),
      make_key("max_iters", &TrainConfig::max_iters, "outer iteration budget"),
      make_key("patience", &TrainConfig::patience, "evaluations without improvement before stopping"),
      make_key("eval_every", &TrainConfig::eval_every, "iterations between validation evaluations"),
      make_key("seed", &TrainConfig::seed, "master seed"),
      make_key("negative_pool", &TrainConfig::negative_pool, "sampled contrastive pool on large graphs"),
      make_key("large_graph_threshold", &TrainConfig::large_graph_threshold,
               "node count above which the contrastive pool is sampled"),
      make_key("views_per_d_step", &TrainConfig::views_per_d_step, "views of each class per D-step"),
      make_key("top_k", &TrainConfig::top_k, "high-degree nodes spanning the candidate set"),
      make_key("candidate_cap_factor", &TrainConfig::candidate_cap_factor, "candidate cap as a multiple of |E|"),
      make_key("mlp_layers", &TrainConfig::mlp_layers, "discriminator layers"),
      make_key("mlp_hidden", &TrainConfig::mlp_hidden, "discriminator hidden width (0 = 2 dim)"),
      make_key("init_std", &TrainConfig::init_std, "standard deviation of the initial table"),
      make_key("triples_per_step", &TrainConfig::triples_per_step, "BPR triples per E-step (0 = |E_train|)"),
      make_key("gcl_view", &TrainConfig::gcl_view, "second contrastive view: generator, dropout or replace"),
      make_key("replace_rate", &TrainConfig::replace_rate, "share of kept edges swapped for random non-edges"),
      make_key("d_step_updates_encoder", &TrainConfig::d_step_updates_encoder, "D-steps also update the table"),
      make_key("adversarial", &TrainConfig::adversarial, "include the adversarial term in G-steps"),
      make_key("bpr_source", &TrainConfig::bpr_source, "BPR embeddings: clean or dropout"),
      make_key("degree_floor", &TrainConfig::degree_floor, "lower bound on weighted degrees of relaxed views"),
      make_key("restore_best", &TrainConfig::restore_best, "return the best-validation table"),
  };
}

const ConfigKey& find_key(const std::string& key) {
  for (const ConfigKey& k : config_keys())
    if (k.name == key) return k;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  find_key(key).set(cfg, value);
}

std::string get_config_value(const TrainConfig& cfg, const std::string& key) { return find_key(key).get(cfg); }

TrainConfig parse_config(const std::string& contents, const TrainConfig& base, const std::string& source) {
  TrainConfig cfg = base;
  std::istringstream in(contents);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, no, "expected key=value");
    const std::string key(text::trim(t.substr(0, eq)));
    try {
      set_config_value(cfg, key, std::string(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(no) + ": " + e.what());
    }
  }
  return cfg;
}

TrainConfig load_config_file(const std::string& path, const TrainConfig& base) {
  return parse_config(text::read_file(path), base, path);
}

std::string to_text(const TrainConfig& cfg) {
  std::string out;
  for (const ConfigKey& k : config_keys()) out += k.name + "=" + k.get(cfg) + "\n";
  return out;
}

std::string config_hash(const TrainConfig& cfg) { return text::fnv1a_hex(to_text(cfg)); }

void validate(const TrainConfig& c) {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  check(c.lr > 0, "lr must be positive");
  check(c.dim >= 1, "dim must be >= 1");
  check(c.layers >= 0, "layers must be >= 0");
  check(c.tau_g > 0 && c.tau_g <= 1, "tau_g must lie in (0, 1]");
  check(c.tau_f > 0, "tau_f must be positive");
  check(c.lambda_g >= 0 && c.lambda_cnt >= 0 && c.lambda_new >= 0 && c.lambda_gcl >= 0 && c.lambda_bpr >= 0,
        "lambda values must be >= 0");
  check(c.gamma >= 0 && c.gamma <= 1, "gamma must lie in [0, 1]");
  check(c.dropout_keep > 0 && c.dropout_keep <= 1, "dropout_keep must lie in (0, 1]");
  check(c.n_g >= 0 && c.n_d >= 0 && c.n_e >= 0, "step counts must be >= 0");
  check(c.max_iters >= 0, "max_iters must be >= 0");
  check(c.patience >= 1, "patience must be >= 1");
  check(c.eval_every >= 1, "eval_every must be >= 1");
  check(c.negative_pool >= 1, "negative_pool must be >= 1");
  check(c.large_graph_threshold >= 1, "large_graph_threshold must be >= 1");
  check(c.views_per_d_step >= 1, "views_per_d_step must be >= 1");
  check(c.top_k >= 1, "top_k must be >= 1");
  check(c.candidate_cap_factor >= 1, "candidate_cap_factor must be >= 1");
  check(c.mlp_layers >= 1, "mlp_layers must be >= 1");
  check(c.mlp_hidden >= 0, "mlp_hidden must be >= 0");
  check(c.init_std > 0, "init_std must be positive");
  check(c.triples_per_step >= 0, "triples_per_step must be >= 0");
  check(c.gcl_view == "generator" || c.gcl_view == "dropout" || c.gcl_view == "replace",
        "gcl_view must be generator, dropout or replace");
  check(c.replace_rate >= 0 && c.replace_rate < 1, "replace_rate must lie in [0, 1)");
  check(c.bpr_source == "clean" || c.bpr_source == "dropout", "bpr_source must be clean or dropout");
  check(c.degree_floor >= 0, "degree_floor must be >= 0");
}

}  // namespace gacn
