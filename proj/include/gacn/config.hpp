#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gacn {

// Hyperparameters and run settings. Key names in config files and on the
// command line match the field names exactly.
struct TrainConfig {
  double lr = 1e-3;
  int dim = 128;
  int layers = 2;
  double tau_g = 1e-4;
  double tau_f = 0.5;
  double lambda_g = 0.5;
  double lambda_cnt = 1.0;
  double lambda_new = 0.5;
  double lambda_gcl = 1.0;
  double lambda_bpr = 1e-4;
  double gamma = 0.75;
  double dropout_keep = 0.5;
  int n_g = 1;
  int n_d = 1;
  int n_e = 1;
  int max_iters = 5000;
  int patience = 10;
  int eval_every = 50;
  std::uint64_t seed = 0;
  int negative_pool = 4096;
  int large_graph_threshold = 20000;
  int views_per_d_step = 4;
  int top_k = 2000;
  int candidate_cap_factor = 50;
  int mlp_layers = 2;
  int mlp_hidden = 0;  // 0 means 2 * dim
  double init_std = 0.1;
  int triples_per_step = 0;  // 0 means one per training edge
  std::string gcl_view = "generator";  // generator | dropout | replace
  double replace_rate = 0.0;
  bool d_step_updates_encoder = false;
  bool adversarial = true;
  std::string bpr_source = "clean";  // clean | dropout
  double degree_floor = 0.0;
  bool restore_best = true;
};

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<std::string(const TrainConfig&)> get;
  // Throws ConfigError on a malformed value.
  std::function<void(TrainConfig&, const std::string&)> set;
};

const std::vector<ConfigKey>& config_keys();

// Throws ConfigError naming the key when it is unknown.
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const TrainConfig& cfg, const std::string& key);

// Flat "key=value" lines; blank lines and '#' comments ignored. Starts from `base`.
TrainConfig parse_config(const std::string& text, const TrainConfig& base = {}, const std::string& source = "config");
TrainConfig load_config_file(const std::string& path, const TrainConfig& base = {});
std::string to_text(const TrainConfig& cfg);
std::string config_hash(const TrainConfig& cfg);

// Throws ConfigError describing the first invalid field.
void validate(const TrainConfig& cfg);

}  // namespace gacn
