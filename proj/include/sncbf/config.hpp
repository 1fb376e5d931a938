#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "sncbf/scenario.hpp"

namespace sncbf {

// Line-oriented `key = value` text. `#` starts a comment, keys are dotted
// lowercase words, values are scalars or whitespace/comma separated lists.
// Unknown and duplicate keys are configuration errors; typos must not be
// silently ignored.
class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text);
  static ConfigMap parse_file(const std::string& path);

  bool has(const std::string& key) const;

  // Getters fall back to the default when the key is absent and throw
  // ConfigError on a malformed value. Every lookup, hit or miss, marks the
  // key as recognized; unused() then reports the keys nobody asked about.
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  uint64_t get_u64(const std::string& key, uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  Vec2 get_vec2(const std::string& key, const Vec2& def) const;
  std::vector<int> get_ints(const std::string& key,
                            const std::vector<int>& def) const;
  std::vector<uint64_t> get_u64s(const std::string& key,
                                 const std::vector<uint64_t>& def) const;
  std::vector<std::string> get_strings(
      const std::string& key, const std::vector<std::string>& def) const;

  std::vector<std::string> unused() const;

 private:
  const std::string* find(const std::string& key) const;

  std::vector<std::pair<std::string, std::string>> entries_;
  mutable std::set<std::string> recognized_;
};

// Everything the four subcommands need, one section per stage. Defaults are
// the desk-scale run: 100 demonstrations, densities [6, 24, 60], 100
// episodes per cell, 3 seeds.
struct ExperimentConfig {
  sim::Scenario scenario;  // training scenario; obstacle_count is the
                           // training density

  struct Train {
    int demos = 100;
    int iterations = 2000;
    int batch_safe = 128;
    int batch_unsafe = 32;
    int batch_pairs = 96;
    double lr = 1e-3;
    double gamma = 0.01;
    double kappa = 0.1;
    double theta = 0.05;
    int k = 5;
    int boundary_samples = 100;
    double jitter_sigma = 0.2;
    int refine_rounds = 10;
    int refine_iterations = 500;
    double refine_tol = 1e-3;
    int best_of_controls = 0;
    int ensemble = 1;
    uint64_t seed = 1;
    int label_horizon = 5;
    double sensing_range = 5.0;
    double holdout_fraction = 0.1;
    int nominal_l = 64;   // candidate count in the demonstration nominal
    double noise = 0.1;   // exploration noise fraction on demo controls
    bool nonseq = false;  // also train the pooled single-step baseline
  } train;

  struct Dyn {
    int transitions = 8000;
    int iterations = 3000;
    int batch = 256;
    double lr = 1e-3;
    int hidden = 64;
  } dyn;

  struct Bench {
    std::vector<std::string> methods = {"sncbf", "spfm", "gpfm"};
    std::vector<int> densities = {6, 24, 60};
    int episodes = 100;
    std::vector<uint64_t> seeds = {1, 2, 3};
    int l = 64;
    double sensing_range = 5.0;
    double b = 0.5;
    bool inject_nominal = false;
    double ensemble_variance = 0.05;
    bool ensemble_require_all = false;
    int smpc_samples = 10;
    int smpc_depth = 3;
    double smpc_sigma = 0.2;
    int smpc_nominal_l = 16;
    std::string model_dir;  // empty: <out>/models
  } bench;

  struct Decomp {
    int train_density = 6;
    int rollouts = 8;
    int horizon = 200;
    std::vector<int> densities = {6, 12, 24, 48};
    int eval_episodes = 8;
    int iterations = 1500;
    int batch = 128;
    double lr = 1e-3;
    double holdout_fraction = 0.1;
    std::vector<uint64_t> seeds = {1, 2, 3};
  } decomp;

  struct Replay {
    std::string trajectory;  // recorded episode CSV
    std::string model;       // barrier container; empty: <models>/sncbf_m0.sncb
    double pitch = 0.1;
    std::vector<int> frames;  // empty: four frames spread over the episode
    long max_cells = 4000000;
    double sensing_range = 5.0;
    double b = 0.5;
  } replay;

  // ConfigError on out-of-range values, an empty seed list, or an
  // unregistered method name.
  void validate() const;
};

// Reads and validates a config file; `seed_offset` shifts the scenario seed,
// the training seed, and every bench/decomp seed so disjoint runs are one
// flag away. Unknown keys are a ConfigError.
ExperimentConfig load_experiment_config(const std::string& path,
                                        uint64_t seed_offset = 0);
ExperimentConfig experiment_config_from(const ConfigMap& map,
                                        uint64_t seed_offset = 0);

// Registered controller names, the valid values for bench.methods.
const std::vector<std::string>& registered_methods();

}  // namespace sncbf
