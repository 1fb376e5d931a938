#include "sncbf/config.hpp"

#include <algorithm>
#include <climits>
#include <cstdlib>
#include <sstream>

#include "sncbf/csv.hpp"
#include "sncbf/errors.hpp"

namespace sncbf {
namespace {

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& key, const std::string& tok) {
  const char* s = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    throw ConfigError("key '" + key + "': '" + tok + "' is not a number");
  return v;
}

long long parse_ll(const std::string& key, const std::string& tok) {
  const char* s = tok.c_str();
  char* end = nullptr;
  long long v = std::strtoll(s, &end, 10);
  if (end == s || *end != '\0')
    throw ConfigError("key '" + key + "': '" + tok + "' is not an integer");
  return v;
}

uint64_t parse_u64(const std::string& key, const std::string& tok) {
  const char* s = tok.c_str();
  if (*s == '-')
    throw ConfigError("key '" + key + "': '" + tok + "' must be non-negative");
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0')
    throw ConfigError("key '" + key + "': '" + tok + "' is not an integer");
  return v;
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string body = strip(line);
    if (body.empty()) continue;
    size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    std::string key = strip(body.substr(0, eq));
    std::string value = strip(body.substr(eq + 1));
    if (!valid_key(key))
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": bad key '" + key + "'");
    for (const auto& e : map.entries_)
      if (e.first == key)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": duplicate key '" + key + "'");
    map.entries_.emplace_back(std::move(key), std::move(value));
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  return parse(read_file(path));
}

const std::string* ConfigMap::find(const std::string& key) const {
  recognized_.insert(key);
  for (const auto& e : entries_)
    if (e.first == key) return &e.second;
  return nullptr;
}

bool ConfigMap::has(const std::string& key) const {
  return find(key) != nullptr;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& def) const {
  const std::string* v = find(key);
  return v ? *v : def;
}

double ConfigMap::get_double(const std::string& key, double def) const {
  const std::string* v = find(key);
  return v ? parse_double(key, *v) : def;
}

int ConfigMap::get_int(const std::string& key, int def) const {
  const std::string* v = find(key);
  if (!v) return def;
  long long x = parse_ll(key, *v);
  if (x < INT_MIN || x > INT_MAX)
    throw ConfigError("key '" + key + "': value out of range");
  return static_cast<int>(x);
}

uint64_t ConfigMap::get_u64(const std::string& key, uint64_t def) const {
  const std::string* v = find(key);
  return v ? parse_u64(key, *v) : def;
}

bool ConfigMap::get_bool(const std::string& key, bool def) const {
  const std::string* v = find(key);
  if (!v) return def;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("key '" + key + "': '" + *v + "' is not a boolean");
}

Vec2 ConfigMap::get_vec2(const std::string& key, const Vec2& def) const {
  const std::string* v = find(key);
  if (!v) return def;
  auto toks = split_list(*v);
  if (toks.size() != 2)
    throw ConfigError("key '" + key + "': expected two numbers");
  return {parse_double(key, toks[0]), parse_double(key, toks[1])};
}

std::vector<int> ConfigMap::get_ints(const std::string& key,
                                     const std::vector<int>& def) const {
  const std::string* v = find(key);
  if (!v) return def;
  std::vector<int> out;
  for (const auto& tok : split_list(*v)) {
    long long x = parse_ll(key, tok);
    if (x < INT_MIN || x > INT_MAX)
      throw ConfigError("key '" + key + "': value out of range");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

std::vector<uint64_t> ConfigMap::get_u64s(
    const std::string& key, const std::vector<uint64_t>& def) const {
  const std::string* v = find(key);
  if (!v) return def;
  std::vector<uint64_t> out;
  for (const auto& tok : split_list(*v)) out.push_back(parse_u64(key, tok));
  return out;
}

std::vector<std::string> ConfigMap::get_strings(
    const std::string& key, const std::vector<std::string>& def) const {
  const std::string* v = find(key);
  return v ? split_list(*v) : def;
}

std::vector<std::string> ConfigMap::unused() const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (!recognized_.count(e.first)) out.push_back(e.first);
  return out;
}

const std::vector<std::string>& registered_methods() {
  static const std::vector<std::string> names = {
      "sncbf", "sncbf-ensemble", "spfm",      "gpfm",
      "smpc",  "smpc-true",      "nonseq-cbf"};
  return names;
}

void ExperimentConfig::validate() const {
  const auto problems = scenario.validate();
  if (!problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ConfigError(msg);
  }
  auto positive = [](double v, const char* what) {
    if (!(v > 0))
      throw ConfigError(std::string(what) + " must be positive");
  };
  positive(train.demos, "train.demos");
  positive(train.gamma, "train.gamma");
  positive(train.kappa, "train.kappa");
  positive(train.theta, "train.theta");
  positive(train.k, "train.k");
  positive(train.ensemble, "train.ensemble");
  positive(train.batch_safe, "train.batch_safe");
  positive(train.batch_unsafe, "train.batch_unsafe");
  positive(train.batch_pairs, "train.batch_pairs");
  if (train.holdout_fraction <= 0 || train.holdout_fraction >= 1)
    throw ConfigError("train.holdout_fraction must lie in (0, 1)");
  positive(dyn.transitions, "dyn.transitions");
  positive(dyn.hidden, "dyn.hidden");
  positive(bench.episodes, "bench.episodes");
  positive(bench.l, "bench.l");
  positive(bench.b, "bench.b");
  if (bench.seeds.empty()) throw ConfigError("bench.seeds must not be empty");
  if (bench.densities.empty())
    throw ConfigError("bench.densities must not be empty");
  for (int d : bench.densities) positive(d, "bench.densities entries");
  if (bench.methods.empty())
    throw ConfigError("bench.methods must not be empty");
  const auto& known = registered_methods();
  for (const auto& m : bench.methods)
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw ConfigError("unknown method '" + m + "'");
  positive(decomp.train_density, "decomp.train_density");
  positive(decomp.rollouts, "decomp.rollouts");
  positive(decomp.horizon, "decomp.horizon");
  positive(decomp.eval_episodes, "decomp.eval_episodes");
  if (decomp.densities.empty())
    throw ConfigError("decomp.densities must not be empty");
  for (int d : decomp.densities) positive(d, "decomp.densities entries");
  if (decomp.seeds.empty())
    throw ConfigError("decomp.seeds must not be empty");
  positive(replay.pitch, "replay.pitch");
  positive(replay.max_cells, "replay.max_cells");
}

ExperimentConfig experiment_config_from(const ConfigMap& map,
                                        uint64_t seed_offset) {
  ExperimentConfig cfg;
  auto& sc = cfg.scenario;
  sc.arena_half_extent =
      map.get_double("scenario.arena_half_extent", sc.arena_half_extent);
  sc.obstacle_count = map.get_int("scenario.obstacle_count", sc.obstacle_count);
  try {
    sc.ego_dynamics = ego::parse_dyn_kind(map.get_string(
        "scenario.ego_dynamics", ego::to_string(sc.ego_dynamics)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  sc.ego_start = map.get_vec2("scenario.ego_start", sc.ego_start);
  sc.ego_goal = map.get_vec2("scenario.ego_goal", sc.ego_goal);
  sc.dt = map.get_double("scenario.dt", sc.dt);
  sc.max_steps = map.get_int("scenario.max_steps", sc.max_steps);
  sc.seed = map.get_u64("scenario.seed", sc.seed) + seed_offset;
  sc.collision_radius =
      map.get_double("scenario.collision_radius", sc.collision_radius);
  sc.goal_tolerance =
      map.get_double("scenario.goal_tolerance", sc.goal_tolerance);
  sc.env.obstacle_radius =
      map.get_double("scenario.obstacle_radius", sc.env.obstacle_radius);
  sc.env.obstacle_pref_speed =
      map.get_double("scenario.obstacle_pref_speed", sc.env.obstacle_pref_speed);
  sc.env.goal_reach_dist =
      map.get_double("scenario.goal_reach_dist", sc.env.goal_reach_dist);

  auto& tr = cfg.train;
  tr.demos = map.get_int("train.demos", tr.demos);
  tr.iterations = map.get_int("train.iterations", tr.iterations);
  tr.batch_safe = map.get_int("train.batch_safe", tr.batch_safe);
  tr.batch_unsafe = map.get_int("train.batch_unsafe", tr.batch_unsafe);
  tr.batch_pairs = map.get_int("train.batch_pairs", tr.batch_pairs);
  tr.lr = map.get_double("train.lr", tr.lr);
  tr.gamma = map.get_double("train.gamma", tr.gamma);
  tr.kappa = map.get_double("train.kappa", tr.kappa);
  tr.theta = map.get_double("train.theta", tr.theta);
  tr.k = map.get_int("train.k", tr.k);
  tr.boundary_samples = map.get_int("train.boundary_samples", tr.boundary_samples);
  tr.jitter_sigma = map.get_double("train.jitter_sigma", tr.jitter_sigma);
  tr.refine_rounds = map.get_int("train.refine_rounds", tr.refine_rounds);
  tr.refine_iterations =
      map.get_int("train.refine_iterations", tr.refine_iterations);
  tr.refine_tol = map.get_double("train.refine_tol", tr.refine_tol);
  tr.best_of_controls = map.get_int("train.best_of_controls", tr.best_of_controls);
  tr.ensemble = map.get_int("train.ensemble", tr.ensemble);
  tr.seed = map.get_u64("train.seed", tr.seed) + seed_offset;
  tr.label_horizon = map.get_int("train.label_horizon", tr.label_horizon);
  tr.sensing_range = map.get_double("train.sensing_range", tr.sensing_range);
  tr.holdout_fraction =
      map.get_double("train.holdout_fraction", tr.holdout_fraction);
  tr.nominal_l = map.get_int("train.nominal_l", tr.nominal_l);
  tr.noise = map.get_double("train.noise", tr.noise);
  tr.nonseq = map.get_bool("train.nonseq", tr.nonseq);

  auto& dy = cfg.dyn;
  dy.transitions = map.get_int("dyn.transitions", dy.transitions);
  dy.iterations = map.get_int("dyn.iterations", dy.iterations);
  dy.batch = map.get_int("dyn.batch", dy.batch);
  dy.lr = map.get_double("dyn.lr", dy.lr);
  dy.hidden = map.get_int("dyn.hidden", dy.hidden);

  auto& be = cfg.bench;
  be.methods = map.get_strings("bench.methods", be.methods);
  be.densities = map.get_ints("bench.densities", be.densities);
  be.episodes = map.get_int("bench.episodes", be.episodes);
  be.seeds = map.get_u64s("bench.seeds", be.seeds);
  for (auto& s : be.seeds) s += seed_offset;
  be.l = map.get_int("bench.l", be.l);
  be.sensing_range = map.get_double("bench.sensing_range", be.sensing_range);
  be.b = map.get_double("bench.b", be.b);
  be.inject_nominal = map.get_bool("bench.inject_nominal", be.inject_nominal);
  be.ensemble_variance =
      map.get_double("bench.ensemble_variance", be.ensemble_variance);
  be.ensemble_require_all =
      map.get_bool("bench.ensemble_require_all", be.ensemble_require_all);
  be.smpc_samples = map.get_int("bench.smpc_samples", be.smpc_samples);
  be.smpc_depth = map.get_int("bench.smpc_depth", be.smpc_depth);
  be.smpc_sigma = map.get_double("bench.smpc_sigma", be.smpc_sigma);
  be.smpc_nominal_l = map.get_int("bench.smpc_nominal_l", be.smpc_nominal_l);
  be.model_dir = map.get_string("bench.model_dir", be.model_dir);

  auto& de = cfg.decomp;
  de.train_density = map.get_int("decomp.train_density", de.train_density);
  de.rollouts = map.get_int("decomp.rollouts", de.rollouts);
  de.horizon = map.get_int("decomp.horizon", de.horizon);
  de.densities = map.get_ints("decomp.densities", de.densities);
  de.eval_episodes = map.get_int("decomp.eval_episodes", de.eval_episodes);
  de.iterations = map.get_int("decomp.iterations", de.iterations);
  de.batch = map.get_int("decomp.batch", de.batch);
  de.lr = map.get_double("decomp.lr", de.lr);
  de.holdout_fraction =
      map.get_double("decomp.holdout_fraction", de.holdout_fraction);
  de.seeds = map.get_u64s("decomp.seeds", de.seeds);
  for (auto& s : de.seeds) s += seed_offset;

  auto& rp = cfg.replay;
  rp.trajectory = map.get_string("replay.trajectory", rp.trajectory);
  rp.model = map.get_string("replay.model", rp.model);
  rp.pitch = map.get_double("replay.pitch", rp.pitch);
  rp.frames = map.get_ints("replay.frames", rp.frames);
  rp.max_cells = map.get_int("replay.max_cells", static_cast<int>(rp.max_cells));
  rp.sensing_range = map.get_double("replay.sensing_range", rp.sensing_range);
  rp.b = map.get_double("replay.b", rp.b);

  auto unknown = map.unused();
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path,
                                        uint64_t seed_offset) {
  return experiment_config_from(ConfigMap::parse_file(path), seed_offset);
}

}  // namespace sncbf
