#include "sncbf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sncbf/csv.hpp"
#include "sncbf/pf.hpp"

namespace sncbf::infer {

namespace {

constexpr uint64_t kSncbfStream = 0xC7D1;
constexpr uint64_t kEnsembleStream = 0xE453;
constexpr uint64_t kNonseqStream = 0x4049;

// Candidate indices in descending predicted-score order; ties keep sampling
// order so the scan is fully deterministic.
std::vector<int> score_order(const std::vector<double>& score) {
  std::vector<int> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] > score[b]; });
  return order;
}

// Scaled features of the obstacle's relative state one step ahead: the
// obstacle coasts at its current velocity, the ego lands on x_next. Matches
// HistoryTracker::successor_window's appended step.
void successor_features(const sim::ObstacleState& o, const Vec2& ego_pos,
                        const Vec2& ego_next_pos, double dt,
                        const feat::FeatureScales& scales, double* out) {
  feat::RelativeState rel;
  rel.rel_pos = (o.pos + o.vel * dt) - ego_next_pos;
  rel.rel_vel = o.vel - (ego_next_pos - ego_pos) * (1.0 / dt);
  feat::step_features(rel, scales, out);
}

// Runs the shared LSTM prefix (history steps 1..k-1) for each in-range
// obstacle; every candidate's successor window differs only in the last step.
std::vector<dc::LstmState> obstacle_prefixes(
    const feat::HistoryTracker& tracker, const std::vector<int>& in_range,
    barrier::BarrierEvaluator& ev, std::vector<double>& winbuf) {
  const int k = tracker.k();
  const std::size_t stride = static_cast<std::size_t>(k) * feat::kQ;
  winbuf.resize(in_range.size() * stride);
  std::vector<dc::LstmState> prefixes;
  prefixes.reserve(in_range.size());
  std::vector<const double*> steps(static_cast<std::size_t>(k - 1));
  for (std::size_t j = 0; j < in_range.size(); ++j) {
    tracker.window(in_range[j], &winbuf[j * stride]);
    for (int t = 1; t < k; ++t)
      steps[t - 1] = &winbuf[j * stride + static_cast<std::size_t>(t) * feat::kQ];
    prefixes.push_back(ev.run_prefix(steps));
  }
  return prefixes;
}

ego::Control goal_seeking_nominal(const ego::EgoState& x, const Vec2& goal,
                                  const ego::ControlBounds& bounds,
                                  double dt) {
  return base::gpfm_control(x, goal, {}, base::PotentialFieldParams{}, 2.0,
                            bounds, dt);
}

}  // namespace

double aggregate(const std::vector<double>& values, double b) {
  double prod = 1.0;
  for (double v : values) {
    const double f = std::max(std::min(v, b) / b, 0.0);
    prod *= f;
    if (prod == 0.0) return 0.0;
  }
  return prod;
}

std::vector<int> obstacles_in_range(const sim::WorldState& world,
                                    double range) {
  std::vector<int> out;
  const Vec2 p = world.ego.pos();
  for (std::size_t i = 0; i < world.obstacles.size(); ++i)
    if ((world.obstacles[i].pos - p).norm() <= range)
      out.push_back(static_cast<int>(i));
  return out;
}

ControllerDecision select_from_candidates(
    const sim::WorldState& world, const feat::HistoryTracker& tracker,
    const std::vector<int>& in_range, barrier::BarrierEvaluator& ev,
    const ego::LearnedDynamics& dyn,
    const std::vector<ego::Control>& candidates, const Vec2& goal,
    const SelectConfig& cfg, double dt, DecisionTrace* trace) {
  const int l = static_cast<int>(candidates.size());
  const int m = static_cast<int>(in_range.size());
  const ego::EgoState& x = world.ego;
  const feat::FeatureScales& scales = tracker.scales();
  const bool exhaustive = cfg.exhaustive || trace != nullptr;

  std::vector<ego::EgoState> succ(static_cast<std::size_t>(l));
  std::vector<double> score(static_cast<std::size_t>(l));
  for (int c = 0; c < l; ++c) {
    succ[c] = ego::step_learned(dyn, x, candidates[c]);
    score[c] = -(succ[c].pos() - goal).norm();
  }
  const std::vector<int> order = score_order(score);

  std::vector<double> winbuf;
  std::vector<dc::LstmState> prefixes =
      obstacle_prefixes(tracker, in_range, ev, winbuf);

  ControllerDecision d;
  d.successors_predicted = l;
  if (trace) {
    trace->obstacles = in_range;
    trace->candidates.clear();
    trace->chosen_index = -1;
  }

  std::vector<double> ego_feats(
      static_cast<std::size_t>(feat::ego_feature_dim(x.kind)));
  std::vector<double> ego_code;
  std::vector<double> values(static_cast<std::size_t>(m));
  double last[feat::kQ];

  for (int pos = 0; pos < l; ++pos) {
    const int c = order[pos];
    feat::ego_features(succ[c], scales, ego_feats.data());
    ev.encode_ego(ego_feats.data(), ego_code);
    bool dead = false;
    int evaluated = 0;
    for (int j = 0; j < m; ++j) {
      successor_features(world.obstacles[in_range[j]], x.pos(),
                         succ[c].pos(), dt, scales, last);
      values[j] = ev.value_from(prefixes[j], last, ego_code);
      ++evaluated;
      if (!exhaustive && values[j] <= 0.0) {
        dead = true;  // one dead factor zeroes the product
        break;
      }
    }
    const double ag =
        dead ? 0.0
             : aggregate(std::vector<double>(values.begin(),
                                             values.begin() + evaluated),
                         cfg.agg.b);
    ++d.candidates_evaluated;
    const bool feasible = ag > 0.0;
    if (feasible) {
      ++d.feasible_count;
      if (!d.chosen) {
        d.chosen = candidates[c];
        if (trace) trace->chosen_index = pos;
      }
    }
    if (trace) {
      CandidateTrace row;
      row.u = candidates[c];
      row.score = score[c];
      row.barriers = values;
      row.aggregated = ag;
      row.feasible = feasible;
      trace->candidates.push_back(std::move(row));
    }
    if (!exhaustive && d.chosen) break;
  }
  return d;
}

ControllerDecision select_control(const sim::WorldState& world,
                                  const feat::HistoryTracker& tracker,
                                  const std::vector<int>& in_range,
                                  barrier::BarrierEvaluator& ev,
                                  const ego::LearnedDynamics& dyn,
                                  const ego::ControlBounds& bounds,
                                  const Vec2& goal, const SelectConfig& cfg,
                                  double dt, Rng& rng, DecisionTrace* trace) {
  std::vector<ego::Control> candidates =
      ego::sample_controls(bounds, cfg.l, rng);
  if (cfg.inject_nominal && !candidates.empty())
    candidates.back() = goal_seeking_nominal(world.ego, goal, bounds, dt);
  return select_from_candidates(world, tracker, in_range, ev, dyn, candidates,
                                goal, cfg, dt, trace);
}

ControllerDecision ensemble_select_from_candidates(
    const sim::WorldState& world, const feat::HistoryTracker& tracker,
    const std::vector<int>& in_range,
    std::vector<barrier::BarrierEvaluator>& members,
    const EnsembleConfig& ens, const ego::LearnedDynamics& dyn,
    const std::vector<ego::Control>& candidates, const Vec2& goal,
    const SelectConfig& cfg, double dt, DecisionTrace* trace) {
  const int l = static_cast<int>(candidates.size());
  const int m = static_cast<int>(in_range.size());
  const int n_mem = static_cast<int>(members.size());
  const ego::EgoState& x = world.ego;
  const feat::FeatureScales& scales = tracker.scales();
  const bool exhaustive = cfg.exhaustive || trace != nullptr;

  std::vector<ego::EgoState> succ(static_cast<std::size_t>(l));
  std::vector<double> score(static_cast<std::size_t>(l));
  for (int c = 0; c < l; ++c) {
    succ[c] = ego::step_learned(dyn, x, candidates[c]);
    score[c] = -(succ[c].pos() - goal).norm();
  }
  const std::vector<int> order = score_order(score);

  std::vector<std::vector<dc::LstmState>> prefixes(
      static_cast<std::size_t>(n_mem));
  std::vector<double> winbuf;
  for (int e = 0; e < n_mem; ++e)
    prefixes[e] = obstacle_prefixes(tracker, in_range, members[e], winbuf);

  ControllerDecision d;
  d.successors_predicted = l;
  if (trace) {
    trace->obstacles = in_range;
    trace->candidates.clear();
    trace->chosen_index = -1;
  }

  std::vector<double> ego_feats(
      static_cast<std::size_t>(feat::ego_feature_dim(x.kind)));
  std::vector<double> ego_code;
  std::vector<double> vals(static_cast<std::size_t>(n_mem) * m);
  std::vector<double> member_vals(static_cast<std::size_t>(m));
  std::vector<double> mean_vals(static_cast<std::size_t>(m));
  double last[feat::kQ];

  for (int pos = 0; pos < l; ++pos) {
    const int c = order[pos];
    double mean_ag = 0.0;
    bool all_pos = true;
    for (int e = 0; e < n_mem; ++e) {
      feat::ego_features(succ[c], scales, ego_feats.data());
      members[e].encode_ego(ego_feats.data(), ego_code);
      for (int j = 0; j < m; ++j) {
        successor_features(world.obstacles[in_range[j]], x.pos(),
                           succ[c].pos(), dt, scales, last);
        member_vals[j] =
            members[e].value_from(prefixes[e][j], last, ego_code);
        vals[static_cast<std::size_t>(e) * m + j] = member_vals[j];
      }
      const double ag = aggregate(member_vals, cfg.agg.b);
      mean_ag += ag / static_cast<double>(n_mem);
      all_pos = all_pos && ag > 0.0;
    }
    double max_var = 0.0;
    for (int j = 0; j < m; ++j) {
      double mean = 0.0, sq = 0.0;
      for (int e = 0; e < n_mem; ++e) {
        const double v = vals[static_cast<std::size_t>(e) * m + j];
        mean += v;
        sq += v * v;
      }
      mean /= n_mem;
      mean_vals[j] = mean;
      max_var = std::max(max_var, sq / n_mem - mean * mean);
    }
    ++d.candidates_evaluated;
    const bool positive = ens.require_all_positive ? all_pos : mean_ag > 0.0;
    const bool feasible = positive && max_var <= ens.variance_threshold;
    if (feasible) {
      ++d.feasible_count;
      if (!d.chosen) {
        d.chosen = candidates[c];
        if (trace) trace->chosen_index = pos;
      }
    }
    if (trace) {
      CandidateTrace row;
      row.u = candidates[c];
      row.score = score[c];
      row.barriers = mean_vals;  // across-member mean per obstacle
      row.aggregated = mean_ag;
      row.feasible = feasible;
      trace->candidates.push_back(std::move(row));
    }
    if (!exhaustive && d.chosen) break;
  }
  return d;
}

ControllerDecision ensemble_select(
    const sim::WorldState& world, const feat::HistoryTracker& tracker,
    const std::vector<int>& in_range,
    std::vector<barrier::BarrierEvaluator>& members,
    const EnsembleConfig& ens, const ego::LearnedDynamics& dyn,
    const ego::ControlBounds& bounds, const Vec2& goal,
    const SelectConfig& cfg, double dt, Rng& rng, DecisionTrace* trace) {
  std::vector<ego::Control> candidates =
      ego::sample_controls(bounds, cfg.l, rng);
  if (cfg.inject_nominal && !candidates.empty())
    candidates.back() = goal_seeking_nominal(world.ego, goal, bounds, dt);
  return ensemble_select_from_candidates(world, tracker, in_range, members,
                                         ens, dyn, candidates, goal, cfg, dt,
                                         trace);
}

void TraceWriter::add(int time_step, const DecisionTrace& trace) {
  if (rows_.empty()) {
    std::vector<std::string> header = {"step",  "candidate", "u0",
                                       "u1",    "score",     "aggregated",
                                       "feasible", "chosen"};
    for (int i = 0; i < n_obs_; ++i) header.push_back("b" + std::to_string(i));
    rows_.push_back(join_csv(header));
  }
  for (std::size_t pos = 0; pos < trace.candidates.size(); ++pos) {
    const CandidateTrace& ct = trace.candidates[pos];
    std::vector<std::string> cells = {
        std::to_string(time_step),
        std::to_string(pos),
        fmt_g9(ct.u.u[0]),
        fmt_g9(ct.u.u[1]),
        fmt_g9(ct.score),
        fmt_g9(ct.aggregated),
        ct.feasible ? "1" : "0",
        static_cast<int>(pos) == trace.chosen_index ? "1" : "0"};
    std::vector<std::string> per_obs(static_cast<std::size_t>(n_obs_));
    for (std::size_t j = 0; j < trace.obstacles.size(); ++j)
      per_obs[static_cast<std::size_t>(trace.obstacles[j])] =
          fmt_g9(ct.barriers[j]);
    cells.insert(cells.end(), per_obs.begin(), per_obs.end());
    rows_.push_back(join_csv(cells));
  }
}

void TraceWriter::write(const std::string& path) const {
  std::string out;
  for (const std::string& r : rows_) {
    out += r;
    out += '\n';
  }
  write_file(path, out);
}

SncbfController::SncbfController(barrier::BarrierNet net,
                                 ego::LearnedDynamics dyn,
                                 const SelectConfig& cfg,
                                 const feat::FeatureScales& scales)
    : net_(barrier::barrier_from_params(net.spec, std::move(net.params))),
      ev_(net_),
      dyn_(std::move(dyn)),
      cfg_(cfg),
      tracker_(net_.spec.k, scales) {
  ego::rebind(dyn_);
  bounds_ = ego::default_bounds(dyn_.kind);
}

void SncbfController::reset(const sim::Scenario& cfg,
                            const sim::WorldState& world) {
  tracker_.reset(world, cfg.dt);
  goal_ = cfg.ego_goal;
  bounds_ = ego::default_bounds(cfg.ego_dynamics);
  rng_ = Rng(mix_seed(cfg.seed, kSncbfStream));
  last_ = {};
}

std::optional<ego::Control> SncbfController::act(
    const sim::Scenario& cfg, const sim::WorldState& world) {
  if (world.time_step > 0) tracker_.push(world);
  const std::vector<int> in_range =
      obstacles_in_range(world, cfg_.sensing_range);
  DecisionTrace trace;
  last_ = select_control(world, tracker_, in_range, ev_, dyn_, bounds_, goal_,
                         cfg_, cfg.dt, rng_,
                         trace_sink_ ? &trace : nullptr);
  if (trace_sink_) trace_sink_->add(world.time_step, trace);
  ++decisions_;
  successors_ += last_.successors_predicted;
  return last_.chosen;
}

EnsembleController::EnsembleController(
    std::vector<barrier::BarrierNet> members, ego::LearnedDynamics dyn,
    const EnsembleConfig& ens, const SelectConfig& cfg,
    const feat::FeatureScales& scales)
    : dyn_(std::move(dyn)),
      ens_(ens),
      cfg_(cfg),
      tracker_(members.empty() ? 5 : members[0].spec.k, scales) {
  nets_.reserve(members.size());
  for (barrier::BarrierNet& m : members)
    nets_.push_back(barrier::barrier_from_params(m.spec, std::move(m.params)));
  evs_.reserve(nets_.size());
  for (const barrier::BarrierNet& n : nets_) evs_.emplace_back(n);
  ego::rebind(dyn_);
  bounds_ = ego::default_bounds(dyn_.kind);
}

void EnsembleController::reset(const sim::Scenario& cfg,
                               const sim::WorldState& world) {
  tracker_.reset(world, cfg.dt);
  goal_ = cfg.ego_goal;
  bounds_ = ego::default_bounds(cfg.ego_dynamics);
  rng_ = Rng(mix_seed(cfg.seed, kEnsembleStream));
  last_ = {};
}

std::optional<ego::Control> EnsembleController::act(
    const sim::Scenario& cfg, const sim::WorldState& world) {
  if (world.time_step > 0) tracker_.push(world);
  const std::vector<int> in_range =
      obstacles_in_range(world, cfg_.sensing_range);
  last_ = ensemble_select(world, tracker_, in_range, evs_, ens_, dyn_,
                          bounds_, goal_, cfg_, cfg.dt, rng_);
  return last_.chosen;
}

NonseqController::NonseqController(nonseq::NonseqNet net,
                                   ego::LearnedDynamics dyn,
                                   const SelectConfig& cfg,
                                   const feat::FeatureScales& scales)
    : net_(nonseq::nonseq_from_params(net.spec, std::move(net.params))),
      dyn_(std::move(dyn)),
      cfg_(cfg),
      scales_(scales) {
  ego::rebind(dyn_);
  bounds_ = ego::default_bounds(dyn_.kind);
}

void NonseqController::reset(const sim::Scenario& cfg,
                             const sim::WorldState&) {
  goal_ = cfg.ego_goal;
  bounds_ = ego::default_bounds(cfg.ego_dynamics);
  rng_ = Rng(mix_seed(cfg.seed, kNonseqStream));
  last_ = {};
}

std::optional<ego::Control> NonseqController::act(
    const sim::Scenario& cfg, const sim::WorldState& world) {
  const std::vector<int> in_range =
      obstacles_in_range(world, cfg_.sensing_range);
  const ego::EgoState& x = world.ego;

  std::vector<ego::Control> candidates =
      ego::sample_controls(bounds_, cfg_.l, rng_);
  if (cfg_.inject_nominal && !candidates.empty())
    candidates.back() = goal_seeking_nominal(x, goal_, bounds_, cfg.dt);

  const int l = static_cast<int>(candidates.size());
  std::vector<ego::EgoState> succ(static_cast<std::size_t>(l));
  std::vector<double> score(static_cast<std::size_t>(l));
  for (int c = 0; c < l; ++c) {
    succ[c] = ego::step_learned(dyn_, x, candidates[c]);
    score[c] = -(succ[c].pos() - goal_).norm();
  }
  const std::vector<int> order = score_order(score);

  ControllerDecision d;
  d.successors_predicted = l;
  std::vector<double> rel(in_range.size() * feat::kQ);
  std::vector<double> ego_feats(
      static_cast<std::size_t>(feat::ego_feature_dim(x.kind)));
  std::vector<double> scratch;
  for (int pos = 0; pos < l; ++pos) {
    const int c = order[pos];
    bool feasible = true;
    if (!in_range.empty()) {
      for (std::size_t j = 0; j < in_range.size(); ++j)
        successor_features(world.obstacles[in_range[j]], x.pos(),
                           succ[c].pos(), cfg.dt, scales_,
                           &rel[j * feat::kQ]);
      feat::ego_features(succ[c], scales_, ego_feats.data());
      feasible = nonseq::scene_value(net_, rel.data(),
                                     static_cast<int>(in_range.size()),
                                     ego_feats.data(), scratch) > 0.0;
    }
    ++d.candidates_evaluated;
    if (feasible) {
      ++d.feasible_count;
      d.chosen = candidates[c];
      break;
    }
  }
  last_ = d;
  return d.chosen;
}

}  // namespace sncbf::infer
