#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sncbf/barrier.hpp"
#include "sncbf/episode.hpp"
#include "sncbf/features.hpp"
#include "sncbf/learned_dynamics.hpp"
#include "sncbf/nonseq.hpp"
#include "sncbf/rng.hpp"

namespace sncbf::infer {

struct AggregationConfig {
  double b = 0.5;  // clip threshold, > 0
};

// Product over obstacles of max(min(B_i, b) / b, 0). Lives in [0, 1]; zero
// exactly when some input is <= 0; an empty list gives the vacuous 1.
double aggregate(const std::vector<double>& values, double b);

struct ControllerDecision {
  std::optional<ego::Control> chosen;
  int candidates_evaluated = 0;  // aggregations computed before stopping
  int feasible_count = 0;        // feasible among the evaluated ones
  int successors_predicted = 0;  // one-step dynamics rollouts (= l)
};

struct SelectConfig {
  int l = 64;                  // candidate controls per decision
  double sensing_range = 5.0;  // obstacles beyond it are ignored
  AggregationConfig agg;
  bool exhaustive = false;      // score every candidate (tracing, audits)
  bool inject_nominal = false;  // swap one sample for a pure goal seeker
};

// One row per candidate, descending score order.
struct CandidateTrace {
  ego::Control u;
  double score = 0.0;
  std::vector<double> barriers;  // aligned with the in-range obstacle list
  double aggregated = 0.0;
  bool feasible = false;
};

struct DecisionTrace {
  std::vector<int> obstacles;  // in-range indices into world.obstacles
  std::vector<CandidateTrace> candidates;
  int chosen_index = -1;  // into candidates, -1 when frozen
};

// Scores candidates by predicted goal progress and walks them best first,
// accepting the first whose successor's clipped barrier product is positive.
// Candidate successors come from the learned model; each obstacle coasts one
// step at its current velocity. `in_range` lists the obstacle indices that
// enter the product. A trace forces exhaustive evaluation.
ControllerDecision select_from_candidates(
    const sim::WorldState& world, const feat::HistoryTracker& tracker,
    const std::vector<int>& in_range, barrier::BarrierEvaluator& ev,
    const ego::LearnedDynamics& dyn, const std::vector<ego::Control>& candidates,
    const Vec2& goal, const SelectConfig& cfg, double dt,
    DecisionTrace* trace = nullptr);

// Samples cfg.l controls (optionally substituting the goal-seeking nominal
// for the last one) and runs the selection above.
ControllerDecision select_control(const sim::WorldState& world,
                                  const feat::HistoryTracker& tracker,
                                  const std::vector<int>& in_range,
                                  barrier::BarrierEvaluator& ev,
                                  const ego::LearnedDynamics& dyn,
                                  const ego::ControlBounds& bounds,
                                  const Vec2& goal, const SelectConfig& cfg,
                                  double dt, Rng& rng,
                                  DecisionTrace* trace = nullptr);

struct EnsembleConfig {
  double variance_threshold = 0.05;  // on raw per-obstacle values
  // false: mean aggregated value must be positive (default mode);
  // true: every member's aggregated value must be positive.
  bool require_all_positive = false;
};

// Ensemble feasibility: the configured positivity rule plus a variance gate,
// max over obstacles of the population variance across members.
ControllerDecision ensemble_select_from_candidates(
    const sim::WorldState& world, const feat::HistoryTracker& tracker,
    const std::vector<int>& in_range,
    std::vector<barrier::BarrierEvaluator>& members,
    const EnsembleConfig& ens, const ego::LearnedDynamics& dyn,
    const std::vector<ego::Control>& candidates, const Vec2& goal,
    const SelectConfig& cfg, double dt, DecisionTrace* trace = nullptr);

ControllerDecision ensemble_select(const sim::WorldState& world,
                                   const feat::HistoryTracker& tracker,
                                   const std::vector<int>& in_range,
                                   std::vector<barrier::BarrierEvaluator>& members,
                                   const EnsembleConfig& ens,
                                   const ego::LearnedDynamics& dyn,
                                   const ego::ControlBounds& bounds,
                                   const Vec2& goal, const SelectConfig& cfg,
                                   double dt, Rng& rng,
                                   DecisionTrace* trace = nullptr);

// Obstacle indices currently within `range` of the ego.
std::vector<int> obstacles_in_range(const sim::WorldState& world,
                                    double range);

// Per-step candidate dump; one row per (step, candidate), barrier values in
// per-obstacle columns, blank when that obstacle was out of range.
class TraceWriter {
 public:
  explicit TraceWriter(int obstacle_count) : n_obs_(obstacle_count) {}
  void add(int time_step, const DecisionTrace& trace);
  void write(const std::string& path) const;
  bool empty() const { return rows_.empty(); }

 private:
  int n_obs_;
  std::vector<std::string> rows_;
};

// Closed-loop controller around the sequential barrier model.
class SncbfController : public sim::Controller {
 public:
  SncbfController(barrier::BarrierNet net, ego::LearnedDynamics dyn,
                  const SelectConfig& cfg = {},
                  const feat::FeatureScales& scales = {});

  void reset(const sim::Scenario& cfg, const sim::WorldState& world) override;
  std::optional<ego::Control> act(const sim::Scenario& cfg,
                                  const sim::WorldState& world) override;

  // Enables per-decision tracing (forces exhaustive candidate evaluation).
  void set_trace(TraceWriter* sink) { trace_sink_ = sink; }

  const ControllerDecision& last_decision() const { return last_; }
  long decisions() const { return decisions_; }
  long successors_predicted() const { return successors_; }

 private:
  barrier::BarrierNet net_;
  barrier::BarrierEvaluator ev_;
  ego::LearnedDynamics dyn_;
  SelectConfig cfg_;
  feat::HistoryTracker tracker_;
  ego::ControlBounds bounds_;
  Vec2 goal_;
  Rng rng_{0};
  TraceWriter* trace_sink_ = nullptr;
  ControllerDecision last_;
  long decisions_ = 0;
  long successors_ = 0;
};

class EnsembleController : public sim::Controller {
 public:
  EnsembleController(std::vector<barrier::BarrierNet> members,
                     ego::LearnedDynamics dyn, const EnsembleConfig& ens = {},
                     const SelectConfig& cfg = {},
                     const feat::FeatureScales& scales = {});

  void reset(const sim::Scenario& cfg, const sim::WorldState& world) override;
  std::optional<ego::Control> act(const sim::Scenario& cfg,
                                  const sim::WorldState& world) override;

  const ControllerDecision& last_decision() const { return last_; }

 private:
  std::vector<barrier::BarrierNet> nets_;
  std::vector<barrier::BarrierEvaluator> evs_;
  ego::LearnedDynamics dyn_;
  EnsembleConfig ens_;
  SelectConfig cfg_;
  feat::HistoryTracker tracker_;
  ego::ControlBounds bounds_;
  Vec2 goal_;
  Rng rng_{0};
  ControllerDecision last_;
};

// Closed-loop controller around the pooled single-step model. Feasibility is
// the scene-level value of the predicted successor being positive.
class NonseqController : public sim::Controller {
 public:
  NonseqController(nonseq::NonseqNet net, ego::LearnedDynamics dyn,
                   const SelectConfig& cfg = {},
                   const feat::FeatureScales& scales = {});

  void reset(const sim::Scenario& cfg, const sim::WorldState& world) override;
  std::optional<ego::Control> act(const sim::Scenario& cfg,
                                  const sim::WorldState& world) override;

  const ControllerDecision& last_decision() const { return last_; }

 private:
  nonseq::NonseqNet net_;
  ego::LearnedDynamics dyn_;
  SelectConfig cfg_;
  feat::FeatureScales scales_;
  ego::ControlBounds bounds_;
  Vec2 goal_;
  Rng rng_{0};
  ControllerDecision last_;
};

}  // namespace sncbf::infer
