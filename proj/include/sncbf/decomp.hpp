#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sncbf/features.hpp"
#include "sncbf/nn.hpp"
#include "sncbf/scenario.hpp"

namespace sncbf::decomp {

// Three families of one-step obstacle predictors, trained at one crowd
// density and probed at higher ones to measure how well the joint crowd
// dynamics decompose into per-obstacle models.
enum class PredictorKind { kCoSM, kCSM, kICSM };

const char* to_string(PredictorKind kind);

// Supervised pairs extracted from ego-free crowd rollouts. One sample is an
// obstacle's k-step feature window (oldest first) plus the step-averaged
// velocity it actually realized next, (pos_next - pos_now) / dt. Per-step
// features are the position offset from the obstacle's current position and
// its velocity, both scaled; with interaction on, the nearest neighbor's
// relative position and velocity at that step are appended (zeros when the
// obstacle is alone). All samples of one (rollout, t) scene sit contiguously;
// scene_offsets brackets them for the set-encoder model.
struct DecompData {
  int k = 5;
  int feat_dim = 4;
  double dt = 0.1;
  std::vector<double> windows;     // n * k * feat_dim
  std::vector<double> targets;     // n * 2, step-averaged velocity
  std::vector<int> scene_offsets;  // scenes + 1 entries, starts with 0

  int size() const { return static_cast<int>(targets.size()) / 2; }
  int scenes() const { return static_cast<int>(scene_offsets.size()) - 1; }
  const double* window(int i) const { return &windows[static_cast<std::size_t>(i) * k * feat_dim]; }
  const double* target(int i) const { return &targets[static_cast<std::size_t>(i) * 2]; }
};

struct RolloutConfig {
  int density = 6;
  int n_rollouts = 8;
  int horizon = 200;  // recorded frames per rollout
  int k = 5;
  bool interaction = false;
  double arena_half_extent = 10.0;
  double dt = 0.1;
  uint64_t seed = 1;
  feat::FeatureScales scales;
};

// ORCA crowd evolving alone: spawn from the scenario stream, then step with
// the same goal-resampling rule the episode loop uses. frames[t] holds every
// obstacle's state at step t.
std::vector<std::vector<sim::ObstacleState>> crowd_rollout(
    const sim::Scenario& cfg, int horizon);

// Window/target extraction from recorded frames; scenes are timesteps
// k-1 .. T-2, so a T-frame rollout with m obstacles yields m * (T - k)
// samples.
DecompData extract_pairs(
    const std::vector<std::vector<sim::ObstacleState>>& frames, int k,
    bool interaction, double dt, const feat::FeatureScales& scales);

// n_rollouts rollouts at cfg.density, seeds derived from cfg.seed.
DecompData build_training_set(const RolloutConfig& cfg);

// Appends src's samples and scenes to dst (dst adopts src's layout fields).
void append_data(DecompData& dst, const DecompData& src);

// CSM/ICSM: an LSTM over the window and an MLP head on the final hidden
// state. CoSM: an embedding MLP per obstacle window, mean-pooled into a scene
// context; the head decodes (own window, context). Heads predict the
// step-averaged velocity.
struct PredictorModel {
  PredictorKind kind = PredictorKind::kCSM;
  int k = 5;
  int feat_dim = 4;
  dc::ParamBundle params;
  // CSM / ICSM
  dc::LstmRef lstm;
  dc::MlpRef head;
  // CoSM
  dc::MlpRef emb;
};

PredictorModel predictor_init(PredictorKind kind, int k, uint64_t seed);
// Rebinds refs after the params were replaced (e.g. deserialized).
PredictorModel predictor_from_params(PredictorKind kind, int k,
                                     dc::ParamBundle params);

struct PredictorTrainConfig {
  int iterations = 1500;
  int batch = 128;  // samples per step; CoSM rounds up to whole scenes
  double lr = 1e-3;
  double holdout_fraction = 0.1;  // withheld by scene stride
  uint64_t seed = 1;
};

struct TrainedPredictor {
  PredictorModel model;
  double holdout_mse = 0.0;  // per-element squared error, velocity units
  std::vector<double> curve;
};

// Adam on mean squared error. Throws StageError on an empty split or a
// non-finite loss.
TrainedPredictor train_predictor(PredictorKind kind, const DecompData& data,
                                 const PredictorTrainConfig& cfg);

// Predicted step-averaged velocities for every sample, size 2n. The data's
// feat_dim must match the model.
std::vector<double> predict_all(const PredictorModel& model,
                                const DecompData& data);

struct DecompEvalRow {
  PredictorKind kind = PredictorKind::kCSM;
  int density = 0;
  double mean_l2 = 0.0;       // meters, next-position error
  double mean_maxnorm = 0.0;  // meters
  double eps95 = 0.0;         // 95th percentile of the max-norm errors
};

struct DecompEvalReport {
  std::vector<DecompEvalRow> rows;  // kind-major, densities in given order
};

// Error statistics of predicted step-averaged velocities against the data's
// targets, reported as next-position errors in meters.
DecompEvalRow score_predictions(PredictorKind kind, int density,
                                const std::vector<double>& pred,
                                const DecompData& data);

// Shared fresh rollouts per density (episodes each), one-step errors per
// kind. base.seed seeds the evaluation stream; every kind sees the same
// crowds.
DecompEvalReport evaluate_generalization(
    const std::vector<PredictorModel>& models, const std::vector<int>& densities,
    int episodes, const RolloutConfig& base);

// Nearest-rank quantile of the max-norm error list, q in [0, 1].
double eps_quantile(std::vector<double> maxnorm_errors, double q);

// CSV with header kind,density,mean_l2,mean_maxnorm,eps95 (%.9g cells).
void write_decomp_csv(const DecompEvalReport& report, const std::string& path);

}  // namespace sncbf::decomp
