#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sncbf/barrier.hpp"
#include "sncbf/config.hpp"
#include "sncbf/decomp.hpp"
#include "sncbf/episode.hpp"
#include "sncbf/learned_dynamics.hpp"
#include "sncbf/nonseq.hpp"

namespace sncbf::cli {

// The four subcommands as library calls. Each writes its artifacts under
// out_dir, prints stage summaries to `log`, and throws ConfigError /
// StageError / IoError; the executable maps those to exit codes.

struct TrainArtifacts {
  std::vector<std::string> member_paths;  // models/sncbf_m<i>.sncb
  std::string dynamics_path;
  std::string nonseq_path;      // empty unless train.nonseq
  std::string trajectory_path;  // sample episode of the trained controller
  std::vector<double> loss_initial;        // full-dataset loss after phase 1
  std::vector<double> loss_refined;        // and after refinement
  std::vector<double> violation_initial;   // held-out invariance violation
  std::vector<double> violation_refined;   // fraction, per member
};

TrainArtifacts cmd_train(const ExperimentConfig& cfg,
                         const std::string& out_dir, std::ostream& log);

struct BenchRow {
  std::string dynamics;
  std::string method;
  int obstacles = 0;
  uint64_t seed = 0;
  int episodes = 0;
  double collision_rate = 0.0;  // failures: collision, frozen or timeout
  double mean_steps = 0.0;
  double frozen_fraction = 0.0;
};

struct BenchTable {
  std::vector<BenchRow> rows;  // method-major, then density, then seed
};

// Sweeps method x density x seed; cells run on up to `threads` workers and
// are merged in cell order, so the CSV is byte-stable for any thread count.
// Episode worlds depend only on (seed, density, episode), never the method.
BenchTable cmd_bench(const ExperimentConfig& cfg, const std::string& out_dir,
                     int threads, std::ostream& log);

decomp::DecompEvalReport cmd_decomp(const ExperimentConfig& cfg,
                                    const std::string& out_dir,
                                    std::ostream& log);

// Returns the written SVG paths, one per selected frame.
std::vector<std::string> cmd_replay(const ExperimentConfig& cfg,
                                    const std::string& out_dir,
                                    std::ostream& log);

// Containers the bench methods need, loaded once and copied per cell.
struct LoadedModels {
  std::vector<barrier::BarrierNet> members;
  std::optional<nonseq::NonseqNet> nonseq;
  std::optional<ego::LearnedDynamics> dyn;
};

// Loads only what `methods` require from model_dir; a missing or unreadable
// file raises IoError naming the method that wanted it.
LoadedModels load_models_for(const std::vector<std::string>& methods,
                             const ExperimentConfig& cfg,
                             const std::string& model_dir);

// Fresh controller for one sweep cell. Throws ConfigError on an unknown name.
std::unique_ptr<sim::Controller> make_controller(const std::string& method,
                                                 const ExperimentConfig& cfg,
                                                 const LoadedModels& models);

void write_bench_csv(const BenchTable& table, const std::string& path);
std::string bench_plot_svg(const ExperimentConfig& cfg,
                           const BenchTable& table);

}  // namespace sncbf::cli
