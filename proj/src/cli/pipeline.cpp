#include "sncbf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>

#include "sncbf/baseline_controllers.hpp"
#include "sncbf/container.hpp"
#include "sncbf/csv.hpp"
#include "sncbf/dataset.hpp"
#include "sncbf/errors.hpp"
#include "sncbf/inference.hpp"
#include "sncbf/model_io.hpp"
#include "sncbf/pf.hpp"
#include "sncbf/replay.hpp"
#include "sncbf/rng.hpp"
#include "sncbf/svg.hpp"
#include "sncbf/train.hpp"

namespace sncbf::cli {
namespace {

// Seed streams private to the pipeline.
constexpr uint64_t kInitStream = 0x1A17;     // barrier init per member
constexpr uint64_t kDynDataStream = 0xDA7A;  // random transitions
constexpr uint64_t kDynFitStream = 0xF17D;   // dynamics Adam
constexpr uint64_t kNominalStream = 0x4011;  // refinement nominal sampling
constexpr uint64_t kNonseqInit = 0x9E59;
constexpr uint64_t kNonseqTrain = 0x9E5A;

namespace fs = std::filesystem;

// Per-stage wall clock for the log; long runs need progress evidence.
class Stopwatch {
 public:
  Stopwatch() : last_(std::chrono::steady_clock::now()) {}
  std::string lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    char buf[32];
    std::snprintf(buf, sizeof(buf), " (%.1fs)", s);
    return buf;
  }

 private:
  std::chrono::steady_clock::time_point last_;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_curve_csv(const std::string& path, const std::vector<double>& loss) {
  std::string out = "iteration,loss\n";
  for (size_t i = 0; i < loss.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += fmt_g9(loss[i]);
    out += '\n';
  }
  write_file(path, out);
}

void write_curve_csv(const std::string& path,
                     const std::vector<std::pair<int, double>>& curve) {
  std::string out = "iteration,loss\n";
  for (const auto& [it, loss] : curve) {
    out += std::to_string(it);
    out += ',';
    out += fmt_g9(loss);
    out += '\n';
  }
  write_file(path, out);
}

// Planar ego velocity readable from the state alone; zero where the state
// does not carry it (single integrator, bicycle).
Vec2 planar_velocity(const ego::EgoState& x) {
  switch (x.kind) {
    case ego::DynKind::kDoubleIntegrator: return {x.c[2], x.c[3]};
    case ego::DynKind::kDubins:
      return {x.c[2] * std::cos(x.c[3]), x.c[2] * std::sin(x.c[3])};
    default: return {0.0, 0.0};
  }
}

// Refinement nominal: the demonstration policy, rebuilt from the member's
// single obstacle window. The obstacle's absolute state comes from the
// current relative observation; its velocity reconstruction uses the
// state-derived ego velocity, exact for the kinds that carry one.
train::NominalFn make_refine_nominal(int l, double dt, uint64_t seed) {
  auto rng = std::make_shared<Rng>(mix_seed(seed, kNominalStream));
  return [l, dt, rng](const ego::EgoState& x,
                      const std::vector<feat::RelativeState>& win,
                      const Vec2& goal) {
    std::vector<sim::ObstacleState> obs(1);
    const feat::RelativeState& cur = win.back();
    const Vec2 ev = planar_velocity(x);
    obs[0].pos = {x.pos().x + cur.rel_pos.x, x.pos().y + cur.rel_pos.y};
    obs[0].vel = {cur.rel_vel.x + ev.x, cur.rel_vel.y + ev.y};
    base::PotentialFieldParams p;
    auto stepper = [dt](const ego::EgoState& s, const ego::Control& u) {
      return ego::step_true(s, u, dt);
    };
    return base::spfm_control(x, goal, obs, p, ego::default_bounds(x.kind), l,
                              dt, stepper, *rng);
  };
}

infer::SelectConfig select_config(const ExperimentConfig& cfg) {
  infer::SelectConfig sel;
  sel.l = cfg.bench.l;
  sel.sensing_range = cfg.bench.sensing_range;
  sel.agg.b = cfg.bench.b;
  sel.inject_nominal = cfg.bench.inject_nominal;
  return sel;
}

bool needs_dynamics(const std::string& method) {
  return method == "sncbf" || method == "sncbf-ensemble" ||
         method == "nonseq-cbf" || method == "smpc";
}

ModelContainer load_for_method(const std::string& path,
                               const std::string& method) {
  try {
    return load_container(path);
  } catch (const IoError& e) {
    throw IoError("method '" + method + "': " + e.what());
  }
}

}  // namespace

TrainArtifacts cmd_train(const ExperimentConfig& cfg,
                         const std::string& out_dir, std::ostream& log) {
  const auto& t = cfg.train;
  const sim::Scenario& sc = cfg.scenario;
  ensure_dir(out_dir);
  const std::string model_dir = join(out_dir, "models");
  ensure_dir(model_dir);

  TrainArtifacts art;
  Stopwatch sw;

  log << "[train] collecting " << t.demos << " demonstrations at density "
      << sc.obstacle_count << " (" << ego::to_string(sc.ego_dynamics)
      << ")\n";
  train::DemoConfig demo;
  demo.k = t.k;
  demo.label_horizon = t.label_horizon;
  demo.sensing_range = t.sensing_range;
  demo.holdout_fraction = t.holdout_fraction;
  base::SpfmController spfm_nominal(t.nominal_l);
  base::NoisyController noisy(spfm_nominal, t.noise);
  sim::Controller& nominal =
      t.noise > 0 ? static_cast<sim::Controller&>(noisy)
                  : static_cast<sim::Controller&>(spfm_nominal);
  train::DemoResult demos = train::collect_demonstrations(sc, nominal, t.demos, demo);
  log << "[train] demonstrations: " << demos.episodes << " episodes, "
      << demos.collision_episodes << " with collisions, " << demos.frames
      << " frames; safe=" << demos.data.safe.size()
      << " unsafe=" << demos.data.unsafe.size()
      << " pairs=" << demos.data.pairs.size()
      << " holdout=" << demos.holdout_pairs.size() << sw.lap() << "\n";

  log << "[train] fitting " << ego::to_string(sc.ego_dynamics)
      << " dynamics on " << cfg.dyn.transitions << " random transitions\n";
  auto transitions = ego::collect_random_transitions(
      sc.ego_dynamics, cfg.dyn.transitions, sc.arena_half_extent,
      mix_seed(t.seed, kDynDataStream));
  ego::DynFitConfig dfc;
  dfc.iterations = cfg.dyn.iterations;
  dfc.batch = cfg.dyn.batch;
  dfc.lr = cfg.dyn.lr;
  dfc.hidden = cfg.dyn.hidden;
  std::vector<std::pair<int, double>> dyn_curve;
  ego::LearnedDynamics dyn = ego::fit_dynamics(
      sc.ego_dynamics, transitions, dfc, mix_seed(t.seed, kDynFitStream),
      &dyn_curve);
  write_curve_csv(join(out_dir, "dyn_loss.csv"), dyn_curve);
  log << "[train] dynamics position rmse: "
      << fmt_g9(ego::position_rmse(dyn, transitions)) << " m" << sw.lap()
      << "\n";
  art.dynamics_path = join(model_dir, "dynamics.sncb");
  save_container(art.dynamics_path, pack_dynamics(dyn));

  std::string metrics =
      "member,loss_initial,loss_refined,violation_initial,violation_refined,"
      "rounds,converged\n";

  for (int m = 0; m < t.ensemble; ++m) {
    const uint64_t member_seed = mix_seed(t.seed, static_cast<uint64_t>(m));
    barrier::BarrierSpec bspec;
    bspec.k = t.k;
    bspec.ego_dim = feat::ego_feature_dim(sc.ego_dynamics);
    bspec.kappa = t.kappa;
    bspec.gamma = t.gamma;
    bspec.dt = sc.dt;
    auto net = barrier::barrier_init(bspec, mix_seed(member_seed, kInitStream));

    train::TrainConfig tcfg;
    tcfg.initial_iterations = t.iterations;
    tcfg.batch_safe = t.batch_safe;
    tcfg.batch_unsafe = t.batch_unsafe;
    tcfg.batch_pairs = t.batch_pairs;
    tcfg.lr = t.lr;
    tcfg.theta = t.theta;
    tcfg.boundary_samples = t.boundary_samples;
    tcfg.jitter_sigma = t.jitter_sigma;
    tcfg.collision_radius = sc.collision_radius;
    tcfg.refine_rounds_max = t.refine_rounds;
    tcfg.refine_tol = t.refine_tol;
    tcfg.refine_iterations = t.refine_iterations;
    tcfg.best_of_controls = t.best_of_controls;
    tcfg.seed = member_seed;

    // Refinement edits the label sets; each member works on its own copy.
    train::LabeledDataset data = demos.data;
    std::vector<train::SeedRecord> seeds = demos.seeds;

    auto curve1 = train::train_initial(net, data, tcfg);
    write_curve_csv(join(out_dir, "train_initial_m" + std::to_string(m) + ".csv"),
                    curve1);
    const double loss1 = train::full_loss(net, data);
    const double viol1 = train::violation_fraction(net, demos.holdout_pairs);
    log << "[train] member " << m << " phase 1: loss "
        << fmt_g9(curve1.empty() ? loss1 : curve1.front()) << " -> "
        << fmt_g9(loss1) << ", held-out violation " << fmt_g9(viol1)
        << sw.lap() << "\n";

    auto nominal_fn = make_refine_nominal(t.nominal_l, sc.dt, member_seed);
    train::StepFn step_fn = [&dyn](const ego::EgoState& x,
                                   const ego::Control& u) {
      return ego::step_learned(dyn, x, u);
    };
    auto rr = train::refine_boundary(net, data, seeds, tcfg, nominal_fn,
                                     step_fn, ego::default_bounds(sc.ego_dynamics),
                                     sc.dt);
    write_curve_csv(join(out_dir, "train_refine_m" + std::to_string(m) + ".csv"),
                    rr.curve);
    const double loss2 = train::full_loss(net, data);
    const double viol2 = train::violation_fraction(net, demos.holdout_pairs);
    log << "[train] member " << m << " phase 2: " << rr.rounds.size()
        << " rounds" << (rr.converged ? " (converged)" : "") << ", loss "
        << fmt_g9(loss2) << ", held-out violation " << fmt_g9(viol2)
        << sw.lap() << "\n";

    const std::string path = join(model_dir, "sncbf_m" + std::to_string(m) + ".sncb");
    save_container(path, pack_barrier(net));
    log << "[train] saved " << path << "\n";
    art.member_paths.push_back(path);
    art.loss_initial.push_back(loss1);
    art.loss_refined.push_back(loss2);
    art.violation_initial.push_back(viol1);
    art.violation_refined.push_back(viol2);
    metrics += std::to_string(m) + "," + fmt_g9(loss1) + "," + fmt_g9(loss2) +
               "," + fmt_g9(viol1) + "," + fmt_g9(viol2) + "," +
               std::to_string(rr.rounds.size()) + "," +
               (rr.converged ? "1" : "0") + "\n";
  }
  write_file(join(out_dir, "train_metrics.csv"), metrics);

  if (t.nonseq) {
    nonseq::NonseqSpec nspec;
    nspec.ego_dim = feat::ego_feature_dim(sc.ego_dynamics);
    nspec.kappa = t.kappa;
    nspec.gamma = t.gamma;
    nspec.dt = sc.dt;
    auto nnet = nonseq::nonseq_init(nspec, mix_seed(t.seed, kNonseqInit));
    train::TrainConfig ncfg;
    ncfg.initial_iterations = t.iterations;
    ncfg.batch_safe = t.batch_safe;
    ncfg.batch_unsafe = t.batch_unsafe;
    ncfg.batch_pairs = t.batch_pairs;
    ncfg.lr = t.lr;
    ncfg.seed = mix_seed(t.seed, kNonseqTrain);
    auto ncurve = nonseq::train_nonseq(nnet, demos.scene, ncfg);
    write_curve_csv(join(out_dir, "nonseq_loss.csv"), ncurve);
    log << "[train] pooled baseline: loss "
        << fmt_g9(nonseq::scene_full_loss(nnet, demos.scene)) << sw.lap()
        << "\n";
    art.nonseq_path = join(model_dir, "nonseq.sncb");
    save_container(art.nonseq_path, pack_nonseq(nnet));
  }

  // One closed-loop episode with the freshly trained model; gives the replay
  // command an input and catches gross wiring mistakes early.
  {
    auto container = load_container(art.member_paths.front());
    auto net0 = unpack_barrier(container);
    infer::SncbfController ctrl(std::move(net0), dyn, select_config(cfg));
    sim::EpisodeOptions opts;
    auto res = sim::run_episode(sc, ctrl, opts);
    art.trajectory_path = join(out_dir, "sample_trajectory.csv");
    sim::write_trajectory_csv(art.trajectory_path, res.trajectory);
    log << "[train] sample episode: " << sim::to_string(res.outcome) << " in "
        << res.steps << " steps -> " << art.trajectory_path << sw.lap()
        << "\n";
  }
  return art;
}

LoadedModels load_models_for(const std::vector<std::string>& methods,
                             const ExperimentConfig& cfg,
                             const std::string& model_dir) {
  LoadedModels models;
  bool want_single = false, want_ensemble = false, want_nonseq = false,
       want_dyn = false;
  for (const auto& m : methods) {
    want_single |= m == "sncbf";
    want_ensemble |= m == "sncbf-ensemble";
    want_nonseq |= m == "nonseq-cbf";
    want_dyn |= needs_dynamics(m);
  }
  if (want_single || want_ensemble) {
    const int count = want_ensemble ? cfg.train.ensemble : 1;
    const std::string method = want_ensemble ? "sncbf-ensemble" : "sncbf";
    for (int m = 0; m < count; ++m) {
      const std::string path =
          join(model_dir, "sncbf_m" + std::to_string(m) + ".sncb");
      models.members.push_back(unpack_barrier(load_for_method(path, method)));
    }
  }
  if (want_nonseq)
    models.nonseq = unpack_nonseq(
        load_for_method(join(model_dir, "nonseq.sncb"), "nonseq-cbf"));
  if (want_dyn) {
    std::string needer;
    for (const auto& m : methods)
      if (needs_dynamics(m)) {
        needer = m;
        break;
      }
    models.dyn = unpack_dynamics(
        load_for_method(join(model_dir, "dynamics.sncb"), needer));
  }
  return models;
}

std::unique_ptr<sim::Controller> make_controller(const std::string& method,
                                                 const ExperimentConfig& cfg,
                                                 const LoadedModels& models) {
  const auto& be = cfg.bench;
  auto dyn_copy = [&]() {
    ego::LearnedDynamics d = *models.dyn;
    ego::rebind(d);
    return d;
  };
  if (method == "sncbf") {
    barrier::BarrierNet net = models.members.front();
    return std::make_unique<infer::SncbfController>(std::move(net), dyn_copy(),
                                                    select_config(cfg));
  }
  if (method == "sncbf-ensemble") {
    std::vector<barrier::BarrierNet> nets = models.members;
    infer::EnsembleConfig ens;
    ens.variance_threshold = be.ensemble_variance;
    ens.require_all_positive = be.ensemble_require_all;
    return std::make_unique<infer::EnsembleController>(
        std::move(nets), dyn_copy(), ens, select_config(cfg));
  }
  if (method == "nonseq-cbf") {
    nonseq::NonseqNet net = *models.nonseq;
    return std::make_unique<infer::NonseqController>(std::move(net), dyn_copy(),
                                                     select_config(cfg));
  }
  if (method == "spfm") return std::make_unique<base::SpfmController>(be.l);
  if (method == "gpfm") return std::make_unique<base::GpfmController>();
  if (method == "smpc" || method == "smpc-true") {
    base::SmpcConfig smpc;
    smpc.horizon = be.smpc_depth;
    smpc.samples_per_step = be.smpc_samples;
    smpc.sigma_frac = be.smpc_sigma;
    smpc.nominal_l = be.smpc_nominal_l;
    smpc.use_true_dynamics = method == "smpc-true";
    base::Stepper step;
    if (method == "smpc") {
      auto dyn = std::make_shared<ego::LearnedDynamics>(dyn_copy());
      step = [dyn](const ego::EgoState& x, const ego::Control& u) {
        return ego::step_learned(*dyn, x, u);
      };
    }
    return std::make_unique<base::SmpcController>(smpc, base::PotentialFieldParams{},
                                                  step);
  }
  throw ConfigError("unknown method '" + method + "'");
}

void write_bench_csv(const BenchTable& table, const std::string& path) {
  std::string out =
      "dynamics,method,obstacles,seed,episodes,collision_rate,mean_steps,"
      "frozen_fraction\n";
  for (const auto& r : table.rows) {
    out += r.dynamics + "," + r.method + "," + std::to_string(r.obstacles) +
           "," + std::to_string(r.seed) + "," + std::to_string(r.episodes) +
           "," + fmt_g9(r.collision_rate) + "," + fmt_g9(r.mean_steps) + "," +
           fmt_g9(r.frozen_fraction) + "\n";
  }
  write_file(path, out);
}

std::string bench_plot_svg(const ExperimentConfig& cfg,
                           const BenchTable& table) {
  std::vector<svg::Series> series;
  for (const auto& method : cfg.bench.methods) {
    svg::Series s;
    s.label = method;
    for (int density : cfg.bench.densities) {
      double sum = 0, lo = 1e300, hi = -1e300;
      int n = 0;
      for (const auto& r : table.rows) {
        if (r.method != method || r.obstacles != density) continue;
        double pct = 100.0 * r.collision_rate;
        sum += pct;
        lo = std::min(lo, pct);
        hi = std::max(hi, pct);
        ++n;
      }
      if (n == 0) continue;
      s.x.push_back(density);
      s.y.push_back(sum / n);
      s.band_lo.push_back(lo);
      s.band_hi.push_back(hi);
    }
    series.push_back(std::move(s));
  }
  svg::PlotSpec spec;
  spec.title = "collision rate vs obstacle density";
  spec.x_label = "obstacles";
  spec.y_label = "collision rate (%)";
  return svg::line_plot(spec, series);
}

BenchTable cmd_bench(const ExperimentConfig& cfg, const std::string& out_dir,
                     int threads, std::ostream& log) {
  ensure_dir(out_dir);
  const std::string model_dir = cfg.bench.model_dir.empty()
                                    ? join(out_dir, "models")
                                    : cfg.bench.model_dir;
  const LoadedModels models =
      load_models_for(cfg.bench.methods, cfg, model_dir);

  struct Cell {
    int method_idx, density, episodes;
    uint64_t seed;
  };
  std::vector<Cell> cells;
  for (size_t mi = 0; mi < cfg.bench.methods.size(); ++mi)
    for (int density : cfg.bench.densities)
      for (uint64_t seed : cfg.bench.seeds)
        cells.push_back({static_cast<int>(mi), density, cfg.bench.episodes, seed});

  BenchTable table;
  table.rows.resize(cells.size());
  std::atomic<size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto run_cell = [&](const Cell& cell) {
    const std::string& method = cfg.bench.methods[cell.method_idx];
    auto ctrl = make_controller(method, cfg, models);
    std::vector<sim::Outcome> outcomes;
    outcomes.reserve(cell.episodes);
    long steps_total = 0;
    for (int e = 0; e < cell.episodes; ++e) {
      sim::Scenario sc = cfg.scenario;
      sc.obstacle_count = cell.density;
      sc.seed = mix_seed(cell.seed, static_cast<uint64_t>(cell.density),
                         static_cast<uint64_t>(e));
      sim::EpisodeOptions opts;
      opts.record_trajectory = false;
      auto res = sim::run_episode(sc, *ctrl, opts);
      outcomes.push_back(res.outcome);
      steps_total += res.steps;
    }
    BenchRow row;
    row.dynamics = ego::to_string(cfg.scenario.ego_dynamics);
    row.method = method;
    row.obstacles = cell.density;
    row.seed = cell.seed;
    row.episodes = cell.episodes;
    row.collision_rate = sim::collision_rate(outcomes);
    row.mean_steps = static_cast<double>(steps_total) / cell.episodes;
    row.frozen_fraction = sim::frozen_fraction(outcomes);
    return row;
  };

  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      try {
        table.rows[i] = run_cell(cells[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  for (const auto& r : table.rows)
    log << "[bench] " << r.method << " density " << r.obstacles << " seed "
        << r.seed << ": rate " << fmt_g9(r.collision_rate) << ", frozen "
        << fmt_g9(r.frozen_fraction) << ", mean steps " << fmt_g9(r.mean_steps)
        << "\n";

  write_bench_csv(table, join(out_dir, "bench.csv"));
  write_file(join(out_dir, "bench.svg"), bench_plot_svg(cfg, table));
  log << "[bench] wrote " << join(out_dir, "bench.csv") << " and bench.svg\n";
  return table;
}

decomp::DecompEvalReport cmd_decomp(const ExperimentConfig& cfg,
                                    const std::string& out_dir,
                                    std::ostream& log) {
  ensure_dir(out_dir);
  const std::string model_dir = join(out_dir, "models");
  ensure_dir(model_dir);
  const auto& de = cfg.decomp;

  std::vector<decomp::DecompEvalReport> reports;
  for (uint64_t seed : de.seeds) {
    decomp::RolloutConfig rc;
    rc.density = de.train_density;
    rc.n_rollouts = de.rollouts;
    rc.horizon = de.horizon;
    rc.arena_half_extent = cfg.scenario.arena_half_extent;
    rc.dt = cfg.scenario.dt;
    rc.seed = seed;

    rc.interaction = false;
    auto plain = decomp::build_training_set(rc);
    rc.interaction = true;
    auto inter = decomp::build_training_set(rc);
    rc.interaction = false;

    decomp::PredictorTrainConfig ptc;
    ptc.iterations = de.iterations;
    ptc.batch = de.batch;
    ptc.lr = de.lr;
    ptc.holdout_fraction = de.holdout_fraction;
    ptc.seed = seed;

    auto cosm = decomp::train_predictor(decomp::PredictorKind::kCoSM, plain, ptc);
    auto csm = decomp::train_predictor(decomp::PredictorKind::kCSM, plain, ptc);
    auto icsm = decomp::train_predictor(decomp::PredictorKind::kICSM, inter, ptc);
    log << "[decomp] seed " << seed << " holdout mse: cosm "
        << fmt_g9(cosm.holdout_mse) << ", csm " << fmt_g9(csm.holdout_mse)
        << ", icsm " << fmt_g9(icsm.holdout_mse) << "\n";

    save_container(join(model_dir, "predictor_cosm_s" + std::to_string(seed) + ".sncb"),
                   pack_predictor(cosm.model));
    save_container(join(model_dir, "predictor_csm_s" + std::to_string(seed) + ".sncb"),
                   pack_predictor(csm.model));
    save_container(join(model_dir, "predictor_icsm_s" + std::to_string(seed) + ".sncb"),
                   pack_predictor(icsm.model));

    std::vector<decomp::PredictorModel> models;
    models.push_back(std::move(cosm.model));
    models.push_back(std::move(csm.model));
    models.push_back(std::move(icsm.model));
    reports.push_back(decomp::evaluate_generalization(
        models, de.densities, de.eval_episodes, rc));
  }

  // Mean across seeds; every report shares the kind-major row layout.
  decomp::DecompEvalReport avg = reports.front();
  for (size_t i = 1; i < reports.size(); ++i) {
    for (size_t r = 0; r < avg.rows.size(); ++r) {
      avg.rows[r].mean_l2 += reports[i].rows[r].mean_l2;
      avg.rows[r].mean_maxnorm += reports[i].rows[r].mean_maxnorm;
      avg.rows[r].eps95 += reports[i].rows[r].eps95;
    }
  }
  for (auto& r : avg.rows) {
    r.mean_l2 /= reports.size();
    r.mean_maxnorm /= reports.size();
    r.eps95 /= reports.size();
  }

  decomp::write_decomp_csv(avg, join(out_dir, "decomp.csv"));

  std::vector<svg::Series> series;
  const decomp::PredictorKind kinds[] = {decomp::PredictorKind::kCoSM,
                                         decomp::PredictorKind::kCSM,
                                         decomp::PredictorKind::kICSM};
  for (auto kind : kinds) {
    svg::Series s;
    s.label = decomp::to_string(kind);
    for (size_t r = 0; r < avg.rows.size(); ++r) {
      if (avg.rows[r].kind != kind) continue;
      double lo = 1e300, hi = -1e300;
      for (const auto& rep : reports) {
        lo = std::min(lo, rep.rows[r].mean_maxnorm);
        hi = std::max(hi, rep.rows[r].mean_maxnorm);
      }
      s.x.push_back(avg.rows[r].density);
      s.y.push_back(avg.rows[r].mean_maxnorm);
      s.band_lo.push_back(lo);
      s.band_hi.push_back(hi);
    }
    series.push_back(std::move(s));
  }
  svg::PlotSpec spec;
  spec.title = "one-step prediction error vs density";
  spec.x_label = "obstacles";
  spec.y_label = "mean max-norm error (m)";
  write_file(join(out_dir, "decomp.svg"), svg::line_plot(spec, series));

  for (const auto& r : avg.rows)
    log << "[decomp] " << decomp::to_string(r.kind) << " density " << r.density
        << ": l2 " << fmt_g9(r.mean_l2) << ", maxnorm "
        << fmt_g9(r.mean_maxnorm) << ", eps95 " << fmt_g9(r.eps95) << "\n";
  log << "[decomp] wrote " << join(out_dir, "decomp.csv") << " and decomp.svg\n";
  return avg;
}

std::vector<std::string> cmd_replay(const ExperimentConfig& cfg,
                                    const std::string& out_dir,
                                    std::ostream& log) {
  ensure_dir(out_dir);
  const auto& rp = cfg.replay;
  const std::string traj_path =
      rp.trajectory.empty() ? join(out_dir, "sample_trajectory.csv")
                            : rp.trajectory;
  const std::string model_path =
      rp.model.empty() ? join(out_dir, "models/sncbf_m0.sncb") : rp.model;

  sim::Trajectory traj = sim::read_trajectory_csv(traj_path);
  auto net = unpack_barrier(load_container(model_path));

  replay::ReplayOptions opt;
  opt.pitch = rp.pitch;
  opt.max_cells = rp.max_cells;
  opt.sensing_range = rp.sensing_range;
  opt.b = rp.b;
  opt.dt = cfg.scenario.dt;
  opt.obstacle_radius = cfg.scenario.env.obstacle_radius;

  std::vector<int> frames = rp.frames.empty()
                                ? replay::default_frames(
                                      static_cast<int>(traj.frames.size()))
                                : rp.frames;
  std::vector<std::string> written;
  for (int f : frames) {
    auto grid = replay::eval_frame_grid(net, traj, f, opt);
    auto [mn, mx] =
        std::minmax_element(grid.value.begin(), grid.value.end());
    char name[40];
    std::snprintf(name, sizeof(name), "replay_f%04d.svg", f);
    const std::string path = join(out_dir, name);
    write_file(path, replay::render_frame_svg(grid, traj, opt));
    log << "[replay] frame " << f << ": grid " << grid.nx << "x" << grid.ny
        << ", value range [" << fmt_g9(*mn) << ", " << fmt_g9(*mx) << "] -> "
        << path << "\n";
    written.push_back(path);
  }
  return written;
}

}  // namespace sncbf::cli
