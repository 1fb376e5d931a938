#include "sncbf/train.hpp"

#include <algorithm>
#include <cmath>

#include "sncbf/errors.hpp"
#include "sncbf/optim.hpp"

namespace sncbf::train {

namespace {

constexpr uint64_t kBatchStream = 0x7EA1;
constexpr uint64_t kRetrainStream = 0x7EA2;
constexpr uint64_t kBoundaryStream = 0xB0D7;

void require_labels(const LabeledDataset& data) {
  if (data.safe.empty() || data.unsafe.empty() || data.pairs.empty())
    throw StageError("training needs safe, unsafe and pair samples");
}

// Writes sample j of `cols` into column j of steps/ego.
void fill_columns(const std::vector<const Sample*>& cols, int k, int ego_dim,
                  std::vector<dc::Tensor>& steps, dc::Tensor& ego) {
  const int n = static_cast<int>(cols.size());
  steps.assign(static_cast<std::size_t>(k),
               dc::Tensor::zeros({feat::kQ, n}));
  ego = dc::Tensor::zeros({ego_dim, n});
  for (int j = 0; j < n; ++j) {
    const Sample& s = *cols[j];
    for (int t = 0; t < k; ++t)
      for (int r = 0; r < feat::kQ; ++r)
        steps[t].at(r, j) = s.window[static_cast<std::size_t>(t) * feat::kQ + r];
    for (int r = 0; r < ego_dim; ++r) ego.at(r, j) = s.ego[r];
  }
}

// Barrier values for a sample list, chunked to bound scratch memory.
std::vector<double> values_of(const barrier::BarrierNet& net,
                              const std::vector<const Sample*>& cols) {
  const int k = net.spec.k;
  const int ego_dim = net.spec.ego_dim;
  constexpr int kChunk = 4096;
  std::vector<double> out;
  out.reserve(cols.size());
  std::vector<dc::Tensor> steps;
  dc::Tensor ego;
  for (std::size_t base = 0; base < cols.size(); base += kChunk) {
    const std::size_t end = std::min(cols.size(), base + kChunk);
    std::vector<const Sample*> chunk(cols.begin() + base, cols.begin() + end);
    fill_columns(chunk, k, ego_dim, steps, ego);
    const std::vector<double> v = barrier::barrier_values(net, steps, ego);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<const Sample*> pointers(const std::vector<Sample>& v) {
  std::vector<const Sample*> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = &v[i];
  return out;
}

// Shared minibatch loop for both phases. Fresh optimizer state per call.
std::vector<double> run_training(barrier::BarrierNet& net,
                                 const LabeledDataset& data,
                                 const TrainConfig& cfg, int iterations,
                                 uint64_t stream) {
  require_labels(data);
  std::vector<double> curve;
  if (iterations <= 0) return curve;
  curve.reserve(static_cast<std::size_t>(iterations));
  Rng rng(stream);
  dc::Adam opt(cfg.lr);
  for (int it = 0; it < iterations; ++it) {
    const barrier::LossBatch batch =
        make_batch(data, cfg.batch_safe, cfg.batch_unsafe, cfg.batch_pairs,
                   rng);
    dc::Graph g;
    const barrier::LossNodes nodes = barrier::build_loss(g, net, batch);
    const double loss = g.scalar(nodes.loss);
    if (!std::isfinite(loss))
      throw StageError("training diverged: non-finite loss at iteration " +
                       std::to_string(it));
    curve.push_back(loss);
    net.params.zero_grads();
    g.backward(nodes.loss);
    opt.step(net.params);
  }
  return curve;
}

Sample sample_from(const ego::EgoState& x,
                   const std::vector<feat::RelativeState>& win,
                   const feat::FeatureScales& scales) {
  Sample s;
  s.window.resize(win.size() * feat::kQ);
  for (std::size_t t = 0; t < win.size(); ++t)
    feat::step_features(win[t], scales, &s.window[t * feat::kQ]);
  s.ego.resize(static_cast<std::size_t>(feat::ego_feature_dim(x.kind)));
  feat::ego_features(x, scales, s.ego.data());
  return s;
}

double eval_sample(barrier::BarrierEvaluator& ev, const Sample& s, int k) {
  std::vector<const double*> steps(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t)
    steps[t] = &s.window[static_cast<std::size_t>(t) * feat::kQ];
  return ev.value(steps, s.ego.data());
}

// Successor window: drop the oldest step, append the demonstration's recorded
// next obstacle state relative to where the modeled ego actually lands.
std::vector<feat::RelativeState> successor_of(
    const std::vector<feat::RelativeState>& win, const SeedRecord& sr,
    const ego::EgoState& x, const ego::EgoState& x_next, double dt) {
  std::vector<feat::RelativeState> out(win.begin() + 1, win.end());
  feat::RelativeState next;
  next.rel_pos = sr.obs_next_pos - x_next.pos();
  next.rel_vel = sr.obs_next_vel - (x_next.pos() - x.pos()) * (1.0 / dt);
  out.push_back(next);
  return out;
}

}  // namespace

barrier::LossBatch make_batch(const LabeledDataset& data, int n_safe,
                              int n_unsafe, int n_pairs, Rng& rng) {
  require_labels(data);
  barrier::LossBatch batch;
  batch.n_safe = n_safe;
  batch.n_unsafe = n_unsafe;
  batch.n_pairs = n_pairs;
  std::vector<const Sample*> cols;
  cols.reserve(static_cast<std::size_t>(batch.total()));
  for (int i = 0; i < n_safe; ++i)
    cols.push_back(&data.safe[rng.uniform_int(
        static_cast<int>(data.safe.size()))]);
  for (int i = 0; i < n_unsafe; ++i)
    cols.push_back(&data.unsafe[rng.uniform_int(
        static_cast<int>(data.unsafe.size()))]);
  std::vector<int> pair_idx(static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i)
    pair_idx[i] = rng.uniform_int(static_cast<int>(data.pairs.size()));
  for (int i = 0; i < n_pairs; ++i) cols.push_back(&data.pairs[pair_idx[i]].first);
  for (int i = 0; i < n_pairs; ++i)
    cols.push_back(&data.pairs[pair_idx[i]].second);
  fill_columns(cols, data.k, data.ego_dim, batch.steps, batch.ego);
  return batch;
}

std::vector<double> train_initial(barrier::BarrierNet& net,
                                  const LabeledDataset& data,
                                  const TrainConfig& cfg) {
  return run_training(net, data, cfg, cfg.initial_iterations,
                      mix_seed(cfg.seed, kBatchStream));
}

double full_loss(const barrier::BarrierNet& net, const LabeledDataset& data) {
  const double gamma = net.spec.gamma;
  const double kappa = net.spec.kappa;
  const double dt = net.spec.dt;
  double loss = 0.0;
  if (!data.safe.empty()) {
    const std::vector<double> b = values_of(net, pointers(data.safe));
    double acc = 0.0;
    for (double v : b) acc += std::max(gamma - v, 0.0);
    loss += acc / static_cast<double>(b.size());
  }
  if (!data.unsafe.empty()) {
    const std::vector<double> b = values_of(net, pointers(data.unsafe));
    double acc = 0.0;
    for (double v : b) acc += std::max(gamma + v, 0.0);
    loss += acc / static_cast<double>(b.size());
  }
  if (!data.pairs.empty()) {
    std::vector<const Sample*> first(data.pairs.size());
    std::vector<const Sample*> second(data.pairs.size());
    for (std::size_t i = 0; i < data.pairs.size(); ++i) {
      first[i] = &data.pairs[i].first;
      second[i] = &data.pairs[i].second;
    }
    const std::vector<double> b0 = values_of(net, first);
    const std::vector<double> b1 = values_of(net, second);
    double acc = 0.0;
    for (std::size_t i = 0; i < b0.size(); ++i) {
      const double bdot = (b1[i] - b0[i]) / dt;
      acc += std::max(gamma - bdot - kappa * b0[i], 0.0);
    }
    loss += acc / static_cast<double>(b0.size());
  }
  return loss;
}

double violation_fraction(
    const barrier::BarrierNet& net,
    const std::vector<std::pair<Sample, Sample>>& pairs) {
  if (pairs.empty()) throw StageError("violation_fraction: no pairs");
  std::vector<const Sample*> first(pairs.size());
  std::vector<const Sample*> second(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    first[i] = &pairs[i].first;
    second[i] = &pairs[i].second;
  }
  const std::vector<double> b0 = values_of(net, first);
  const std::vector<double> b1 = values_of(net, second);
  int bad = 0;
  for (std::size_t i = 0; i < b0.size(); ++i) {
    const double bdot = (b1[i] - b0[i]) / net.spec.dt;
    if (bdot + net.spec.kappa * b0[i] < 0.0) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(b0.size());
}

RefineResult refine_boundary(barrier::BarrierNet& net, LabeledDataset& data,
                             std::vector<SeedRecord>& seeds,
                             const TrainConfig& cfg, const NominalFn& nominal,
                             const StepFn& step,
                             const ego::ControlBounds& bounds, double dt) {
  require_labels(data);
  if (seeds.size() != data.safe.size())
    throw StageError("refine_boundary: seed records out of sync with safe set");

  RefineResult result;
  Rng rng(mix_seed(cfg.seed, kBoundaryStream));
  double prev_loss = full_loss(net, data);

  for (int round = 0; round < cfg.refine_rounds_max; ++round) {
    RefineRound rep;
    barrier::BarrierEvaluator ev(net);
    const std::vector<double> b = values_of(net, pointers(data.safe));

    struct Entry {
      ego::EgoState x;
      std::vector<feat::RelativeState> win;
      int member;    // index into data.safe, -1 for a jittered state
      int seed_idx;  // originating seed record
    };
    std::vector<Entry> work;
    for (std::size_t i = 0; i < data.safe.size(); ++i) {
      if (!(b[i] >= 0.0 && b[i] < cfg.theta)) continue;
      ++rep.boundary_members;
      const SeedRecord& sr = seeds[i];
      work.push_back(
          {sr.ego_state, sr.window, static_cast<int>(i), static_cast<int>(i)});
      for (int s = 0; s < cfg.boundary_samples; ++s) {
        const Vec2 delta{rng.normal(0.0, cfg.jitter_sigma),
                         rng.normal(0.0, cfg.jitter_sigma)};
        ego::EgoState xj = sr.ego_state;
        xj.set_pos(xj.pos() + delta);
        std::vector<feat::RelativeState> winj = sr.window;
        for (feat::RelativeState& r : winj) r.rel_pos = r.rel_pos - delta;
        const Sample sj = sample_from(xj, winj, cfg.scales);
        const double bj = eval_sample(ev, sj, net.spec.k);
        if (bj >= 0.0 && bj < cfg.theta) {
          work.push_back({xj, std::move(winj), -1, static_cast<int>(i)});
          ++rep.sampled;
        }
      }
    }

    if (work.empty()) {
      rep.no_op = true;
      rep.loss_after = prev_loss;
      result.rounds.push_back(rep);
      result.converged = true;
      break;
    }

    std::vector<char> removed(data.safe.size(), 0);
    std::vector<Sample> add_unsafe;
    std::vector<Sample> add_safe;
    std::vector<SeedRecord> add_seeds;

    for (const Entry& e : work) {
      const SeedRecord& sr = seeds[e.seed_idx];
      const bool bad_now =
          e.win.back().rel_pos.norm() < cfg.collision_radius;
      const ego::Control u = nominal(e.x, e.win, sr.goal);
      const ego::EgoState x_next = step(e.x, u);
      const std::vector<feat::RelativeState> win_next =
          successor_of(e.win, sr, e.x, x_next, dt);
      const bool bad_next =
          win_next.back().rel_pos.norm() < cfg.collision_radius;

      if (bad_now || bad_next) {
        add_unsafe.push_back(sample_from(e.x, e.win, cfg.scales));
        add_unsafe.push_back(sample_from(x_next, win_next, cfg.scales));
        rep.to_unsafe += 2;
        if (e.member >= 0 && !removed[e.member]) {
          removed[e.member] = 1;
          ++rep.removed_safe;
        }
        continue;
      }

      if (e.member < 0) {
        add_safe.push_back(sample_from(e.x, e.win, cfg.scales));
        SeedRecord nsr;
        nsr.ego_state = e.x;
        nsr.goal = sr.goal;
        nsr.window = e.win;
        nsr.obs_next_pos = sr.obs_next_pos;
        nsr.obs_next_vel = sr.obs_next_vel;
        add_seeds.push_back(std::move(nsr));
        ++rep.added_safe;
      }

      // Exploratory rollout: one random control, or the best-scoring of n.
      ego::Control ur = ego::sample_controls(bounds, 1, rng)[0];
      if (cfg.best_of_controls > 0) {
        const std::vector<ego::Control> cand =
            ego::sample_controls(bounds, cfg.best_of_controls, rng);
        double best = -1e300;
        for (const ego::Control& c : cand) {
          const ego::EgoState xc = step(e.x, c);
          const std::vector<feat::RelativeState> wc =
              successor_of(e.win, sr, e.x, xc, dt);
          const double bc =
              eval_sample(ev, sample_from(xc, wc, cfg.scales), net.spec.k);
          if (bc > best) {
            best = bc;
            ur = c;
          }
        }
      }
      const ego::EgoState x_rand = step(e.x, ur);
      const std::vector<feat::RelativeState> win_rand =
          successor_of(e.win, sr, e.x, x_rand, dt);
      if (win_rand.back().rel_pos.norm() < cfg.collision_radius) {
        add_unsafe.push_back(sample_from(x_rand, win_rand, cfg.scales));
        ++rep.random_unsafe;
        ++rep.to_unsafe;
      }
    }

    if (rep.removed_safe > 0) {
      std::vector<Sample> kept_safe;
      std::vector<SeedRecord> kept_seeds;
      kept_safe.reserve(data.safe.size());
      kept_seeds.reserve(seeds.size());
      for (std::size_t i = 0; i < data.safe.size(); ++i) {
        if (removed[i]) continue;
        kept_safe.push_back(std::move(data.safe[i]));
        kept_seeds.push_back(std::move(seeds[i]));
      }
      data.safe = std::move(kept_safe);
      seeds = std::move(kept_seeds);
    }
    for (Sample& s : add_safe) data.safe.push_back(std::move(s));
    for (SeedRecord& s : add_seeds) seeds.push_back(std::move(s));
    for (Sample& s : add_unsafe) data.unsafe.push_back(std::move(s));

    const std::vector<double> curve =
        run_training(net, data, cfg, cfg.refine_iterations,
                     mix_seed(cfg.seed, kRetrainStream,
                              static_cast<uint64_t>(round)));
    result.curve.insert(result.curve.end(), curve.begin(), curve.end());

    const double loss = full_loss(net, data);
    rep.loss_after = loss;
    result.rounds.push_back(rep);
    const double rel =
        std::abs(loss - prev_loss) / std::max(std::abs(prev_loss), 1e-12);
    prev_loss = loss;
    if (rel < cfg.refine_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace sncbf::train
