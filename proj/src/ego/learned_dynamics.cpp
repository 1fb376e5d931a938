#include "sncbf/learned_dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "sncbf/graph.hpp"
#include "sncbf/optim.hpp"

namespace sncbf::ego {

namespace {

// Index of the angle component to wrap in a state delta, or -1.
int angle_index(DynKind kind) {
  if (kind == DynKind::kDubins) return 3;
  if (kind == DynKind::kBicycle) return 2;
  return -1;
}

void state_clamps(DynKind kind, const EgoParams& p, EgoState& s) {
  if (kind == DynKind::kDubins)
    s.c[2] = std::clamp(s.c[2], p.dubins_v_min, p.dubins_v_max);
  if (kind == DynKind::kBicycle)
    s.c[3] = std::clamp(s.c[3], -p.bicycle_delta_max, p.bicycle_delta_max);
}

}  // namespace

void rebind(LearnedDynamics& dyn) {
  dyn.ref = dc::mlp_bind(dyn.spec, "dyn", dyn.params);
}

LearnedDynamics fit_dynamics(DynKind kind,
                             const std::vector<Transition>& data,
                             const DynFitConfig& cfg, uint64_t seed,
                             std::vector<std::pair<int, double>>* loss_curve) {
  if (data.empty()) throw std::invalid_argument("fit_dynamics: no data");
  const int sd = state_dim(kind);
  const int in_dim = sd + 2;
  const int out_dim = sd;
  const int n = static_cast<int>(data.size());
  const int ai = angle_index(kind);

  // Raw inputs and targets.
  dc::Tensor X = dc::Tensor::zeros({in_dim, n});
  dc::Tensor Y = dc::Tensor::zeros({out_dim, n});
  for (int j = 0; j < n; ++j) {
    const Transition& t = data[static_cast<size_t>(j)];
    if (t.x.kind != kind || t.xn.kind != kind)
      throw std::invalid_argument("fit_dynamics: kind mismatch in data");
    for (int i = 0; i < sd; ++i) X.at(i, j) = t.x.c[static_cast<size_t>(i)];
    X.at(sd, j) = t.u.u[0];
    X.at(sd + 1, j) = t.u.u[1];
    for (int i = 0; i < sd; ++i) {
      double d = t.xn.c[static_cast<size_t>(i)] - t.x.c[static_cast<size_t>(i)];
      if (i == ai) d = wrap_angle(d);
      Y.at(i, j) = d;
    }
  }

  LearnedDynamics dyn;
  dyn.kind = kind;
  dyn.spec = {in_dim, {cfg.hidden, cfg.hidden}, out_dim, dc::Act::kTanh};
  auto stats = [n](const dc::Tensor& M, std::vector<double>& mean,
                   std::vector<double>& scale) {
    const int rows = M.rows();
    mean.assign(static_cast<size_t>(rows), 0.0);
    scale.assign(static_cast<size_t>(rows), 0.0);
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += M.at(i, j);
      mean[static_cast<size_t>(i)] = s / n;
      double v = 0.0;
      for (int j = 0; j < n; ++j) {
        const double d = M.at(i, j) - mean[static_cast<size_t>(i)];
        v += d * d;
      }
      scale[static_cast<size_t>(i)] = std::max(std::sqrt(v / n), 1e-8);
    }
  };
  stats(X, dyn.norm.in_mean, dyn.norm.in_scale);
  stats(Y, dyn.norm.out_mean, dyn.norm.out_scale);

  for (int i = 0; i < in_dim; ++i)
    for (int j = 0; j < n; ++j)
      X.at(i, j) = (X.at(i, j) - dyn.norm.in_mean[i]) / dyn.norm.in_scale[i];
  for (int i = 0; i < out_dim; ++i)
    for (int j = 0; j < n; ++j)
      Y.at(i, j) = (Y.at(i, j) - dyn.norm.out_mean[i]) / dyn.norm.out_scale[i];

  Rng init_rng(mix_seed(seed, 1));
  dc::mlp_init(dyn.spec, "dyn", init_rng, dyn.params);
  rebind(dyn);

  Rng batch_rng(mix_seed(seed, 2));
  dc::Adam opt(cfg.lr);
  const int b = std::min(cfg.batch, n);
  dc::Tensor xb = dc::Tensor::zeros({in_dim, b});
  dc::Tensor yb = dc::Tensor::zeros({out_dim, b});
  for (int it = 0; it < cfg.iterations; ++it) {
    for (int j = 0; j < b; ++j) {
      const int src = batch_rng.uniform_int(n);
      for (int i = 0; i < in_dim; ++i) xb.at(i, j) = X.at(i, src);
      for (int i = 0; i < out_dim; ++i) yb.at(i, j) = Y.at(i, src);
    }
    dc::Graph g;
    dc::Graph::Id pred = dc::mlp_graph(g, dyn.ref, g.input(xb));
    dc::Graph::Id loss = g.mean_sq(g.sub(pred, g.input(yb)));
    dyn.params.zero_grads();
    g.backward(loss);
    opt.step(dyn.params);
    if (loss_curve != nullptr && (it % 10 == 0 || it + 1 == cfg.iterations))
      loss_curve->emplace_back(it, g.scalar(loss));
  }
  return dyn;
}

EgoState step_learned(const LearnedDynamics& dyn, const EgoState& x,
                      const Control& u_in) {
  if (x.kind != dyn.kind)
    throw std::invalid_argument("step_learned: kind mismatch");
  const Control u = default_bounds(dyn.kind).clamp(u_in);
  const int sd = state_dim(dyn.kind);
  const int in_dim = sd + 2;
  double in[6];
  for (int i = 0; i < sd; ++i) in[i] = x.c[static_cast<size_t>(i)];
  in[sd] = u.u[0];
  in[sd + 1] = u.u[1];
  for (int i = 0; i < in_dim; ++i)
    in[i] = (in[i] - dyn.norm.in_mean[i]) / dyn.norm.in_scale[i];

  double out[4];
  std::vector<double> scratch;
  dc::mlp_forward(dyn.ref, in, out, scratch);

  EgoState n = x;
  const int ai = angle_index(dyn.kind);
  for (int i = 0; i < sd; ++i) {
    const double d = out[i] * dyn.norm.out_scale[i] + dyn.norm.out_mean[i];
    n.c[static_cast<size_t>(i)] = x.c[static_cast<size_t>(i)] + d;
    if (i == ai) n.c[static_cast<size_t>(i)] = wrap_angle(n.c[i]);
  }
  state_clamps(dyn.kind, dyn.ego_params, n);
  return n;
}

double position_rmse(const LearnedDynamics& dyn,
                     const std::vector<Transition>& data) {
  if (data.empty()) throw std::invalid_argument("position_rmse: no data");
  double acc = 0.0;
  for (const Transition& t : data) {
    const EgoState pred = step_learned(dyn, t.x, t.u);
    acc += (pred.pos() - t.xn.pos()).norm2();
  }
  return std::sqrt(acc / static_cast<double>(data.size()));
}

std::vector<Transition> collect_random_transitions(DynKind kind, int count,
                                                   double arena_half_extent,
                                                   uint64_t seed) {
  Rng rng(mix_seed(seed, 3));
  const ControlBounds bounds = default_bounds(kind);
  const EgoParams params;
  std::vector<Transition> out;
  out.reserve(static_cast<size_t>(count));
  const int horizon = 10;
  while (static_cast<int>(out.size()) < count) {
    EgoState x;
    x.kind = kind;
    x.c[0] = rng.uniform(-arena_half_extent, arena_half_extent);
    x.c[1] = rng.uniform(-arena_half_extent, arena_half_extent);
    switch (kind) {
      case DynKind::kSingleIntegrator:
        break;
      case DynKind::kDoubleIntegrator:
        x.c[2] = rng.uniform(-1.5, 1.5);
        x.c[3] = rng.uniform(-1.5, 1.5);
        break;
      case DynKind::kDubins:
        x.c[2] = rng.uniform(params.dubins_v_min, params.dubins_v_max);
        x.c[3] = rng.uniform(-M_PI, M_PI);
        break;
      case DynKind::kBicycle:
        x.c[2] = rng.uniform(-M_PI, M_PI);
        x.c[3] = rng.uniform(-params.bicycle_delta_max,
                             params.bicycle_delta_max);
        break;
    }
    for (int t = 0; t < horizon && static_cast<int>(out.size()) < count; ++t) {
      Control u;
      u.u[0] = rng.uniform(bounds.lo[0], bounds.hi[0]);
      u.u[1] = rng.uniform(bounds.lo[1], bounds.hi[1]);
      const EgoState xn = step_true(x, u, 0.1, params);
      out.push_back({x, u, xn});
      x = xn;
    }
  }
  return out;
}

}  // namespace sncbf::ego
