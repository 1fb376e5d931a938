#include "sncbf/baseline_controllers.hpp"

#include <utility>

namespace sncbf::base {

namespace {

Stepper true_stepper(double dt) {
  return [dt](const ego::EgoState& x, const ego::Control& u) {
    return ego::step_true(x, u, dt);
  };
}

}  // namespace

SpfmController::SpfmController(int l, PotentialFieldParams p, Stepper step)
    : l_(l), p_(p), step_(std::move(step)), rng_(0) {}

void SpfmController::reset(const sim::Scenario& cfg, const sim::WorldState&) {
  rng_ = Rng(mix_seed(cfg.seed, 0x5F91));
}

std::optional<ego::Control> SpfmController::act(const sim::Scenario& cfg,
                                                const sim::WorldState& world) {
  const Stepper& step = step_ ? step_ : true_stepper(cfg.dt);
  return spfm_control(world.ego, cfg.ego_goal, world.obstacles, p_,
                      ego::default_bounds(world.ego.kind), l_, cfg.dt, step,
                      rng_);
}

GpfmController::GpfmController(double gain, PotentialFieldParams p)
    : gain_(gain), p_(p) {}

void GpfmController::reset(const sim::Scenario&, const sim::WorldState&) {}

std::optional<ego::Control> GpfmController::act(const sim::Scenario& cfg,
                                                const sim::WorldState& world) {
  return gpfm_control(world.ego, cfg.ego_goal, world.obstacles, p_, gain_,
                      ego::default_bounds(world.ego.kind), cfg.dt);
}

SmpcController::SmpcController(SmpcConfig cfg, PotentialFieldParams p,
                               Stepper step)
    : cfg_(cfg), p_(p), step_(std::move(step)), rng_(0) {}

void SmpcController::reset(const sim::Scenario& cfg, const sim::WorldState&) {
  rng_ = Rng(mix_seed(cfg.seed, 0x53BC));
  leaves_ = 0;
  decisions_ = 0;
}

std::optional<ego::Control> SmpcController::act(const sim::Scenario& cfg,
                                                const sim::WorldState& world) {
  const Stepper& step = step_ ? step_ : true_stepper(cfg.dt);
  ++decisions_;
  return smpc_control(world.ego, cfg.ego_goal, world.obstacles, cfg_, p_,
                      ego::default_bounds(world.ego.kind), cfg.dt, step, rng_,
                      &leaves_);
}

NoisyController::NoisyController(sim::Controller& inner, double noise_frac)
    : inner_(&inner), noise_frac_(noise_frac), rng_(0) {}

void NoisyController::reset(const sim::Scenario& cfg,
                            const sim::WorldState& world) {
  inner_->reset(cfg, world);
  rng_ = Rng(mix_seed(cfg.seed, 0x2017));
}

std::optional<ego::Control> NoisyController::act(const sim::Scenario& cfg,
                                                 const sim::WorldState& world) {
  std::optional<ego::Control> u = inner_->act(cfg, world);
  if (!u) return u;
  const ego::ControlBounds bounds = ego::default_bounds(world.ego.kind);
  for (int i = 0; i < 2; ++i)
    u->u[i] += noise_frac_ * 0.5 * (bounds.hi[i] - bounds.lo[i]) *
               rng_.normal();
  return bounds.clamp(*u);
}

}  // namespace sncbf::base
