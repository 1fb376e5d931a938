#pragma once

#include <memory>
#include <optional>

#include "sncbf/episode.hpp"
#include "sncbf/pf.hpp"

namespace sncbf::base {

// Potential-field sampler. With no explicit stepper it predicts with the true
// dynamics, which is what the classical baseline assumes.
class SpfmController : public sim::Controller {
 public:
  explicit SpfmController(int l = 64, PotentialFieldParams p = {},
                          Stepper step = nullptr);
  void reset(const sim::Scenario& cfg, const sim::WorldState& world) override;
  std::optional<ego::Control> act(const sim::Scenario& cfg,
                                  const sim::WorldState& world) override;

 private:
  int l_;
  PotentialFieldParams p_;
  Stepper step_;
  Rng rng_;
};

class GpfmController : public sim::Controller {
 public:
  explicit GpfmController(double gain = 2.0, PotentialFieldParams p = {});
  void reset(const sim::Scenario& cfg, const sim::WorldState& world) override;
  std::optional<ego::Control> act(const sim::Scenario& cfg,
                                  const sim::WorldState& world) override;

 private:
  double gain_;
  PotentialFieldParams p_;
};

class SmpcController : public sim::Controller {
 public:
  explicit SmpcController(SmpcConfig cfg = {}, PotentialFieldParams p = {},
                          Stepper step = nullptr);
  void reset(const sim::Scenario& cfg, const sim::WorldState& world) override;
  std::optional<ego::Control> act(const sim::Scenario& cfg,
                                  const sim::WorldState& world) override;

  long leaves_evaluated() const { return leaves_; }
  int decisions() const { return decisions_; }

 private:
  SmpcConfig cfg_;
  PotentialFieldParams p_;
  Stepper step_;
  Rng rng_;
  long leaves_ = 0;
  int decisions_ = 0;
};

// Adds clipped Gaussian exploration noise to another controller's output;
// used to spread demonstration coverage beyond the nominal's habits.
class NoisyController : public sim::Controller {
 public:
  NoisyController(sim::Controller& inner, double noise_frac);
  void reset(const sim::Scenario& cfg, const sim::WorldState& world) override;
  std::optional<ego::Control> act(const sim::Scenario& cfg,
                                  const sim::WorldState& world) override;

 private:
  sim::Controller* inner_;
  double noise_frac_;
  Rng rng_;
};

}  // namespace sncbf::base
