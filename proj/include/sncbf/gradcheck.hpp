#pragma once

#include <cstdint>
#include <string>

namespace sncbf::dc {

// Central-difference audit of the autodiff layer. Instances cycle through
// plain MLPs, LSTMs and miniature barrier-loss compositions with randomized
// shapes. Slots whose loss sits within kink_tol of a hinge kink, or whose
// finite difference fails a step-halving stability check, are excluded and
// counted.
struct GradAuditConfig {
  int instances = 50;
  uint64_t seed = 20260817;
  double fd_step = 1e-5;
  double rel_tol = 1e-5;          // max allowed relative error
  double rel_floor = 1e-6;        // denominator floor for tiny gradients
  double kink_tol = 1e-6;         // hinge-kink exclusion margin
  double fd_stability_tol = 1e-7; // |fd(h) - fd(h/2)| gate, relative
};

struct GradAuditReport {
  int instances = 0;
  long checked = 0;
  long skipped_kink = 0;
  long skipped_unstable = 0;
  double max_rel_err = 0.0;
  std::string worst;  // instance/param of the worst error
  bool pass = false;
};

GradAuditReport run_gradient_audit(const GradAuditConfig& cfg);

}  // namespace sncbf::dc
