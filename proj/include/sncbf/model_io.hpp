#pragma once

#include <string>

#include "sncbf/barrier.hpp"
#include "sncbf/container.hpp"
#include "sncbf/decomp.hpp"
#include "sncbf/learned_dynamics.hpp"
#include "sncbf/nonseq.hpp"

namespace sncbf {

// Adapters between trained models and the on-disk container format. The
// descriptor carries the architecture and scalar hyperparameters as JSON;
// the tensor table carries the parameters (f32) plus any auxiliary vectors
// such as dynamics normalization stats. Unpacking a container whose "model"
// field does not match throws IoError.

ModelContainer pack_barrier(const barrier::BarrierNet& net);
barrier::BarrierNet unpack_barrier(const ModelContainer& c);

ModelContainer pack_nonseq(const nonseq::NonseqNet& net);
nonseq::NonseqNet unpack_nonseq(const ModelContainer& c);

ModelContainer pack_dynamics(const ego::LearnedDynamics& dyn);
ego::LearnedDynamics unpack_dynamics(const ModelContainer& c);

ModelContainer pack_predictor(const decomp::PredictorModel& model);
decomp::PredictorModel unpack_predictor(const ModelContainer& c);

// The "model" field of the descriptor ("sncbf", "nonseq-cbf", "dynamics",
// "predictor").
std::string container_model_name(const ModelContainer& c);

}  // namespace sncbf
