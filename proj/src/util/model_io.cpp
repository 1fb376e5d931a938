#include "sncbf/model_io.hpp"

#include <json.hpp>

#include "sncbf/errors.hpp"

namespace sncbf {
namespace {

using nlohmann::json;

json parse_descriptor(const ModelContainer& c, const char* expected) {
  json d;
  try {
    d = json::parse(c.descriptor);
  } catch (const json::exception& e) {
    throw IoError(std::string("container descriptor is not valid JSON: ") +
                  e.what());
  }
  std::string model = d.value("model", std::string());
  if (model != expected)
    throw IoError("container holds model '" + model + "', expected '" +
                  expected + "'");
  return d;
}

ContainerTensor to_container_tensor(const std::string& name,
                                    const dc::Tensor& t) {
  ContainerTensor out;
  out.name = name;
  out.dims.reserve(t.dims.size());
  for (int d : t.dims) {
    if (d < 0) throw IoError("tensor '" + name + "' has a negative dim");
    out.dims.push_back(static_cast<uint32_t>(d));
  }
  out.data.reserve(t.data.size());
  for (double v : t.data) out.data.push_back(static_cast<float>(v));
  return out;
}

dc::Tensor to_param_tensor(const ContainerTensor& t) {
  dc::Tensor out;
  out.dims.reserve(t.dims.size());
  for (uint32_t d : t.dims) out.dims.push_back(static_cast<int>(d));
  out.data.reserve(t.data.size());
  for (float v : t.data) out.data.push_back(static_cast<double>(v));
  return out;
}

void append_bundle(ModelContainer& c, const dc::ParamBundle& params) {
  for (size_t i = 0; i < params.size(); ++i)
    c.tensors.push_back(to_container_tensor(params.name(i), params.value_at(i)));
}

// Rebuilds a bundle from every tensor whose name lacks the "aux." prefix
// reserved for non-parameter payloads.
dc::ParamBundle bundle_from_container(const ModelContainer& c) {
  dc::ParamBundle params;
  for (const auto& t : c.tensors) {
    if (t.name.rfind("aux.", 0) == 0) continue;
    params.add(t.name, to_param_tensor(t));
  }
  return params;
}

ContainerTensor vector_tensor(const std::string& name,
                              const std::vector<double>& v) {
  ContainerTensor t;
  t.name = name;
  t.dims = {static_cast<uint32_t>(v.size())};
  t.data.reserve(v.size());
  for (double x : v) t.data.push_back(static_cast<float>(x));
  return t;
}

std::vector<double> require_vector(const ModelContainer& c,
                                   const std::string& name) {
  const ContainerTensor* t = c.find(name);
  if (!t) throw IoError("container is missing tensor '" + name + "'");
  std::vector<double> out;
  out.reserve(t->data.size());
  for (float v : t->data) out.push_back(static_cast<double>(v));
  return out;
}

const char* act_name(dc::Act act) {
  return act == dc::Act::kTanh ? "tanh" : "relu";
}

dc::Act parse_act(const std::string& name) {
  if (name == "relu") return dc::Act::kRelu;
  if (name == "tanh") return dc::Act::kTanh;
  throw IoError("container names unknown activation '" + name + "'");
}

}  // namespace

ModelContainer pack_barrier(const barrier::BarrierNet& net) {
  const auto& s = net.spec;
  json d;
  d["model"] = "sncbf";
  d["q"] = s.q;
  d["k"] = s.k;
  d["lstm_hidden"] = s.lstm_hidden;
  d["ego_dim"] = s.ego_dim;
  d["enc_hidden"] = s.enc_hidden;
  d["enc_out"] = s.enc_out;
  d["head_hidden"] = s.head_hidden;
  d["kappa"] = s.kappa;
  d["gamma"] = s.gamma;
  d["dt"] = s.dt;
  ModelContainer c;
  c.descriptor = d.dump();
  append_bundle(c, net.params);
  return c;
}

barrier::BarrierNet unpack_barrier(const ModelContainer& c) {
  json d = parse_descriptor(c, "sncbf");
  barrier::BarrierSpec s;
  s.q = d.at("q").get<int>();
  s.k = d.at("k").get<int>();
  s.lstm_hidden = d.at("lstm_hidden").get<int>();
  s.ego_dim = d.at("ego_dim").get<int>();
  s.enc_hidden = d.at("enc_hidden").get<std::vector<int>>();
  s.enc_out = d.at("enc_out").get<int>();
  s.head_hidden = d.at("head_hidden").get<std::vector<int>>();
  s.kappa = d.at("kappa").get<double>();
  s.gamma = d.at("gamma").get<double>();
  s.dt = d.at("dt").get<double>();
  return barrier::barrier_from_params(s, bundle_from_container(c));
}

ModelContainer pack_nonseq(const nonseq::NonseqNet& net) {
  const auto& s = net.spec;
  json d;
  d["model"] = "nonseq-cbf";
  d["q"] = s.q;
  d["ego_dim"] = s.ego_dim;
  d["enc_hidden"] = s.enc_hidden;
  d["enc_out"] = s.enc_out;
  d["ego_hidden"] = s.ego_hidden;
  d["ego_out"] = s.ego_out;
  d["head_hidden"] = s.head_hidden;
  d["kappa"] = s.kappa;
  d["gamma"] = s.gamma;
  d["dt"] = s.dt;
  ModelContainer c;
  c.descriptor = d.dump();
  append_bundle(c, net.params);
  return c;
}

nonseq::NonseqNet unpack_nonseq(const ModelContainer& c) {
  json d = parse_descriptor(c, "nonseq-cbf");
  nonseq::NonseqSpec s;
  s.q = d.at("q").get<int>();
  s.ego_dim = d.at("ego_dim").get<int>();
  s.enc_hidden = d.at("enc_hidden").get<std::vector<int>>();
  s.enc_out = d.at("enc_out").get<int>();
  s.ego_hidden = d.at("ego_hidden").get<std::vector<int>>();
  s.ego_out = d.at("ego_out").get<int>();
  s.head_hidden = d.at("head_hidden").get<std::vector<int>>();
  s.kappa = d.at("kappa").get<double>();
  s.gamma = d.at("gamma").get<double>();
  s.dt = d.at("dt").get<double>();
  return nonseq::nonseq_from_params(s, bundle_from_container(c));
}

ModelContainer pack_dynamics(const ego::LearnedDynamics& dyn) {
  json d;
  d["model"] = "dynamics";
  d["kind"] = ego::to_string(dyn.kind);
  d["in"] = dyn.spec.in;
  d["hidden"] = dyn.spec.hidden;
  d["out"] = dyn.spec.out;
  d["act"] = act_name(dyn.spec.act);
  d["wheelbase"] = dyn.ego_params.wheelbase;
  d["dubins_v_min"] = dyn.ego_params.dubins_v_min;
  d["dubins_v_max"] = dyn.ego_params.dubins_v_max;
  d["bicycle_delta_max"] = dyn.ego_params.bicycle_delta_max;
  ModelContainer c;
  c.descriptor = d.dump();
  append_bundle(c, dyn.params);
  c.tensors.push_back(vector_tensor("aux.in_mean", dyn.norm.in_mean));
  c.tensors.push_back(vector_tensor("aux.in_scale", dyn.norm.in_scale));
  c.tensors.push_back(vector_tensor("aux.out_mean", dyn.norm.out_mean));
  c.tensors.push_back(vector_tensor("aux.out_scale", dyn.norm.out_scale));
  return c;
}

ego::LearnedDynamics unpack_dynamics(const ModelContainer& c) {
  json d = parse_descriptor(c, "dynamics");
  ego::LearnedDynamics dyn;
  dyn.kind = ego::parse_dyn_kind(d.at("kind").get<std::string>());
  dyn.spec.in = d.at("in").get<int>();
  dyn.spec.hidden = d.at("hidden").get<std::vector<int>>();
  dyn.spec.out = d.at("out").get<int>();
  dyn.spec.act = parse_act(d.at("act").get<std::string>());
  dyn.ego_params.wheelbase = d.at("wheelbase").get<double>();
  dyn.ego_params.dubins_v_min = d.at("dubins_v_min").get<double>();
  dyn.ego_params.dubins_v_max = d.at("dubins_v_max").get<double>();
  dyn.ego_params.bicycle_delta_max = d.at("bicycle_delta_max").get<double>();
  dyn.params = bundle_from_container(c);
  dyn.norm.in_mean = require_vector(c, "aux.in_mean");
  dyn.norm.in_scale = require_vector(c, "aux.in_scale");
  dyn.norm.out_mean = require_vector(c, "aux.out_mean");
  dyn.norm.out_scale = require_vector(c, "aux.out_scale");
  ego::rebind(dyn);
  return dyn;
}

ModelContainer pack_predictor(const decomp::PredictorModel& model) {
  json d;
  d["model"] = "predictor";
  d["kind"] = decomp::to_string(model.kind);
  d["k"] = model.k;
  ModelContainer c;
  c.descriptor = d.dump();
  append_bundle(c, model.params);
  return c;
}

decomp::PredictorModel unpack_predictor(const ModelContainer& c) {
  json d = parse_descriptor(c, "predictor");
  std::string kind_name = d.at("kind").get<std::string>();
  decomp::PredictorKind kind;
  if (kind_name == "cosm") {
    kind = decomp::PredictorKind::kCoSM;
  } else if (kind_name == "csm") {
    kind = decomp::PredictorKind::kCSM;
  } else if (kind_name == "icsm") {
    kind = decomp::PredictorKind::kICSM;
  } else {
    throw IoError("container names unknown predictor kind '" + kind_name +
                  "'");
  }
  return decomp::predictor_from_params(kind, d.at("k").get<int>(),
                                       bundle_from_container(c));
}

std::string container_model_name(const ModelContainer& c) {
  try {
    return json::parse(c.descriptor).value("model", std::string());
  } catch (const json::exception& e) {
    throw IoError(std::string("container descriptor is not valid JSON: ") +
                  e.what());
  }
}

}  // namespace sncbf
