#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sncbf/barrier.hpp"
#include "sncbf/container.hpp"
#include "sncbf/csv.hpp"
#include "sncbf/decomp.hpp"
#include "sncbf/errors.hpp"
#include "sncbf/features.hpp"
#include "sncbf/learned_dynamics.hpp"
#include "sncbf/model_io.hpp"
#include "sncbf/nonseq.hpp"
#include "sncbf/rng.hpp"

using namespace sncbf;

namespace {

std::string tmp_path(const char* name) {
  return std::string("/tmp/sncbf_test_") + name;
}

// Independent little-endian encoder so the layout checks do not depend on
// container_to_bytes agreeing with itself.
void put_u16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& s, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(s, bits);
}

ModelContainer random_container(Rng& rng) {
  ModelContainer c;
  const int desc_len = static_cast<int>(rng.uniform(0.0, 40.0));
  for (int i = 0; i < desc_len; ++i)
    c.descriptor.push_back(static_cast<char>(' ' + static_cast<int>(rng.uniform(0.0, 94.0))));
  const int n_tensors = static_cast<int>(rng.uniform(0.0, 5.0));
  for (int t = 0; t < n_tensors; ++t) {
    ContainerTensor ten;
    ten.name = "t" + std::to_string(t);
    const int extra = static_cast<int>(rng.uniform(0.0, 6.0));
    for (int i = 0; i < extra; ++i)
      ten.name.push_back(static_cast<char>('a' + static_cast<int>(rng.uniform(0.0, 26.0))));
    const int rank = static_cast<int>(rng.uniform(0.0, 4.0));  // rank 0 holds one scalar
    uint64_t elems = 1;
    for (int r = 0; r < rank; ++r) {
      uint32_t d = static_cast<uint32_t>(rng.uniform(0.0, 5.0));  // dim 0 allowed
      ten.dims.push_back(d);
      elems *= d;
    }
    for (uint64_t i = 0; i < elems; ++i)
      ten.data.push_back(static_cast<float>(rng.normal() * 3.0));
    c.tensors.push_back(std::move(ten));
  }
  return c;
}

bool same_container(const ModelContainer& a, const ModelContainer& b) {
  if (a.version != b.version || a.descriptor != b.descriptor) return false;
  if (a.tensors.size() != b.tensors.size()) return false;
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    const auto& x = a.tensors[i];
    const auto& y = b.tensors[i];
    if (x.name != y.name || x.dims != y.dims) return false;
    if (x.data.size() != y.data.size()) return false;
    // bit comparison: NaN payloads and signed zeros must survive too
    if (!x.data.empty() &&
        std::memcmp(x.data.data(), y.data.data(), 4 * x.data.size()) != 0)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("random containers survive the byte round trip bit-exactly") {
  Rng rng(61847);
  for (int it = 0; it < 100; ++it) {
    ModelContainer c = random_container(rng);
    const std::string bytes = container_to_bytes(c);
    ModelContainer back = container_from_bytes(bytes);
    REQUIRE(same_container(c, back));
    CHECK(container_to_bytes(back) == bytes);
  }
}

TEST_CASE("handcrafted byte stream parses to the documented layout") {
  std::string s = "SNCB";
  put_u16(s, 1);                      // version
  const std::string desc = "{\"model\":\"x\"}";
  put_u32(s, static_cast<uint32_t>(desc.size()));
  s += desc;
  put_u32(s, 2);                      // tensor count
  put_u16(s, 1); s += "w";            // name
  s.push_back(2);                     // rank
  put_u32(s, 2); put_u32(s, 3);       // dims
  for (int i = 0; i < 6; ++i) put_f32(s, 0.5f * static_cast<float>(i));
  put_u16(s, 4); s += "bias";
  s.push_back(0);                     // rank 0: one scalar, no dims
  put_f32(s, -2.25f);

  ModelContainer c = container_from_bytes(s);
  CHECK(c.version == 1);
  CHECK(c.descriptor == desc);
  REQUIRE(c.tensors.size() == 2);
  CHECK(c.tensors[0].name == "w");
  CHECK(c.tensors[0].dims == std::vector<uint32_t>{2, 3});
  REQUIRE(c.tensors[0].data.size() == 6);
  CHECK(c.tensors[0].data[5] == 2.5f);
  CHECK(c.tensors[1].name == "bias");
  CHECK(c.tensors[1].dims.empty());
  REQUIRE(c.tensors[1].data.size() == 1);
  CHECK(c.tensors[1].data[0] == -2.25f);
  CHECK(c.find("bias") == &c.tensors[1]);
  CHECK(c.find("nope") == nullptr);

  // and the writer emits exactly these bytes back
  CHECK(container_to_bytes(c) == s);
}

TEST_CASE("zero tensors is a valid container") {
  ModelContainer c;
  c.descriptor = "{}";
  ModelContainer back = container_from_bytes(container_to_bytes(c));
  CHECK(back.tensors.empty());
  CHECK(back.descriptor == "{}");
}

TEST_CASE("file round trip is byte-identical") {
  Rng rng(9917);
  ModelContainer c = random_container(rng);
  const std::string p1 = tmp_path("container_a.sncb");
  const std::string p2 = tmp_path("container_b.sncb");
  save_container(p1, c);
  ModelContainer back = load_container(p1);
  save_container(p2, back);
  CHECK(read_file(p1) == read_file(p2));
}

TEST_CASE("bad magic is rejected") {
  ModelContainer c;
  std::string bytes = container_to_bytes(c);
  bytes[0] = 'X';
  CHECK_THROWS_AS(container_from_bytes(bytes), IoError);
  try {
    container_from_bytes(bytes);
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("magic") != std::string::npos);
  }
}

TEST_CASE("every truncation point is rejected") {
  Rng rng(5150);
  ModelContainer c = random_container(rng);
  while (c.tensors.empty()) c = random_container(rng);
  const std::string bytes = container_to_bytes(c);
  for (std::size_t cut = 0; cut < bytes.size(); ++cut)
    CHECK_THROWS_AS(container_from_bytes(bytes.substr(0, cut)), IoError);
}

TEST_CASE("trailing bytes are rejected") {
  ModelContainer c;
  std::string bytes = container_to_bytes(c);
  bytes.push_back('\0');
  CHECK_THROWS_AS(container_from_bytes(bytes), IoError);
}

TEST_CASE("version mismatch names both versions") {
  ModelContainer c;
  std::string bytes = container_to_bytes(c);
  bytes[4] = 7;  // version field sits right after the magic
  bytes[5] = 0;
  try {
    container_from_bytes(bytes);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("7") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
}

TEST_CASE("dim products that overflow the element cap are rejected") {
  std::string s = "SNCB";
  put_u16(s, 1);
  put_u32(s, 0);      // empty descriptor
  put_u32(s, 1);      // one tensor
  put_u16(s, 1); s += "w";
  s.push_back(2);
  put_u32(s, 1u << 16);
  put_u32(s, 1u << 16);  // 2^32 elements, far past the cap
  CHECK_THROWS_AS(container_from_bytes(s), IoError);
}

TEST_CASE("payload size must match dims on write") {
  ModelContainer c;
  ContainerTensor t;
  t.name = "w";
  t.dims = {2, 2};
  t.data = {1.0f, 2.0f, 3.0f};  // one element short
  c.tensors.push_back(t);
  CHECK_THROWS_AS(container_to_bytes(c), IoError);
}

TEST_CASE("barrier nets survive pack and unpack") {
  barrier::BarrierSpec spec;
  spec.ego_dim = 3;
  barrier::BarrierNet net = barrier::barrier_init(spec, 404);

  ModelContainer c = pack_barrier(net);
  CHECK(container_model_name(c) == "sncbf");
  barrier::BarrierNet back = unpack_barrier(c);
  CHECK(back.spec.k == spec.k);
  CHECK(back.spec.ego_dim == 3);
  CHECK(back.spec.kappa == spec.kappa);

  // repacking the f32-rounded params reproduces the container bit-for-bit
  CHECK(container_to_bytes(pack_barrier(back)) == container_to_bytes(c));

  Rng rng(11);
  const int n = 4;
  std::vector<dc::Tensor> steps(spec.k, dc::Tensor::zeros({feat::kQ, n}));
  dc::Tensor ego = dc::Tensor::zeros({spec.ego_dim, n});
  for (auto& s : steps)
    for (auto& v : s.data) v = rng.normal();
  for (auto& v : ego.data) v = rng.normal();
  const auto a = barrier::barrier_values(net, steps, ego);
  const auto b = barrier::barrier_values(back, steps, ego);
  for (int i = 0; i < n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-4));
}

TEST_CASE("nonseq nets survive pack and unpack") {
  nonseq::NonseqSpec spec;
  spec.ego_dim = 2;
  nonseq::NonseqNet net = nonseq::nonseq_init(spec, 505);

  ModelContainer c = pack_nonseq(net);
  CHECK(container_model_name(c) == "nonseq-cbf");
  nonseq::NonseqNet back = unpack_nonseq(c);
  CHECK(back.spec.ego_dim == 2);
  CHECK(container_to_bytes(pack_nonseq(back)) == container_to_bytes(c));

  Rng rng(12);
  train::SceneSample s;
  s.count = 3;
  s.rel.resize(static_cast<std::size_t>(s.count) * feat::kQ);
  s.ego.resize(2);
  for (auto& v : s.rel) v = rng.normal();
  for (auto& v : s.ego) v = rng.normal();
  CHECK(nonseq::scene_value(net, s) ==
        doctest::Approx(nonseq::scene_value(back, s)).epsilon(1e-4));
}

TEST_CASE("learned dynamics survive pack and unpack including norm stats") {
  auto data = ego::collect_random_transitions(ego::DynKind::kDubins, 200, 5.0, 77);
  ego::DynFitConfig fc;
  fc.iterations = 40;
  fc.hidden = 16;
  ego::LearnedDynamics dyn = ego::fit_dynamics(ego::DynKind::kDubins, data, fc, 9);

  ModelContainer c = pack_dynamics(dyn);
  CHECK(container_model_name(c) == "dynamics");
  CHECK(c.find("aux.in_mean") != nullptr);  // norm vectors ride along as tensors
  ego::LearnedDynamics back = unpack_dynamics(c);
  CHECK(back.kind == ego::DynKind::kDubins);
  REQUIRE(back.norm.in_mean.size() == dyn.norm.in_mean.size());
  for (std::size_t i = 0; i < dyn.norm.in_mean.size(); ++i)
    CHECK(back.norm.in_mean[i] ==
          doctest::Approx(dyn.norm.in_mean[i]).epsilon(1e-6));
  CHECK(container_to_bytes(pack_dynamics(back)) == container_to_bytes(c));

  ego::EgoState x;
  x.kind = ego::DynKind::kDubins;
  x.c = {0.3, -0.8, 0.9, 0.4};
  ego::Control u;
  u.u = {0.2, -0.5};
  const auto xa = ego::step_learned(dyn, x, u);
  const auto xb = ego::step_learned(back, x, u);
  for (int i = 0; i < 4; ++i)
    CHECK(xa.c[i] == doctest::Approx(xb.c[i]).epsilon(1e-4));
}

TEST_CASE("predictors survive pack and unpack for all three kinds") {
  for (auto kind : {decomp::PredictorKind::kCoSM, decomp::PredictorKind::kCSM,
                    decomp::PredictorKind::kICSM}) {
    decomp::PredictorModel m = decomp::predictor_init(kind, 5, 31);
    ModelContainer c = pack_predictor(m);
    CHECK(container_model_name(c) == "predictor");
    decomp::PredictorModel back = unpack_predictor(c);
    CHECK(back.kind == kind);
    CHECK(back.k == 5);
    CHECK(container_to_bytes(pack_predictor(back)) == container_to_bytes(c));
  }
}

TEST_CASE("unpacking the wrong model kind is an error") {
  nonseq::NonseqNet net = nonseq::nonseq_init(nonseq::NonseqSpec{}, 1);
  ModelContainer c = pack_nonseq(net);
  CHECK_THROWS_AS(unpack_barrier(c), IoError);
  CHECK_THROWS_AS(unpack_dynamics(c), IoError);
  CHECK_THROWS_AS(unpack_predictor(c), IoError);
}

TEST_CASE("descriptors that are not json are rejected") {
  ModelContainer c;
  c.descriptor = "not json";
  CHECK_THROWS_AS(container_model_name(c), IoError);
}
