#include "sncbf/container.hpp"

#include <cstring>
#include <limits>

#include "sncbf/csv.hpp"
#include "sncbf/errors.hpp"
#include "sncbf/serialize.hpp"

namespace sncbf {
namespace {

// Generous per-tensor cap; keeps a corrupt dim field from driving a huge
// allocation before the remaining-bytes check can fire.
constexpr uint64_t kMaxElems = uint64_t{1} << 28;

uint64_t checked_elem_count(const std::vector<uint32_t>& dims,
                            const std::string& name) {
  uint64_t n = 1;
  for (uint32_t d : dims) {
    if (d != 0 && n > kMaxElems / d)
      throw IoError("model container: tensor '" + name + "' dims overflow");
    n *= d;
  }
  if (n > kMaxElems)
    throw IoError("model container: tensor '" + name + "' dims overflow");
  return n;
}

}  // namespace

const ContainerTensor* ModelContainer::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

std::string container_to_bytes(const ModelContainer& c) {
  dc::ByteWriter w;
  w.bytes(kContainerMagic, sizeof(kContainerMagic));
  w.u16(c.version);
  if (c.descriptor.size() > std::numeric_limits<uint32_t>::max())
    throw IoError("model container: descriptor too large");
  w.u32(static_cast<uint32_t>(c.descriptor.size()));
  w.bytes(c.descriptor.data(), c.descriptor.size());
  if (c.tensors.size() > std::numeric_limits<uint32_t>::max())
    throw IoError("model container: too many tensors");
  w.u32(static_cast<uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    if (t.name.size() > std::numeric_limits<uint16_t>::max())
      throw IoError("model container: tensor name too long");
    if (t.dims.size() > std::numeric_limits<uint8_t>::max())
      throw IoError("model container: tensor '" + t.name + "' rank too large");
    uint64_t n = checked_elem_count(t.dims, t.name);
    if (t.data.size() != n)
      throw IoError("model container: tensor '" + t.name +
                    "' payload does not match dims");
    w.u16(static_cast<uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u8(static_cast<uint8_t>(t.dims.size()));
    for (uint32_t d : t.dims) w.u32(d);
    for (float v : t.data) w.f32(v);
  }
  return std::move(w.out);
}

ModelContainer container_from_bytes(const std::string& bytes) {
  dc::ByteReader r(bytes);
  char magic[4];
  r.need(4);
  std::memcpy(magic, bytes.data() + r.pos, 4);
  r.pos += 4;
  if (std::memcmp(magic, kContainerMagic, 4) != 0)
    throw IoError("not a model container (bad magic)");
  ModelContainer c;
  c.version = r.u16();
  if (c.version != kContainerVersion)
    throw IoError("model container version " + std::to_string(c.version) +
                  " but this build reads version " +
                  std::to_string(kContainerVersion));
  uint32_t desc_len = r.u32();
  c.descriptor = r.str(desc_len);
  uint32_t count = r.u32();
  c.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    ContainerTensor t;
    uint16_t name_len = r.u16();
    t.name = r.str(name_len);
    uint8_t rank = r.u8();
    t.dims.resize(rank);
    for (auto& d : t.dims) d = r.u32();
    uint64_t n = checked_elem_count(t.dims, t.name);
    r.need(n * 4);
    t.data.resize(n);
    for (auto& v : t.data) v = r.f32();
    c.tensors.push_back(std::move(t));
  }
  if (r.pos != bytes.size())
    throw IoError("trailing bytes in model container");
  return c;
}

void save_container(const std::string& path, const ModelContainer& c) {
  write_file(path, container_to_bytes(c));
}

ModelContainer load_container(const std::string& path) {
  return container_from_bytes(read_file(path));
}

}  // namespace sncbf
