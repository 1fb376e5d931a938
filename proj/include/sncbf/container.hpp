#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sncbf {

// On-disk model format. Header: magic "SNCB", format version u16, then a
// length-prefixed UTF-8 JSON descriptor naming the architecture. Body: tensor
// count u32, then per tensor name (u16 length + bytes), rank u8, dims u32
// each, payload f32 little-endian, 4 * prod(dims) bytes.
inline constexpr uint16_t kContainerVersion = 1;
inline constexpr char kContainerMagic[4] = {'S', 'N', 'C', 'B'};

struct ContainerTensor {
  std::string name;
  std::vector<uint32_t> dims;
  std::vector<float> data;

  uint64_t elem_count() const {
    uint64_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

struct ModelContainer {
  uint16_t version = kContainerVersion;
  std::string descriptor;
  std::vector<ContainerTensor> tensors;

  const ContainerTensor* find(const std::string& name) const;
};

std::string container_to_bytes(const ModelContainer& c);
ModelContainer container_from_bytes(const std::string& bytes);

// File variants wrap the byte codecs; both throw IoError on failure.
void save_container(const std::string& path, const ModelContainer& c);
ModelContainer load_container(const std::string& path);

}  // namespace sncbf
