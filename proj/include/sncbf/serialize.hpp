#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "sncbf/nn.hpp"

namespace sncbf::dc {

// Little-endian writers/readers shared by the checkpoint and the model
// container formats.
struct ByteWriter {
  std::string out;

  void u8(uint8_t v) { out.push_back(static_cast<char>(v)); }
  void u16(uint16_t v) {
    u8(static_cast<uint8_t>(v));
    u8(static_cast<uint8_t>(v >> 8));
  }
  void u32(uint32_t v) {
    u16(static_cast<uint16_t>(v));
    u16(static_cast<uint16_t>(v >> 16));
  }
  void u64(uint64_t v) {
    u32(static_cast<uint32_t>(v));
    u32(static_cast<uint32_t>(v >> 32));
  }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void bytes(const void* p, size_t n) {
    out.append(static_cast<const char*>(p), n);
  }
};

struct ByteReader {
  const std::string& buf;
  size_t pos = 0;

  explicit ByteReader(const std::string& b) : buf(b) {}

  bool eof() const { return pos >= buf.size(); }
  void need(size_t n) const;

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(size_t n);
};

// Exact checkpoint of a bundle: names, shapes and f64 payloads. A round trip
// reproduces every bit.
std::string bundle_to_bytes(const ParamBundle& params);
ParamBundle bundle_from_bytes(const std::string& bytes);

}  // namespace sncbf::dc
