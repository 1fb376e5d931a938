#include "sncbf/serialize.hpp"

#include "sncbf/errors.hpp"

namespace sncbf::dc {

void ByteReader::need(size_t n) const {
  if (pos + n > buf.size()) throw IoError("truncated binary payload");
}

uint8_t ByteReader::u8() {
  need(1);
  return static_cast<uint8_t>(buf[pos++]);
}

uint16_t ByteReader::u16() {
  const uint16_t lo = u8();
  return static_cast<uint16_t>(lo | (static_cast<uint16_t>(u8()) << 8));
}

uint32_t ByteReader::u32() {
  const uint32_t lo = u16();
  return lo | (static_cast<uint32_t>(u16()) << 16);
}

uint64_t ByteReader::u64() {
  const uint64_t lo = u32();
  return lo | (static_cast<uint64_t>(u32()) << 32);
}

std::string ByteReader::str(size_t n) {
  need(n);
  std::string s = buf.substr(pos, n);
  pos += n;
  return s;
}

std::string bundle_to_bytes(const ParamBundle& params) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.name(i);
    const Tensor& t = params.value_at(i);
    w.u16(static_cast<uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u8(static_cast<uint8_t>(t.dims.size()));
    for (int d : t.dims) w.u32(static_cast<uint32_t>(d));
    for (double v : t.data) w.f64(v);
  }
  return std::move(w.out);
}

ParamBundle bundle_from_bytes(const std::string& bytes) {
  ByteReader r(bytes);
  ParamBundle params;
  const uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    const std::string name = r.str(r.u16());
    const uint8_t rank = r.u8();
    std::vector<int> dims;
    for (uint8_t d = 0; d < rank; ++d) dims.push_back(static_cast<int>(r.u32()));
    Tensor t = Tensor::zeros(dims);
    for (double& v : t.data) v = r.f64();
    params.add(name, std::move(t));
  }
  if (r.pos != bytes.size()) throw IoError("trailing bytes in checkpoint");
  return params;
}

}  // namespace sncbf::dc
