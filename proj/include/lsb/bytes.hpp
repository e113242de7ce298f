#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsb {

using Bytes = std::vector<uint8_t>;

std::string to_hex(const uint8_t* data, size_t len);
std::string to_hex(const Bytes& b);
Bytes from_hex(const std::string& hex);

// Canonical wire encoding: little-endian fixed-width integers,
// byte strings prefixed with a u32 length. Field order is fixed by
// each writer; readers must consume in the same order.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
  }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void raw(const uint8_t* data, size_t len) { buf_.insert(buf_.end(), data, data + len); }
  void raw(const Bytes& b) { raw(b.data(), b.size()); }
  template <size_t N>
  void fixed(const std::array<uint8_t, N>& a) { raw(a.data(), N); }
  void blob(const Bytes& b) {
    u32(uint32_t(b.size()));
    raw(b);
  }
  void str(const std::string& s) {
    u32(uint32_t(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }
  size_t size() const { return buf_.size(); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const Bytes& b) : data_(b.data()), len_(b.size()) {}
  ByteReader(const uint8_t* data, size_t len) : data_(data), len_(len) {}

  uint8_t u8() { return take(1)[0]; }
  uint32_t u32() {
    const uint8_t* p = take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    const uint8_t* p = take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  template <size_t N>
  std::array<uint8_t, N> fixed() {
    std::array<uint8_t, N> a;
    std::memcpy(a.data(), take(N), N);
    return a;
  }
  Bytes blob() {
    uint32_t n = u32();
    const uint8_t* p = take(n);
    return Bytes(p, p + n);
  }
  std::string str() {
    uint32_t n = u32();
    const uint8_t* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  bool done() const { return off_ == len_; }
  size_t remaining() const { return len_ - off_; }

 private:
  const uint8_t* take(size_t n) {
    if (off_ + n > len_) throw std::runtime_error("byte reader underflow");
    const uint8_t* p = data_ + off_;
    off_ += n;
    return p;
  }
  const uint8_t* data_;
  size_t len_;
  size_t off_ = 0;
};

}  // namespace lsb
