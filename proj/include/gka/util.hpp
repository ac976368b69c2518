#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gka {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

// Per-thread operation meters. The harness snapshots these around each
// party's protocol step to attribute costs.
struct OpCounters {
  std::uint64_t field_mults = 0;
  std::uint64_t xor_octets = 0;
  std::uint64_t hash_calls = 0;
  std::uint64_t sign_calls = 0;
  std::uint64_t verify_calls = 0;
  std::uint64_t encrypt_calls = 0;
  std::uint64_t decrypt_calls = 0;

  OpCounters& operator+=(const OpCounters& o) {
    field_mults += o.field_mults;
    xor_octets += o.xor_octets;
    hash_calls += o.hash_calls;
    sign_calls += o.sign_calls;
    verify_calls += o.verify_calls;
    encrypt_calls += o.encrypt_calls;
    decrypt_calls += o.decrypt_calls;
    return *this;
  }
  OpCounters operator-(const OpCounters& o) const {
    OpCounters r;
    r.field_mults = field_mults - o.field_mults;
    r.xor_octets = xor_octets - o.xor_octets;
    r.hash_calls = hash_calls - o.hash_calls;
    r.sign_calls = sign_calls - o.sign_calls;
    r.verify_calls = verify_calls - o.verify_calls;
    r.encrypt_calls = encrypt_calls - o.encrypt_calls;
    r.decrypt_calls = decrypt_calls - o.decrypt_calls;
    return r;
  }
};

inline OpCounters& op_counters() {
  thread_local OpCounters counters;
  return counters;
}

inline void reset_op_counters() { op_counters() = OpCounters{}; }

// Deterministic random source for contributions, keys and nonces.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    std::size_t i = 0;
    while (i < n) {
      std::uint64_t v = eng_();
      for (int k = 0; k < 8 && i < n; ++k, ++i) {
        out[i] = static_cast<std::uint8_t>(v >> (8 * k));
      }
    }
    return out;
  }

 private:
  std::mt19937_64 eng_;
};

inline void append_u32_be(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_u64_be(Bytes& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline std::uint32_t read_u32_be(BytesView b, std::size_t off) {
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

inline std::uint64_t read_u64_be(BytesView b, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | b[off + i];
  return v;
}

inline std::string to_hex(BytesView b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (auto c : b) {
    s.push_back(digits[c >> 4]);
    s.push_back(digits[c & 0xF]);
  }
  return s;
}

}  // namespace gka
