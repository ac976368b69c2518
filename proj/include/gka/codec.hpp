#pragma once

#include <algorithm>
#include <array>
#include <cstring>
#include <utility>
#include <variant>
#include <vector>

#include "gka/crypto.hpp"
#include "gka/errors.hpp"
#include "gka/field.hpp"
#include "gka/util.hpp"

namespace gka {

// Set of user identities (leader excluded). Canonical order is ascending
// numeric value.
class Roster {
 public:
  explicit Roster(std::vector<mpz_class> ids) : ids_(std::move(ids)) {
    if (ids_.empty()) throw Error(Err::MalformedMessage, "empty roster");
    std::sort(ids_.begin(), ids_.end());
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
      throw Error(Err::MalformedMessage, "duplicate roster id");
  }

  const std::vector<mpz_class>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool contains(const mpz_class& id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }

  bool operator==(const Roster& o) const { return ids_ == o.ids_; }

 private:
  std::vector<mpz_class> ids_;
};

struct SessionKey {
  std::array<std::uint8_t, kHashLen> bytes;

  bool operator==(const SessionKey& o) const { return bytes == o.bytes; }
  bool operator!=(const SessionKey& o) const { return bytes != o.bytes; }
};

struct ContributionMessage {
  mpz_class sender_id;
  Bytes ciphertext;
  Bytes signature;

  bool operator==(const ContributionMessage& o) const {
    return sender_id == o.sender_id && ciphertext == o.ciphertext && signature == o.signature;
  }
};

struct BroadcastMessage {
  mpz_class leader_id;
  std::vector<std::pair<mpz_class, Bytes>> shares;  // (recipient id, P_i)
  std::vector<mpz_class> roster_ids;
  Bytes signature;

  bool operator==(const BroadcastMessage& o) const {
    return leader_id == o.leader_id && shares == o.shares && roster_ids == o.roster_ids &&
           signature == o.signature;
  }
};

using Message = std::variant<ContributionMessage, BroadcastMessage>;

namespace wire {
constexpr std::uint8_t kContributionTag = 0x01;
constexpr std::uint8_t kBroadcastTag = 0x02;
}  // namespace wire

inline Bytes id_bytes(const mpz_class& id, const FieldParams& params) {
  Bytes out(params.width(), 0);
  if (id != 0) {
    std::size_t nbytes = (mpz_sizeinbase(id.get_mpz_t(), 2) + 7) / 8;
    if (nbytes > out.size()) throw Error(Err::MalformedMessage, "id wider than field");
    std::size_t count = 0;
    mpz_export(out.data() + out.size() - nbytes, &count, 1, 1, 1, 0, id.get_mpz_t());
  }
  return out;
}

inline mpz_class id_from_bytes(BytesView b) {
  mpz_class v;
  if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return v;
}

// K = a_0 || a_1 || ... || a_n, each coefficient as w big-endian octets.
inline Bytes encode_secret(const SecretPolynomial& poly, const FieldParams& params) {
  Bytes out;
  out.reserve(poly.size() * params.width());
  for (const auto& c : poly.coeffs()) {
    Bytes b = c.to_bytes();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

inline SecretPolynomial decode_secret(BytesView secret, const FieldParamsPtr& params) {
  const std::size_t w = params->width();
  if (secret.empty() || secret.size() % w != 0)
    throw Error(Err::MalformedSecret, "length not a multiple of coefficient width");
  std::vector<FieldElement> coeffs;
  coeffs.reserve(secret.size() / w);
  for (std::size_t off = 0; off < secret.size(); off += w) {
    coeffs.push_back(FieldElement::from_bytes(secret.subspan(off, w), params));
  }
  return SecretPolynomial(std::move(coeffs));
}

// Counter-indexed block keystream: B_j = H(0x01 || id_i || id_0 || c_i ||
// x_i || j), truncated to out_len. Any prefix of a longer stream equals
// the shorter stream, so a fragmented secret masks consistently.
inline Bytes keystream(const HashFn& h, const mpz_class& id_i, const mpz_class& id_0,
                       std::uint64_t counter, const FieldElement& x, std::size_t out_len) {
  const FieldParams& params = *x.params();
  Bytes prefix;
  prefix.push_back(0x01);
  Bytes idi = id_bytes(id_i, params);
  Bytes id0 = id_bytes(id_0, params);
  prefix.insert(prefix.end(), idi.begin(), idi.end());
  prefix.insert(prefix.end(), id0.begin(), id0.end());
  append_u64_be(prefix, counter);
  Bytes xb = x.to_bytes();
  prefix.insert(prefix.end(), xb.begin(), xb.end());

  Bytes out;
  out.reserve(out_len);
  std::uint32_t block = 0;
  while (out.size() < out_len) {
    Bytes input = prefix;
    append_u32_be(input, block++);
    Bytes digest = h(input);
    std::size_t take = std::min(digest.size(), out_len - out.size());
    out.insert(out.end(), digest.begin(), digest.begin() + take);
  }
  return out;
}

// Octet-wise XOR; self-inverse.
inline Bytes mask_secret(BytesView data, BytesView ks) {
  if (data.size() != ks.size()) throw Error(Err::LengthMismatch);
  Bytes out(data.begin(), data.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= ks[i];
  op_counters().xor_octets += out.size();
  return out;
}

// 4-octet big-endian count, then ids ascending, w octets each.
inline Bytes encode_roster(const Roster& roster, const FieldParams& params) {
  Bytes out;
  append_u32_be(out, static_cast<std::uint32_t>(roster.size()));
  for (const auto& id : roster.ids()) {
    Bytes b = id_bytes(id, params);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

// Key = H(0x02 || K || roster).
inline SessionKey derive_session_key(const HashFn& h, BytesView master_secret,
                                     const Roster& roster, const FieldParams& params) {
  Bytes input;
  input.push_back(0x02);
  input.insert(input.end(), master_secret.begin(), master_secret.end());
  Bytes rb = encode_roster(roster, params);
  input.insert(input.end(), rb.begin(), rb.end());
  Bytes digest = h(input);
  SessionKey key{};
  std::memcpy(key.bytes.data(), digest.data(), kHashLen);
  return key;
}

// Contribution plaintext: id_i || id_0 || x_i || C_i. This exact octet
// string is both encrypted and signed.
inline Bytes encode_contribution_plaintext(const mpz_class& id_i, const mpz_class& id_0,
                                           const FieldElement& x, std::uint64_t counter) {
  const FieldParams& params = *x.params();
  Bytes out;
  Bytes idi = id_bytes(id_i, params);
  Bytes id0 = id_bytes(id_0, params);
  out.insert(out.end(), idi.begin(), idi.end());
  out.insert(out.end(), id0.begin(), id0.end());
  Bytes xb = x.to_bytes();
  out.insert(out.end(), xb.begin(), xb.end());
  append_u64_be(out, counter);
  return out;
}

struct ContributionPlaintext {
  mpz_class id_i;
  mpz_class id_0;
  FieldElement x;
  std::uint64_t counter;
};

inline ContributionPlaintext decode_contribution_plaintext(BytesView pt,
                                                           const FieldParamsPtr& params) {
  const std::size_t w = params->width();
  if (pt.size() != 3 * w + 8) throw Error(Err::MalformedMessage, "bad plaintext length");
  return ContributionPlaintext{
      id_from_bytes(pt.subspan(0, w)),
      id_from_bytes(pt.subspan(w, w)),
      FieldElement::from_bytes(pt.subspan(2 * w, w), params),
      read_u64_be(pt, 3 * w),
  };
}

// Octets covered by sig_0: id_0 || share entries || roster.
inline Bytes broadcast_signed_payload(const BroadcastMessage& m, const FieldParams& params) {
  Bytes out = id_bytes(m.leader_id, params);
  for (const auto& [id, share] : m.shares) {
    Bytes ib = id_bytes(id, params);
    out.insert(out.end(), ib.begin(), ib.end());
    out.insert(out.end(), share.begin(), share.end());
  }
  Bytes rb = encode_roster(Roster(m.roster_ids), params);
  out.insert(out.end(), rb.begin(), rb.end());
  return out;
}

inline Bytes serialize_message(const ContributionMessage& m, const FieldParams& params) {
  Bytes out;
  out.push_back(wire::kContributionTag);
  Bytes sid = id_bytes(m.sender_id, params);
  out.insert(out.end(), sid.begin(), sid.end());
  append_u32_be(out, static_cast<std::uint32_t>(m.ciphertext.size()));
  out.insert(out.end(), m.ciphertext.begin(), m.ciphertext.end());
  append_u32_be(out, static_cast<std::uint32_t>(m.signature.size()));
  out.insert(out.end(), m.signature.begin(), m.signature.end());
  return out;
}

inline Bytes serialize_message(const BroadcastMessage& m, const FieldParams& params) {
  const std::size_t w = params.width();
  const std::size_t n = m.shares.size();
  const std::size_t share_len = (n + 1) * w;
  for (const auto& [id, share] : m.shares) {
    (void)id;
    if (share.size() != share_len) throw Error(Err::LengthMismatch, "share length");
  }
  Bytes out;
  out.push_back(wire::kBroadcastTag);
  Bytes lid = id_bytes(m.leader_id, params);
  out.insert(out.end(), lid.begin(), lid.end());
  append_u32_be(out, static_cast<std::uint32_t>(n));
  for (const auto& [id, share] : m.shares) {
    Bytes ib = id_bytes(id, params);
    out.insert(out.end(), ib.begin(), ib.end());
    out.insert(out.end(), share.begin(), share.end());
  }
  Bytes rb = encode_roster(Roster(m.roster_ids), params);
  out.insert(out.end(), rb.begin(), rb.end());
  append_u32_be(out, static_cast<std::uint32_t>(m.signature.size()));
  out.insert(out.end(), m.signature.begin(), m.signature.end());
  return out;
}

inline Bytes serialize_message(const Message& m, const FieldParams& params) {
  return std::visit([&](const auto& msg) { return serialize_message(msg, params); }, m);
}

namespace detail {

class StrictReader {
 public:
  StrictReader(BytesView b) : b_(b) {}

  std::uint8_t u8() {
    need(1);
    return b_[off_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = read_u32_be(b_, off_);
    off_ += 4;
    return v;
  }
  BytesView take(std::size_t n) {
    need(n);
    BytesView v = b_.subspan(off_, n);
    off_ += n;
    return v;
  }
  void finish() const {
    if (off_ != b_.size()) throw Error(Err::MalformedMessage, "trailing octets");
  }

 private:
  void need(std::size_t n) const {
    if (b_.size() - off_ < n) throw Error(Err::MalformedMessage, "truncated");
  }
  BytesView b_;
  std::size_t off_ = 0;
};

}  // namespace detail

// Strict parse: unknown tags, truncation, inconsistent counts and trailing
// octets are all rejected.
inline Message parse_message(BytesView b, const FieldParamsPtr& params) {
  detail::StrictReader r(b);
  const std::size_t w = params->width();
  std::uint8_t tag = r.u8();
  if (tag == wire::kContributionTag) {
    ContributionMessage m;
    m.sender_id = id_from_bytes(r.take(w));
    std::uint32_t e_len = r.u32();
    BytesView e = r.take(e_len);
    m.ciphertext.assign(e.begin(), e.end());
    std::uint32_t sig_len = r.u32();
    BytesView sig = r.take(sig_len);
    m.signature.assign(sig.begin(), sig.end());
    r.finish();
    return m;
  }
  if (tag == wire::kBroadcastTag) {
    BroadcastMessage m;
    m.leader_id = id_from_bytes(r.take(w));
    std::uint32_t n = r.u32();
    if (n == 0) throw Error(Err::MalformedMessage, "no shares");
    const std::size_t share_len = (std::size_t(n) + 1) * w;
    for (std::uint32_t i = 0; i < n; ++i) {
      mpz_class id = id_from_bytes(r.take(w));
      BytesView share = r.take(share_len);
      m.shares.emplace_back(std::move(id), Bytes(share.begin(), share.end()));
    }
    std::uint32_t roster_count = r.u32();
    for (std::uint32_t i = 0; i < roster_count; ++i) {
      m.roster_ids.push_back(id_from_bytes(r.take(w)));
    }
    if (roster_count == 0) throw Error(Err::MalformedMessage, "empty roster");
    std::uint32_t sig_len = r.u32();
    BytesView sig = r.take(sig_len);
    m.signature.assign(sig.begin(), sig.end());
    r.finish();
    // Canonical roster order is part of the format.
    for (std::size_t i = 1; i < m.roster_ids.size(); ++i)
      if (!(m.roster_ids[i - 1] < m.roster_ids[i]))
        throw Error(Err::MalformedMessage, "roster not canonical");
    return m;
  }
  throw Error(Err::MalformedMessage, "unknown tag");
}

}  // namespace gka
