#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstring>
#include <memory>
#include <optional>

#include "gka/errors.hpp"
#include "gka/util.hpp"

namespace gka {

constexpr std::size_t kHashLen = 32;

// Fixed 32-octet hash interface.
class HashFn {
 public:
  virtual ~HashFn() = default;
  std::size_t output_len() const { return kHashLen; }
  virtual Bytes operator()(BytesView input) const = 0;
};

class Sha256Hash final : public HashFn {
 public:
  Bytes operator()(BytesView input) const override {
    ++op_counters().hash_calls;
    Bytes out(kHashLen);
    unsigned int len = 0;
    EVP_Digest(input.data(), input.size(), out.data(), &len, EVP_sha256(), nullptr);
    return out;
  }
};

struct SignatureKeypair {
  Bytes signing_key;
  Bytes verify_key;
};

struct EncryptionKeypair {
  Bytes decryption_key;
  Bytes encryption_key;
};

class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual SignatureKeypair keygen(Rng& rng) const = 0;
  virtual Bytes sign(BytesView signing_key, BytesView message) const = 0;
  virtual bool verify(BytesView verify_key, BytesView message, BytesView signature) const = 0;
  // Produces an invalid signature claimed for the message, for rejection tests.
  virtual Bytes forge(BytesView message) const = 0;
};

class EncryptionScheme {
 public:
  virtual ~EncryptionScheme() = default;
  virtual EncryptionKeypair keygen(Rng& rng) const = 0;
  virtual Bytes encrypt(BytesView encryption_key, BytesView plaintext, Rng& rng) const = 0;
  // Throws Error(DecryptionFailure) on tampering or a wrong key.
  virtual Bytes decrypt(BytesView decryption_key, BytesView ciphertext) const = 0;
};

namespace detail {

inline Bytes tagged_hash(const HashFn& h, std::uint8_t tag, std::initializer_list<BytesView> parts) {
  Bytes buf;
  buf.push_back(tag);
  for (auto p : parts) buf.insert(buf.end(), p.begin(), p.end());
  return h(buf);
}

}  // namespace detail

// Deterministic MAC-style toy signature: sig = H(0x10 || salt || key || m).
// The signing and verify key hold the same secret; adequate for functional
// and adversarial tests, not a production signature.
class ToySignatureScheme final : public SignatureScheme {
 public:
  ToySignatureScheme(std::shared_ptr<const HashFn> h, Bytes salt)
      : hash_(std::move(h)), salt_(std::move(salt)) {}

  SignatureKeypair keygen(Rng& rng) const override {
    Bytes key = rng.bytes(kHashLen);
    return SignatureKeypair{key, key};
  }

  Bytes sign(BytesView signing_key, BytesView message) const override {
    ++op_counters().sign_calls;
    return detail::tagged_hash(*hash_, 0x10, {salt_, signing_key, message});
  }

  bool verify(BytesView verify_key, BytesView message, BytesView signature) const override {
    ++op_counters().verify_calls;
    Bytes expected = detail::tagged_hash(*hash_, 0x10, {salt_, verify_key, message});
    if (signature.size() != expected.size()) return false;
    return std::memcmp(signature.data(), expected.data(), expected.size()) == 0;
  }

  Bytes forge(BytesView message) const override {
    // Right length, wrong keyless derivation.
    return detail::tagged_hash(*hash_, 0xFF, {message});
  }

 private:
  std::shared_ptr<const HashFn> hash_;
  Bytes salt_;
};

// Toy authenticated construction presented through the public-key
// interface: both halves of the keypair hold the same secret.
// ct = nonce(16) || body || tag(32), body = pt XOR keystream(key, nonce),
// tag = H(0x12 || salt || key || nonce || body).
class ToyPkeScheme final : public EncryptionScheme {
 public:
  ToyPkeScheme(std::shared_ptr<const HashFn> h, Bytes salt)
      : hash_(std::move(h)), salt_(std::move(salt)) {}

  static constexpr std::size_t kNonceLen = 16;

  EncryptionKeypair keygen(Rng& rng) const override {
    Bytes key = rng.bytes(kHashLen);
    return EncryptionKeypair{key, key};
  }

  Bytes encrypt(BytesView encryption_key, BytesView plaintext, Rng& rng) const override {
    ++op_counters().encrypt_calls;
    Bytes nonce = rng.bytes(kNonceLen);
    Bytes body = xor_keystream(encryption_key, nonce, plaintext);
    Bytes tag = detail::tagged_hash(*hash_, 0x12, {salt_, encryption_key, nonce, body});
    Bytes out;
    out.reserve(nonce.size() + body.size() + tag.size());
    out.insert(out.end(), nonce.begin(), nonce.end());
    out.insert(out.end(), body.begin(), body.end());
    out.insert(out.end(), tag.begin(), tag.end());
    return out;
  }

  Bytes decrypt(BytesView decryption_key, BytesView ciphertext) const override {
    ++op_counters().decrypt_calls;
    if (ciphertext.size() < kNonceLen + kHashLen) throw Error(Err::DecryptionFailure, "truncated");
    BytesView nonce = ciphertext.subspan(0, kNonceLen);
    BytesView body = ciphertext.subspan(kNonceLen, ciphertext.size() - kNonceLen - kHashLen);
    BytesView tag = ciphertext.subspan(ciphertext.size() - kHashLen);
    Bytes expected = detail::tagged_hash(*hash_, 0x12, {salt_, decryption_key, nonce, body});
    if (std::memcmp(tag.data(), expected.data(), kHashLen) != 0)
      throw Error(Err::DecryptionFailure, "tag mismatch");
    return xor_keystream(decryption_key, nonce, body);
  }

 private:
  Bytes xor_keystream(BytesView key, BytesView nonce, BytesView data) const {
    Bytes out(data.begin(), data.end());
    std::size_t off = 0;
    std::uint32_t block = 0;
    while (off < out.size()) {
      Bytes ctr;
      append_u32_be(ctr, block++);
      Bytes ks = detail::tagged_hash(*hash_, 0x11, {salt_, key, nonce, ctr});
      for (std::size_t i = 0; i < ks.size() && off < out.size(); ++i, ++off) out[off] ^= ks[i];
    }
    return out;
  }

  std::shared_ptr<const HashFn> hash_;
  Bytes salt_;
};

struct CryptoSuite {
  std::shared_ptr<const HashFn> hash;
  std::shared_ptr<const SignatureScheme> signature;
  std::shared_ptr<const EncryptionScheme> encryption;
};

// Deterministic toy instantiations; the seed salts signatures and
// ciphertexts so suites from different seeds are distinguishable.
inline CryptoSuite make_test_suite(std::uint64_t seed) {
  auto hash = std::make_shared<Sha256Hash>();
  Bytes salt;
  append_u64_be(salt, seed);
  return CryptoSuite{
      hash,
      std::make_shared<ToySignatureScheme>(hash, salt),
      std::make_shared<ToyPkeScheme>(hash, salt),
  };
}

}  // namespace gka
