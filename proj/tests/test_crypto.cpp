#include <catch2/catch_amalgamated.hpp>

#include "gka/crypto.hpp"

using namespace gka;

TEST_CASE("hash contract") {
  Sha256Hash h;
  Rng rng(1);
  CHECK(h(Bytes{}).size() == 32);
  CHECK(h(Bytes{1, 2, 3}) == h(Bytes{1, 2, 3}));
  for (int i = 0; i < 100; ++i) {
    Bytes a = rng.bytes(1 + rng.next_u64() % 64);
    Bytes b = a;
    std::size_t bit = rng.next_u64() % (a.size() * 8);
    b[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    CHECK(h(a) != h(b));
  }
}

TEST_CASE("toy signature scheme") {
  CryptoSuite suite = make_test_suite(1);
  Rng rng(2);
  SignatureKeypair alice = suite.signature->keygen(rng);
  SignatureKeypair bob = suite.signature->keygen(rng);

  SECTION("round trip") {
    Bytes m = rng.bytes(100);
    Bytes sig = suite.signature->sign(alice.signing_key, m);
    CHECK(suite.signature->verify(alice.verify_key, m, sig));
  }
  SECTION("wrong key rejected") {
    Bytes m = rng.bytes(64);
    Bytes sig = suite.signature->sign(alice.signing_key, m);
    CHECK(!suite.signature->verify(bob.verify_key, m, sig));
  }
  SECTION("flipped message bit rejected") {
    Bytes m = rng.bytes(64);
    Bytes sig = suite.signature->sign(alice.signing_key, m);
    m[10] ^= 0x04;
    CHECK(!suite.signature->verify(alice.verify_key, m, sig));
  }
  SECTION("verify is total") {
    Bytes m = rng.bytes(32);
    Bytes sig = suite.signature->sign(alice.signing_key, m);
    CHECK(!suite.signature->verify(alice.verify_key, m, Bytes{}));
    CHECK(!suite.signature->verify(alice.verify_key, m, Bytes(sig.begin(), sig.end() - 5)));
    for (int i = 0; i < 50; ++i)
      CHECK(!suite.signature->verify(alice.verify_key, m, rng.bytes(rng.next_u64() % 80)));
  }
  SECTION("forgery hook never verifies") {
    Bytes m = rng.bytes(48);
    CHECK(!suite.signature->verify(alice.verify_key, m, suite.signature->forge(m)));
  }
}

TEST_CASE("toy encryption scheme") {
  CryptoSuite suite = make_test_suite(1);
  Rng rng(3);
  EncryptionKeypair keys = suite.encryption->keygen(rng);
  EncryptionKeypair other = suite.encryption->keygen(rng);

  SECTION("round trips up to 4 KiB") {
    for (int trial = 0; trial < 200; ++trial) {
      Bytes m = rng.bytes(rng.next_u64() % 4096);
      Bytes ct = suite.encryption->encrypt(keys.encryption_key, m, rng);
      CHECK(suite.encryption->decrypt(keys.decryption_key, ct) == m);
    }
  }
  SECTION("randomized ciphertexts") {
    Bytes m = rng.bytes(40);
    CHECK(suite.encryption->encrypt(keys.encryption_key, m, rng) !=
          suite.encryption->encrypt(keys.encryption_key, m, rng));
  }
  SECTION("tampering detected") {
    Bytes ct = suite.encryption->encrypt(keys.encryption_key, rng.bytes(40), rng);
    for (int i = 0; i < 10; ++i) {
      Bytes bad = ct;
      bad[rng.next_u64() % bad.size()] ^= static_cast<std::uint8_t>(1 + rng.next_u64() % 255);
      CHECK_THROWS_MATCHES(suite.encryption->decrypt(keys.decryption_key, bad), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Err::DecryptionFailure;
                           }));
    }
  }
  SECTION("wrong key fails") {
    Bytes ct = suite.encryption->encrypt(keys.encryption_key, rng.bytes(33), rng);
    CHECK_THROWS_AS(suite.encryption->decrypt(other.decryption_key, ct), Error);
  }
  SECTION("truncated ciphertext fails") {
    CHECK_THROWS_AS(suite.encryption->decrypt(keys.decryption_key, Bytes{1, 2, 3}), Error);
  }
}

TEST_CASE("test suite determinism") {
  Bytes m{1, 2, 3, 4};

  SECTION("same seed, same behavior") {
    CryptoSuite a = make_test_suite(7);
    CryptoSuite b = make_test_suite(7);
    Rng ra(9), rb(9);
    SignatureKeypair ka = a.signature->keygen(ra);
    SignatureKeypair kb = b.signature->keygen(rb);
    CHECK(ka.signing_key == kb.signing_key);
    CHECK(a.signature->sign(ka.signing_key, m) == b.signature->sign(kb.signing_key, m));
  }
  SECTION("different seeds, different signatures") {
    CryptoSuite a = make_test_suite(7);
    CryptoSuite b = make_test_suite(8);
    Rng ra(9), rb(9);
    SignatureKeypair ka = a.signature->keygen(ra);
    SignatureKeypair kb = b.signature->keygen(rb);
    CHECK(ka.signing_key == kb.signing_key);  // same rng stream
    CHECK(a.signature->sign(ka.signing_key, m) != b.signature->sign(kb.signing_key, m));
  }
}
