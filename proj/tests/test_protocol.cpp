#include <catch2/catch_amalgamated.hpp>

#include <memory>

#include "gka/protocol.hpp"

using namespace gka;

namespace {

// Manually provisioned group: leader id n+1, users 1..n, shared crypto
// suite, all keys exchanged out of band.
struct Net {
  FieldParamsPtr params;
  CryptoSuite suite;
  Rng rng;
  EncryptionKeypair enc;
  SignatureKeypair leader_sig;
  std::vector<SignatureKeypair> user_keys;
  std::unique_ptr<Leader> leader;
  std::vector<std::unique_ptr<User>> users;

  Net(std::size_t n, FieldParamsPtr p, std::uint64_t seed,
      AbscissaMode mode = AbscissaMode::Identity)
      : params(std::move(p)), suite(make_test_suite(seed)), rng(seed + 1000) {
    enc = suite.encryption->keygen(rng);
    leader_sig = suite.signature->keygen(rng);
    std::vector<mpz_class> roster;
    std::map<mpz_class, Bytes> vks;
    for (std::size_t i = 1; i <= n; ++i) {
      roster.push_back(mpz_class(i));
      user_keys.push_back(suite.signature->keygen(rng));
      vks[mpz_class(i)] = user_keys.back().verify_key;
    }
    PartyId leader_id(FieldElement(mpz_class(n + 1), params));
    leader = std::make_unique<Leader>(leader_id, roster, params, suite, enc, leader_sig, vks, mode);
    for (std::size_t i = 1; i <= n; ++i) {
      users.push_back(std::make_unique<User>(PartyId(FieldElement(mpz_class(i), params)),
                                             leader_id, params, suite, user_keys[i - 1],
                                             enc.encryption_key, leader_sig.verify_key, mode));
    }
  }

  User& user(std::size_t i) { return *users[i - 1]; }

  // A contribution message with chosen x and counter, signed with `keys`.
  ContributionMessage craft(const mpz_class& id_i, const mpz_class& id_0, long x,
                            std::uint64_t counter, const SignatureKeypair& keys) {
    Bytes pt = encode_contribution_plaintext(id_i, id_0, FieldElement(x, params), counter);
    ContributionMessage m;
    m.sender_id = id_i;
    m.ciphertext = suite.encryption->encrypt(enc.encryption_key, pt, rng);
    m.signature = suite.signature->sign(keys.signing_key, pt);
    return m;
  }

  BroadcastMessage honest_round() {
    for (auto& u : users) {
      auto reject = leader->register_contribution(u->prepare_contribution(rng));
      REQUIRE(!reject);
    }
    return leader->compute_round(rng);
  }
};

}  // namespace

TEST_CASE("user contribution preparation") {
  Net net(2, mersenne61_params(), 1);
  User& u1 = net.user(1);

  ContributionMessage msg = u1.prepare_contribution(net.rng);
  CHECK(u1.phase() == Phase::Sent);
  CHECK(msg.sender_id == 1);

  SECTION("ciphertext decrypts to the signed plaintext") {
    Bytes pt = net.suite.encryption->decrypt(net.enc.decryption_key, msg.ciphertext);
    CHECK(net.suite.signature->verify(net.user_keys[0].verify_key, pt, msg.signature));
    auto fields = decode_contribution_plaintext(pt, net.params);
    CHECK(fields.id_i == 1);
    CHECK(fields.id_0 == 3);
    CHECK(fields.x == *u1.current_x());
    CHECK(fields.counter == 1);
  }
  SECTION("counter increments per session, x resampled") {
    FieldElement x1 = *u1.current_x();
    u1.begin_session();
    ContributionMessage msg2 = u1.prepare_contribution(net.rng);
    auto fields = decode_contribution_plaintext(
        net.suite.encryption->decrypt(net.enc.decryption_key, msg2.ciphertext), net.params);
    CHECK(fields.counter == 2);
    CHECK(fields.x != x1);
  }
  SECTION("second prepare without reset is rejected") {
    CHECK_THROWS_MATCHES(u1.prepare_contribution(net.rng), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::InvalidState; }));
  }
}

TEST_CASE("leader contribution verification") {
  Net net(2, mersenne61_params(), 2);

  SECTION("honest message accepted") {
    CHECK(!net.leader->register_contribution(net.user(1).prepare_contribution(net.rng)));
  }
  SECTION("same message twice: second is a replay") {
    ContributionMessage m = net.user(1).prepare_contribution(net.rng);
    CHECK(!net.leader->register_contribution(m));
    auto second = net.leader->register_contribution(m);
    REQUIRE(second);
    CHECK(*second == Err::ReplayDetected);
  }
  SECTION("forged signature rejected") {
    ContributionMessage m = net.user(1).prepare_contribution(net.rng);
    m.signature = net.suite.signature->forge(Bytes{1, 2, 3});
    auto r = net.leader->register_contribution(m);
    REQUIRE(r);
    // Forged signature also breaks the authenticated ciphertext pairing
    // only at the signature step; decryption still succeeds.
    CHECK(*r == Err::SignatureInvalid);
  }
  SECTION("message signed with another user's key") {
    ContributionMessage m = net.craft(1, 3, 42, 1, net.user_keys[1]);
    auto r = net.leader->register_contribution(m);
    REQUIRE(r);
    CHECK(*r == Err::SignatureInvalid);
  }
  SECTION("unknown sender") {
    ContributionMessage m = net.craft(1, 3, 42, 1, net.user_keys[0]);
    m.sender_id = 7;
    auto r = net.leader->register_contribution(m);
    REQUIRE(r);
    CHECK(*r == Err::UnknownSender);
  }
  SECTION("plaintext leader id mismatch") {
    ContributionMessage m = net.craft(1, 9, 42, 1, net.user_keys[0]);
    auto r = net.leader->register_contribution(m);
    REQUIRE(r);
    CHECK(*r == Err::IdMismatch);
  }
  SECTION("two distinct fresh submissions from one user") {
    CHECK(!net.leader->register_contribution(net.craft(1, 3, 42, 1, net.user_keys[0])));
    auto r = net.leader->register_contribution(net.craft(1, 3, 43, 2, net.user_keys[0]));
    REQUIRE(r);
    CHECK(*r == Err::DuplicateSubmission);
  }
  SECTION("stale counter rejected") {
    CHECK(!net.leader->register_contribution(net.craft(1, 3, 42, 5, net.user_keys[0])));
    net.leader->begin_session();
    auto r = net.leader->register_contribution(net.craft(1, 3, 44, 5, net.user_keys[0]));
    REQUIRE(r);
    CHECK(*r == Err::ReplayDetected);
  }
  SECTION("tampered ciphertext") {
    ContributionMessage m = net.user(1).prepare_contribution(net.rng);
    m.ciphertext[5] ^= 0x80;
    auto r = net.leader->register_contribution(m);
    REQUIRE(r);
    CHECK(*r == Err::DecryptionFailure);
  }
}

TEST_CASE("leader round computation, worked small-field example") {
  auto p97 = field_params(97);
  Net net(2, p97, 3);

  // Users 1 and 2 contribute 21 and 46; leader id is 3. With x_0 = 85 the
  // interpolated coefficients are [10, 4, 7] and K = 0x0A 0x04 0x07.
  REQUIRE(!net.leader->register_contribution(net.craft(1, 3, 21, 1, net.user_keys[0])));
  REQUIRE(!net.leader->register_contribution(net.craft(2, 3, 46, 1, net.user_keys[1])));

  std::uint64_t seed = 0;
  for (;; ++seed) {
    Rng probe(seed);
    if (sample_field_element(probe, p97).value() == 85) break;
  }
  Rng forced(seed);
  BroadcastMessage b = net.leader->compute_round(forced);

  REQUIRE(b.shares.size() == 2);
  for (const auto& [id, share] : b.shares) {
    (void)id;
    CHECK(share.size() == 3);  // (n+1) * w
  }
  Bytes ks = keystream(*net.suite.hash, 1, 3, 1, FieldElement(21, p97), 3);
  Bytes master = mask_secret(b.shares[0].second, ks);
  CHECK(master == Bytes{0x0A, 0x04, 0x07});
  CHECK(net.leader->session_key());
  CHECK(*net.leader->session_key() ==
        derive_session_key(*net.suite.hash, master, net.leader->roster(), *p97));
}

TEST_CASE("leader round preconditions") {
  Net net(2, mersenne61_params(), 4);
  REQUIRE(!net.leader->register_contribution(net.user(1).prepare_contribution(net.rng)));
  try {
    net.leader->compute_round(net.rng);
    FAIL("expected MissingContributions");
  } catch (const Error& e) {
    CHECK(e.code() == Err::MissingContributions);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("user broadcast processing") {
  auto p = mersenne61_params();

  SECTION("honest end-to-end agreement") {
    Net net(3, p, 5);
    BroadcastMessage b = net.honest_round();
    for (std::size_t i = 1; i <= 3; ++i) {
      SessionKey k = net.user(i).process_broadcast(b);
      CHECK(net.user(i).phase() == Phase::Accepted);
      CHECK(k == *net.leader->session_key());
    }
  }

  SECTION("online cost: n multiplications, one XOR pass") {
    for (std::size_t n : {1u, 4u, 8u}) {
      Net net(n, p, 6);
      BroadcastMessage b = net.honest_round();
      reset_op_counters();
      net.user(1).process_broadcast(b);
      CHECK(op_counters().field_mults == n);
      CHECK(op_counters().xor_octets == (n + 1) * p->width());
    }
  }

  SECTION("omitted contribution is detected by exactly the victim") {
    Net net(3, p, 7);
    for (auto& u : net.users)
      REQUIRE(!net.leader->register_contribution(u->prepare_contribution(net.rng)));
    BroadcastMessage b = net.leader->compute_round_omitting({mpz_class(2)}, net.rng);
    CHECK(net.user(1).process_broadcast(b) == *net.leader->session_key());
    CHECK_THROWS_MATCHES(net.user(2).process_broadcast(b), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Err::ContributionNotUsed;
                         }));
    CHECK(net.user(2).phase() == Phase::Rejected);
    CHECK(net.user(3).process_broadcast(b) == *net.leader->session_key());
  }

  SECTION("tampered signature rejected") {
    Net net(2, p, 8);
    BroadcastMessage b = net.honest_round();
    b.signature[3] ^= 0x01;
    CHECK_THROWS_MATCHES(net.user(1).process_broadcast(b), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::SignatureInvalid; }));
  }

  SECTION("processing without a contribution in flight") {
    Net net(2, p, 9);
    BroadcastMessage b = net.honest_round();
    net.user(1).process_broadcast(b);
    net.user(1).begin_session();  // back to Idle, nothing in flight
    CHECK_THROWS_MATCHES(net.user(1).process_broadcast(b), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::InvalidState; }));
  }
}

TEST_CASE("membership changes") {
  auto p = mersenne61_params();

  SECTION("join grows the roster and refreshes the key") {
    // Provision 4 identities, run the first session with 3 of them by
    // letting user 4 leave, then re-admit it through handle_join.
    Net big(4, p, 10);
    BroadcastMessage b0 = big.honest_round();
    SessionKey k0 = *big.leader->session_key();
    for (std::size_t i = 1; i <= 3; ++i) big.user(i).process_broadcast(b0);

    BroadcastMessage left = big.leader->handle_leave(mpz_class(4), big.rng);
    SessionKey k_left = *big.leader->session_key();
    CHECK(!(k_left == k0));
    for (std::size_t i = 1; i <= 3; ++i) CHECK(big.user(i).process_broadcast(left) == k_left);

    big.user(4).begin_session();
    ContributionMessage jm = big.user(4).prepare_contribution(big.rng);
    BroadcastMessage joined = big.leader->handle_join(jm, big.rng);
    SessionKey k_join = *big.leader->session_key();
    CHECK(joined.shares.size() == 4);
    CHECK(big.leader->roster().contains(mpz_class(4)));
    CHECK(!(k_join == k_left));
    for (std::size_t i = 1; i <= 4; ++i) CHECK(big.user(i).process_broadcast(joined) == k_join);
  }

  SECTION("leave shrinks the roster and refreshes the key") {
    Net net(3, p, 11);
    BroadcastMessage before = net.honest_round();
    SessionKey old_key = *net.leader->session_key();
    for (std::size_t i = 1; i <= 3; ++i) net.user(i).process_broadcast(before);

    BroadcastMessage after = net.leader->handle_leave(mpz_class(3), net.rng);
    CHECK(after.shares.size() == 2);
    CHECK(!net.leader->roster().contains(mpz_class(3)));
    SessionKey new_key = *net.leader->session_key();
    CHECK(!(new_key == old_key));
    CHECK(net.user(1).process_broadcast(after) == new_key);
    CHECK(net.user(2).process_broadcast(after) == new_key);

    // The departed user has no share addressed to it.
    CHECK_THROWS_MATCHES(net.user(3).process_broadcast(after), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::ShareMissing; }));
  }

  SECTION("membership errors") {
    Net net(2, p, 12);
    net.honest_round();
    CHECK_THROWS_MATCHES(net.leader->handle_leave(mpz_class(9), net.rng), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::NotAMember; }));
    ContributionMessage m = net.craft(1, 3, 42, 99, net.user_keys[0]);
    CHECK_THROWS_MATCHES(net.leader->handle_join(m, net.rng), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::AlreadyMember; }));
    net.leader->handle_leave(mpz_class(2), net.rng);
    CHECK_THROWS_MATCHES(net.leader->handle_leave(mpz_class(1), net.rng), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::GroupTooSmall; }));
  }
}

TEST_CASE("hashed abscissa mode") {
  auto p = mersenne61_params();
  Net net(3, p, 13, AbscissaMode::Hashed);
  BroadcastMessage b = net.honest_round();
  for (std::size_t i = 1; i <= 3; ++i) {
    CHECK(net.user(i).process_broadcast(b) == *net.leader->session_key());
  }
}

TEST_CASE("single-user group") {
  auto p = mersenne61_params();
  Net net(1, p, 14);
  BroadcastMessage b = net.honest_round();
  REQUIRE(b.shares.size() == 1);
  CHECK(b.shares[0].second.size() == 2 * p->width());
  CHECK(net.user(1).process_broadcast(b) == *net.leader->session_key());
}
