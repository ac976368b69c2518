#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gka/codec.hpp"
#include "gka/crypto.hpp"
#include "gka/errors.hpp"
#include "gka/field.hpp"
#include "gka/protocol.hpp"
#include "gka/util.hpp"

namespace gka {

// Party index convention throughout the harness: 0 is the leader, 1..n are
// the users.
constexpr int kBroadcastReceiver = -1;

struct TranscriptEvent {
  int round;
  int sender;
  int receiver;  // kBroadcastReceiver for the leader broadcast
  Bytes payload;

  std::size_t octets() const { return payload.size(); }
};

struct Transcript {
  std::vector<TranscriptEvent> events;
  std::map<int, OpCounters> ops;

  std::size_t octets_sent_by(int party) const {
    std::size_t total = 0;
    for (const auto& e : events)
      if (e.sender == party) total += e.octets();
    return total;
  }
  int rounds() const {
    int r = 0;
    for (const auto& e : events) r = std::max(r, e.round);
    return r;
  }
};

enum class ActionKind {
  Deliver,           // explicit no-op, default behavior
  Drop,              // drop a user's contribution message
  Duplicate,         // deliver a user's contribution a second time
  TamperBit,         // flip one bit of the serialized broadcast
  InjectForged,      // replace the broadcast signature with a forgery
  RevealKey,         // record an accepting party's session key
  CorruptLeaderOmit, // leader interpolates without this user's point
  TestCompare,       // compare a revealed key against a random string
};

struct Action {
  ActionKind kind;
  int party = 0;        // user index 1..n where applicable
  std::size_t bit = 0;  // TamperBit position
};

using AdversaryScript = std::vector<Action>;

struct PartyOutcome {
  Phase phase = Phase::Idle;
  std::optional<Err> reason;
  std::optional<SessionKey> key;
};

struct ScriptResult {
  PartyOutcome leader;
  std::vector<PartyOutcome> users;  // index 0 = user 1
  std::vector<std::pair<int, Err>> leader_rejections;  // (user index, reason)
  std::map<int, Bytes> revealed;
  std::map<int, bool> test_compare;  // true iff revealed key equals the random string
  Transcript transcript;
};

// A fully provisioned session: leader id n+1, user ids 1..n, all key
// material distributed out of band from the seed.
class Simulation {
 public:
  Simulation(std::size_t n, FieldParamsPtr params, std::uint64_t seed,
             AbscissaMode mode = AbscissaMode::Identity)
      : params_(std::move(params)), suite_(make_test_suite(seed)), rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
    if (n < 1) throw Error(Err::ScriptInvalid, "need at least one user");
    std::vector<mpz_class> roster_ids;
    for (std::size_t i = 1; i <= n; ++i) roster_ids.push_back(mpz_class(i));
    mpz_class leader_id(n + 1);

    EncryptionKeypair enc = suite_.encryption->keygen(rng_);
    SignatureKeypair leader_sig = suite_.signature->keygen(rng_);
    std::map<mpz_class, Bytes> verify_keys;
    std::vector<SignatureKeypair> user_keys;
    for (std::size_t i = 1; i <= n; ++i) {
      user_keys.push_back(suite_.signature->keygen(rng_));
      verify_keys[mpz_class(i)] = user_keys.back().verify_key;
    }
    // extra provisioned identity for join scenarios
    join_keys_ = suite_.signature->keygen(rng_);
    join_id_ = mpz_class(n + 2);
    verify_keys[join_id_] = join_keys_.verify_key;

    leader_ = std::make_unique<Leader>(PartyId(FieldElement(leader_id, params_)), roster_ids,
                                       params_, suite_, enc, leader_sig, verify_keys, mode);
    for (std::size_t i = 1; i <= n; ++i) {
      users_.push_back(std::make_unique<User>(
          PartyId(FieldElement(mpz_class(i), params_)), PartyId(FieldElement(leader_id, params_)),
          params_, suite_, user_keys[i - 1], enc.encryption_key, leader_sig.verify_key, mode));
    }
    leader_id_ = leader_id;
    enc_key_ = enc.encryption_key;
    leader_verify_key_ = leader_sig.verify_key;
    mode_ = mode;
  }

  Leader& leader() { return *leader_; }
  User& user(std::size_t i) { return *users_.at(i - 1); }  // 1-based
  std::size_t n_users() const { return users_.size(); }
  Rng& rng() { return rng_; }
  const CryptoSuite& suite() const { return suite_; }
  const FieldParamsPtr& params() const { return params_; }

  // Builds the provisioned joining user (id n+2).
  std::unique_ptr<User> make_join_user() {
    return std::make_unique<User>(PartyId(FieldElement(join_id_, params_)),
                                  PartyId(FieldElement(leader_id_, params_)), params_, suite_,
                                  join_keys_, enc_key_, leader_verify_key_, mode_);
  }
  const mpz_class& join_id() const { return join_id_; }

  // Runs one honest session, recording messages and per-party op meters.
  // Appends to the transcript so multi-session flows stay in one record.
  std::vector<SessionKey> run_session(Transcript& t, int round_base = 0) {
    leader_->begin_session();
    std::vector<ContributionMessage> msgs;
    for (std::size_t i = 1; i <= users_.size(); ++i) {
      users_[i - 1]->begin_session();
      auto metered = meter(t, static_cast<int>(i));
      msgs.push_back(users_[i - 1]->prepare_contribution(rng_));
      metered();
      t.events.push_back({round_base + 1, static_cast<int>(i), 0,
                          serialize_message(msgs.back(), *params_)});
    }
    for (std::size_t i = 0; i < msgs.size(); ++i) {
      auto metered = meter(t, 0);
      auto reject = leader_->register_contribution(msgs[i]);
      metered();
      if (reject) throw Error(*reject, "honest contribution rejected");
    }
    auto metered = meter(t, 0);
    BroadcastMessage bcast = leader_->compute_round(rng_);
    metered();
    t.events.push_back({round_base + 2, 0, kBroadcastReceiver, serialize_message(bcast, *params_)});

    std::vector<SessionKey> keys;
    keys.push_back(*leader_->session_key());
    for (std::size_t i = 1; i <= users_.size(); ++i) {
      auto m = meter(t, static_cast<int>(i));
      keys.push_back(users_[i - 1]->process_broadcast(bcast));
      m();
    }
    return keys;
  }

 private:
  // Meters a party's step: resets the thread counters, and the returned
  // callable folds the delta into the transcript.
  std::function<void()> meter(Transcript& t, int party) {
    reset_op_counters();
    return [&t, party]() { t.ops[party] += op_counters(); };
  }

  FieldParamsPtr params_;
  CryptoSuite suite_;
  Rng rng_;
  std::unique_ptr<Leader> leader_;
  std::vector<std::unique_ptr<User>> users_;
  mpz_class leader_id_;
  mpz_class join_id_;
  SignatureKeypair join_keys_;
  Bytes enc_key_;
  Bytes leader_verify_key_;
  AbscissaMode mode_;
};

inline std::pair<std::vector<SessionKey>, Transcript> run_honest_session(
    std::size_t n, const FieldParamsPtr& params, std::uint64_t seed,
    AbscissaMode mode = AbscissaMode::Identity) {
  Simulation sim(n, params, seed, mode);
  Transcript t;
  auto keys = sim.run_session(t);
  return {std::move(keys), std::move(t)};
}

// Interprets an adversary script against one session flow. Contribution
// messages pass through the Drop/Duplicate actions, the broadcast through
// CorruptLeaderOmit, InjectForged and TamperBit, in that order.
inline ScriptResult run_script(const AdversaryScript& script, std::size_t n,
                               const FieldParamsPtr& params, std::uint64_t seed,
                               AbscissaMode mode = AbscissaMode::Identity) {
  for (const auto& a : script) {
    bool needs_party = a.kind == ActionKind::Drop || a.kind == ActionKind::Duplicate ||
                       a.kind == ActionKind::RevealKey ||
                       a.kind == ActionKind::CorruptLeaderOmit ||
                       a.kind == ActionKind::TestCompare;
    if (needs_party && (a.party < 1 || static_cast<std::size_t>(a.party) > n))
      throw Error(Err::ScriptInvalid, "party index out of range");
  }

  Simulation sim(n, params, seed, mode);
  ScriptResult res;
  res.users.resize(n);
  Transcript& t = res.transcript;

  // Round 1: contributions, with adversarial scheduling.
  std::vector<ContributionMessage> prepared;
  for (std::size_t i = 1; i <= n; ++i) {
    reset_op_counters();
    prepared.push_back(sim.user(i).prepare_contribution(sim.rng()));
    t.ops[static_cast<int>(i)] += op_counters();
  }
  std::vector<int> delivery;  // user indices, in delivery order
  for (std::size_t i = 1; i <= n; ++i) {
    bool dropped = false;
    for (const auto& a : script)
      if (a.kind == ActionKind::Drop && a.party == static_cast<int>(i)) dropped = true;
    if (!dropped) delivery.push_back(static_cast<int>(i));
  }
  for (const auto& a : script)
    if (a.kind == ActionKind::Duplicate) delivery.push_back(a.party);

  for (int who : delivery) {
    const auto& msg = prepared[who - 1];
    t.events.push_back({1, who, 0, serialize_message(msg, *params)});
    reset_op_counters();
    auto reject = sim.leader().register_contribution(msg);
    t.ops[0] += op_counters();
    if (reject) res.leader_rejections.emplace_back(who, *reject);
  }

  // Round 2: the broadcast, possibly corrupted in flight or at source.
  std::vector<mpz_class> omitted;
  for (const auto& a : script)
    if (a.kind == ActionKind::CorruptLeaderOmit) omitted.push_back(mpz_class(a.party));

  BroadcastMessage bcast;
  try {
    reset_op_counters();
    bcast = omitted.empty() ? sim.leader().compute_round(sim.rng())
                            : sim.leader().compute_round_omitting(omitted, sim.rng());
    t.ops[0] += op_counters();
    res.leader.phase = Phase::Accepted;
    res.leader.key = sim.leader().session_key();
  } catch (const Error& e) {
    res.leader.phase = Phase::Rejected;
    res.leader.reason = e.code();
    for (std::size_t i = 1; i <= n; ++i) {
      res.users[i - 1].phase = sim.user(i).phase();
    }
    return res;
  }

  for (const auto& a : script) {
    if (a.kind == ActionKind::InjectForged) {
      bcast.signature = sim.suite().signature->forge(broadcast_signed_payload(bcast, *params));
    }
  }
  Bytes wire = serialize_message(bcast, *params);
  for (const auto& a : script) {
    if (a.kind == ActionKind::TamperBit) {
      if (a.bit >= wire.size() * 8) throw Error(Err::ScriptInvalid, "bit position out of range");
      wire[a.bit / 8] ^= static_cast<std::uint8_t>(1u << (a.bit % 8));
    }
  }
  t.events.push_back({2, 0, kBroadcastReceiver, wire});

  for (std::size_t i = 1; i <= n; ++i) {
    PartyOutcome& out = res.users[i - 1];
    try {
      Message parsed = parse_message(wire, params);
      const auto* b = std::get_if<BroadcastMessage>(&parsed);
      if (!b) throw Error(Err::MalformedMessage, "not a broadcast");
      reset_op_counters();
      out.key = sim.user(i).process_broadcast(*b);
      t.ops[static_cast<int>(i)] += op_counters();
      out.phase = Phase::Accepted;
    } catch (const Error& e) {
      out.phase = Phase::Rejected;
      out.reason = e.code();
    }
  }

  for (const auto& a : script) {
    if (a.kind == ActionKind::RevealKey) {
      const auto& key = res.users[a.party - 1].key;
      if (key) res.revealed[a.party] = Bytes(key->bytes.begin(), key->bytes.end());
    }
  }
  for (const auto& a : script) {
    if (a.kind == ActionKind::TestCompare) {
      auto it = res.revealed.find(a.party);
      if (it == res.revealed.end()) throw Error(Err::ScriptInvalid, "TestCompare before RevealKey");
      Rng test_rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
      res.test_compare[a.party] = (it->second == test_rng.bytes(kHashLen));
    }
  }
  return res;
}

struct MembershipResult {
  std::vector<SessionKey> keys_before;  // leader first
  std::vector<SessionKey> keys_after;
  Transcript transcript;
};

enum class MembershipKind { Join, Leave };

// Runs an honest session, then one join or leave, capturing both keys.
inline MembershipResult run_membership_scenario(MembershipKind kind, std::size_t n,
                                                const FieldParamsPtr& params, std::uint64_t seed,
                                                AbscissaMode mode = AbscissaMode::Identity) {
  if (kind == MembershipKind::Leave && n < 2)
    throw Error(Err::ScriptInvalid, "leave needs at least two users");
  Simulation sim(n, params, seed, mode);
  MembershipResult res;
  res.keys_before = sim.run_session(res.transcript);

  if (kind == MembershipKind::Join) {
    auto joiner = sim.make_join_user();
    ContributionMessage msg = joiner->prepare_contribution(sim.rng());
    res.transcript.events.push_back({3, static_cast<int>(n + 2), 0, serialize_message(msg, *params)});
    BroadcastMessage bcast = sim.leader().handle_join(msg, sim.rng());
    res.transcript.events.push_back({4, 0, kBroadcastReceiver, serialize_message(bcast, *params)});
    res.keys_after.push_back(*sim.leader().session_key());
    for (std::size_t i = 1; i <= n; ++i) res.keys_after.push_back(sim.user(i).process_broadcast(bcast));
    res.keys_after.push_back(joiner->process_broadcast(bcast));
  } else {
    // Last user leaves.
    BroadcastMessage bcast = sim.leader().handle_leave(mpz_class(n), sim.rng());
    res.transcript.events.push_back({4, 0, kBroadcastReceiver, serialize_message(bcast, *params)});
    res.keys_after.push_back(*sim.leader().session_key());
    for (std::size_t i = 1; i + 1 <= n; ++i)
      res.keys_after.push_back(sim.user(i).process_broadcast(bcast));
  }
  return res;
}

struct CostReport {
  std::size_t n = 0;
  std::size_t p_bits = 0;
  std::size_t leader_octets = 0;
  std::size_t user_octets = 0;  // upload per user (constant across users)
  int rounds = 0;
  std::uint64_t user_mults = 0;       // per-user verification multiplications
  std::uint64_t user_xor_octets = 0;  // per-user online XOR volume
  std::uint64_t leader_mults = 0;
};

inline std::vector<CostReport> measure_costs(const std::vector<std::size_t>& n_values,
                                             const FieldParamsPtr& params,
                                             std::uint64_t seed = 1) {
  std::vector<CostReport> reports;
  for (std::size_t n : n_values) {
    auto [keys, t] = run_honest_session(n, params, seed);
    (void)keys;
    CostReport r;
    r.n = n;
    r.p_bits = params->bits();
    r.leader_octets = t.octets_sent_by(0);
    r.user_octets = t.octets_sent_by(1);
    r.rounds = t.rounds();
    r.user_mults = t.ops.at(1).field_mults;
    r.user_xor_octets = t.ops.at(1).xor_octets;
    r.leader_mults = t.ops.at(0).field_mults;
    reports.push_back(r);
  }
  return reports;
}

inline std::string cost_reports_to_csv(const std::vector<CostReport>& reports) {
  std::string csv = "n,p_bits,leader_octets,user_octets,rounds,user_mults,user_xor_octets,leader_mults\n";
  for (const auto& r : reports) {
    csv += std::to_string(r.n) + "," + std::to_string(r.p_bits) + "," +
           std::to_string(r.leader_octets) + "," + std::to_string(r.user_octets) + "," +
           std::to_string(r.rounds) + "," + std::to_string(r.user_mults) + "," +
           std::to_string(r.user_xor_octets) + "," + std::to_string(r.leader_mults) + "\n";
  }
  return csv;
}

}  // namespace gka
