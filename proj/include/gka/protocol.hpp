#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gka/codec.hpp"
#include "gka/crypto.hpp"
#include "gka/errors.hpp"
#include "gka/field.hpp"
#include "gka/util.hpp"

namespace gka {

enum class AbscissaMode {
  Identity,  // interpolation abscissa is the party identity
  Hashed,    // abscissa derived as truncate-to-field(H(id || x)), hides x from peers
};

enum class Phase { Idle, Sent, Accepted, Rejected };

// Nonzero field element identifying a party; doubles as the interpolation
// abscissa in Identity mode.
class PartyId {
 public:
  explicit PartyId(FieldElement id) : id_(std::move(id)) {
    if (id_.is_zero()) throw std::invalid_argument("party id must be nonzero");
  }

  const FieldElement& element() const { return id_; }
  const mpz_class& value() const { return id_.value(); }

  bool operator==(const PartyId& o) const { return id_ == o.id_; }

 private:
  FieldElement id_;
};

struct Contribution {
  mpz_class party;
  FieldElement x;
  std::uint64_t counter;
};

namespace detail {

// Deterministic truncate-to-field map for Hashed abscissa mode. Retries
// with an incremented suffix until the candidate lands in [1, p).
inline FieldElement derive_abscissa(const HashFn& h, const mpz_class& id, const FieldElement& x) {
  const FieldParamsPtr& params = x.params();
  const std::size_t w = params->width();
  const unsigned top_bits = static_cast<unsigned>(params->bits() % 8);
  Bytes prefix;
  prefix.push_back(0x05);
  Bytes idb = id_bytes(id, *params);
  prefix.insert(prefix.end(), idb.begin(), idb.end());
  Bytes xb = x.to_bytes();
  prefix.insert(prefix.end(), xb.begin(), xb.end());

  for (std::uint32_t attempt = 0;; ++attempt) {
    Bytes raw;
    for (std::uint32_t block = 0; raw.size() < w; ++block) {
      Bytes input = prefix;
      append_u32_be(input, attempt);
      append_u32_be(input, block);
      Bytes digest = h(input);
      std::size_t take = std::min(digest.size(), w - raw.size());
      raw.insert(raw.end(), digest.begin(), digest.begin() + take);
    }
    if (top_bits != 0) raw[0] &= static_cast<std::uint8_t>(0xFF >> (8 - top_bits));
    mpz_class v;
    mpz_import(v.get_mpz_t(), raw.size(), 1, 1, 1, 0, raw.data());
    if (v == 0 || v >= params->p()) continue;
    return FieldElement(std::move(v), params);
  }
}

inline FieldElement abscissa_for(AbscissaMode mode, const HashFn& h, const mpz_class& id,
                                 const FieldElement& x, const FieldParamsPtr& params) {
  if (mode == AbscissaMode::Identity) return FieldElement(id, params);
  return derive_abscissa(h, id, x);
}

}  // namespace detail

// State machine for a low-power user U_i.
class User {
 public:
  User(PartyId me, PartyId leader, FieldParamsPtr params, CryptoSuite suite,
       SignatureKeypair keys, Bytes leader_enc_key, Bytes leader_verify_key,
       AbscissaMode mode = AbscissaMode::Identity)
      : me_(std::move(me)),
        leader_(std::move(leader)),
        params_(std::move(params)),
        suite_(std::move(suite)),
        keys_(std::move(keys)),
        leader_enc_key_(std::move(leader_enc_key)),
        leader_verify_key_(std::move(leader_verify_key)),
        mode_(mode) {
    if (me_ == leader_) throw std::invalid_argument("user id equals leader id");
  }

  Phase phase() const { return phase_; }
  std::uint64_t counter() const { return counter_; }
  const PartyId& id() const { return me_; }
  const std::optional<FieldElement>& current_x() const { return x_; }

  // Reuses the party's long-term state for a new session. The counter is
  // persistent and keeps increasing.
  void begin_session() {
    phase_ = Phase::Idle;
    x_.reset();
  }

  // Step 1: sample x_i, bump the counter, encrypt and sign
  // id_i || id_0 || x_i || C_i. Fully computable offline.
  ContributionMessage prepare_contribution(Rng& rng) {
    if (phase_ != Phase::Idle) throw Error(Err::InvalidState, "contribution already sent");
    x_ = sample_field_element(rng, params_);
    ++counter_;
    Bytes pt = encode_contribution_plaintext(me_.value(), leader_.value(), *x_, counter_);
    ContributionMessage msg;
    msg.sender_id = me_.value();
    msg.ciphertext = suite_.encryption->encrypt(leader_enc_key_, pt, rng);
    msg.signature = suite_.signature->sign(keys_.signing_key, pt);
    phase_ = Phase::Sent;
    return msg;
  }

  // Step 5: verify sig_0, unmask K with one XOR pass, decode the
  // coefficients and confirm A(abscissa_i) = x_i with n multiplications.
  SessionKey process_broadcast(const BroadcastMessage& m) {
    if (phase_ != Phase::Sent && phase_ != Phase::Accepted)
      throw Error(Err::InvalidState, "no contribution in flight");
    try {
      if (m.leader_id != leader_.value() ||
          !suite_.signature->verify(leader_verify_key_, broadcast_signed_payload(m, *params_),
                                    m.signature))
        throw Error(Err::SignatureInvalid);

      const Bytes* share = nullptr;
      for (const auto& [id, p] : m.shares) {
        if (id == me_.value()) {
          share = &p;
          break;
        }
      }
      if (!share) throw Error(Err::ShareMissing);

      Bytes ks = keystream(*suite_.hash, me_.value(), leader_.value(), counter_, *x_, share->size());
      Bytes master = mask_secret(*share, ks);
      SecretPolynomial poly = decode_secret(master, params_);
      FieldElement abscissa =
          detail::abscissa_for(mode_, *suite_.hash, me_.value(), *x_, params_);
      if (poly_eval_horner(poly, abscissa) != *x_) throw Error(Err::ContributionNotUsed);

      SessionKey key = derive_session_key(*suite_.hash, master, Roster(m.roster_ids), *params_);
      phase_ = Phase::Accepted;
      return key;
    } catch (...) {
      phase_ = Phase::Rejected;
      x_.reset();
      throw;
    }
  }

 private:
  PartyId me_;
  PartyId leader_;
  FieldParamsPtr params_;
  CryptoSuite suite_;
  SignatureKeypair keys_;
  Bytes leader_enc_key_;
  Bytes leader_verify_key_;
  AbscissaMode mode_;
  std::uint64_t counter_ = 0;
  std::optional<FieldElement> x_;
  Phase phase_ = Phase::Idle;
};

// State machine for the powerful leader U_0.
class Leader {
 public:
  Leader(PartyId me, std::vector<mpz_class> roster_ids, FieldParamsPtr params, CryptoSuite suite,
         EncryptionKeypair enc_keys, SignatureKeypair sig_keys,
         std::map<mpz_class, Bytes> user_verify_keys, AbscissaMode mode = AbscissaMode::Identity)
      : me_(std::move(me)),
        roster_(std::move(roster_ids)),
        params_(std::move(params)),
        suite_(std::move(suite)),
        enc_keys_(std::move(enc_keys)),
        sig_keys_(std::move(sig_keys)),
        user_verify_keys_(std::move(user_verify_keys)),
        mode_(mode) {
    if (roster_.contains(me_.value()))
      throw std::invalid_argument("leader id collides with a roster id");
    for (const auto& id : roster_.ids())
      if (id == 0) throw std::invalid_argument("zero roster id");
  }

  const Roster& roster() const { return roster_; }
  const PartyId& id() const { return me_; }
  const std::optional<SessionKey>& session_key() const { return key_; }
  std::uint64_t last_counter(const mpz_class& id) const {
    auto it = last_counters_.find(id);
    return it == last_counters_.end() ? 0 : it->second;
  }

  // Drops per-session material; counters and roster persist.
  void begin_session() {
    pending_.clear();
    x0_.reset();
    key_.reset();
  }

  // Step 2: decrypt, verify the signature, cross-check identities and
  // enforce strictly increasing counters.
  std::optional<Err> register_contribution(const ContributionMessage& msg) {
    if (!roster_.contains(msg.sender_id)) return Err::UnknownSender;
    auto vk = user_verify_keys_.find(msg.sender_id);
    if (vk == user_verify_keys_.end()) return Err::UnknownSender;

    Bytes pt;
    try {
      pt = suite_.encryption->decrypt(enc_keys_.decryption_key, msg.ciphertext);
    } catch (const Error&) {
      return Err::DecryptionFailure;
    }
    ContributionPlaintext fields{mpz_class(), mpz_class(), FieldElement(0, params_), 0};
    try {
      fields = decode_contribution_plaintext(pt, params_);
    } catch (const Error&) {
      return Err::DecryptionFailure;
    }
    if (!suite_.signature->verify(vk->second, pt, msg.signature)) return Err::SignatureInvalid;
    if (fields.id_i != msg.sender_id || fields.id_0 != me_.value()) return Err::IdMismatch;
    if (fields.counter <= last_counter(msg.sender_id)) return Err::ReplayDetected;
    if (pending_.count(msg.sender_id)) return Err::DuplicateSubmission;

    last_counters_[msg.sender_id] = fields.counter;
    pending_.emplace(msg.sender_id, Contribution{msg.sender_id, fields.x, fields.counter});
    return std::nullopt;
  }

  // Steps 3-4: fresh x_0, interpolate all n+1 points, mask K per user and
  // sign (ID_0, Y, U).
  BroadcastMessage compute_round(Rng& rng) { return compute_round_impl({}, rng); }

  // Adversarial hook for the harness: interpolate without the listed
  // parties' points while still addressing them a share.
  BroadcastMessage compute_round_omitting(const std::vector<mpz_class>& omitted, Rng& rng) {
    return compute_round_impl(omitted, rng);
  }

  // Membership change: admit one contribution from outside the roster and
  // redistribute with a refreshed x_0.
  BroadcastMessage handle_join(const ContributionMessage& msg, Rng& rng) {
    if (roster_.contains(msg.sender_id)) throw Error(Err::AlreadyMember);
    std::vector<mpz_class> ids = roster_.ids();
    ids.push_back(msg.sender_id);
    roster_ = Roster(std::move(ids));
    if (auto reject = register_contribution(msg)) {
      std::vector<mpz_class> rollback;
      for (const auto& id : roster_.ids())
        if (id != msg.sender_id) rollback.push_back(id);
      roster_ = Roster(std::move(rollback));
      throw Error(*reject);
    }
    return compute_round(rng);
  }

  // Membership change: discard the departing share and redistribute.
  BroadcastMessage handle_leave(const mpz_class& departing, Rng& rng) {
    if (!roster_.contains(departing)) throw Error(Err::NotAMember);
    if (roster_.size() < 2) throw Error(Err::GroupTooSmall);
    std::vector<mpz_class> remaining;
    for (const auto& id : roster_.ids())
      if (id != departing) remaining.push_back(id);
    roster_ = Roster(std::move(remaining));
    pending_.erase(departing);
    return compute_round(rng);
  }

 private:
  BroadcastMessage compute_round_impl(const std::vector<mpz_class>& omitted, Rng& rng) {
    std::vector<mpz_class> missing;
    for (const auto& id : roster_.ids())
      if (!pending_.count(id)) missing.push_back(id);
    if (!missing.empty()) {
      std::ostringstream os;
      for (const auto& id : missing) os << ' ' << id.get_str();
      throw Error(Err::MissingContributions, "absent:" + os.str());
    }

    x0_ = sample_field_element(rng, params_);

    std::vector<std::pair<FieldElement, FieldElement>> points;
    for (const auto& id : roster_.ids()) {
      bool omit = false;
      for (const auto& o : omitted) omit = omit || (o == id);
      if (omit) continue;
      const Contribution& c = pending_.at(id);
      points.emplace_back(detail::abscissa_for(mode_, *suite_.hash, id, c.x, params_), c.x);
    }
    points.emplace_back(detail::abscissa_for(mode_, *suite_.hash, me_.value(), *x0_, params_),
                        *x0_);
    SecretPolynomial poly = lagrange_interpolate(points);
    Bytes master = encode_secret(poly, *params_);
    // Wire format fixes share length at (n+1)*w; pad the coefficient
    // vector with zero coefficients when points were omitted.
    const std::size_t target = (roster_.size() + 1) * params_->width();
    if (master.size() < target) master.resize(target, 0);

    BroadcastMessage m;
    m.leader_id = me_.value();
    for (const auto& id : roster_.ids()) {
      const Contribution& c = pending_.at(id);
      Bytes ks = keystream(*suite_.hash, id, me_.value(), c.counter, c.x, master.size());
      m.shares.emplace_back(id, mask_secret(master, ks));
    }
    m.roster_ids = roster_.ids();
    m.signature = suite_.signature->sign(sig_keys_.signing_key,
                                         broadcast_signed_payload(m, *params_));
    key_ = derive_session_key(*suite_.hash, master, roster_, *params_);
    return m;
  }

  PartyId me_;
  Roster roster_;
  FieldParamsPtr params_;
  CryptoSuite suite_;
  EncryptionKeypair enc_keys_;
  SignatureKeypair sig_keys_;
  std::map<mpz_class, Bytes> user_verify_keys_;
  AbscissaMode mode_;
  std::map<mpz_class, Contribution> pending_;
  std::map<mpz_class, std::uint64_t> last_counters_;
  std::optional<FieldElement> x0_;
  std::optional<SessionKey> key_;
};

}  // namespace gka
