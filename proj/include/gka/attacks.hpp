#pragma once

#include <string>
#include <vector>

#include "gka/harness.hpp"

namespace gka {

struct ScenarioResult {
  std::string family;
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline bool all_users_rejected(const ScriptResult& r) {
  for (const auto& u : r.users)
    if (u.phase != Phase::Rejected) return false;
  return true;
}

inline void scenario_replay(std::vector<ScenarioResult>& out, const FieldParamsPtr& params,
                            std::uint64_t seed) {
  {
    AdversaryScript script{{ActionKind::Duplicate, 1}};
    ScriptResult r = run_script(script, 3, params, seed);
    bool rejected = false;
    for (const auto& [who, reason] : r.leader_rejections)
      rejected = rejected || (who == 1 && reason == Err::ReplayDetected);
    bool honest_ok = true;
    for (const auto& u : r.users) honest_ok = honest_ok && u.phase == Phase::Accepted;
    out.push_back({"replay", "same-session duplicate", rejected && honest_ok,
                   rejected ? "second copy rejected" : "duplicate was accepted"});
  }
  {
    // Record a session-1 contribution, replay it in session 2.
    Simulation sim(3, params, seed);
    std::vector<ContributionMessage> session1;
    for (std::size_t i = 1; i <= 3; ++i)
      session1.push_back(sim.user(i).prepare_contribution(sim.rng()));
    for (const auto& m : session1)
      if (sim.leader().register_contribution(m)) {
        out.push_back({"replay", "cross-session replay", false, "honest session-1 rejected"});
        return;
      }
    sim.leader().compute_round(sim.rng());

    sim.leader().begin_session();
    for (std::size_t i = 1; i <= 3; ++i) sim.user(i).begin_session();
    auto replayed = sim.leader().register_contribution(session1[0]);
    ContributionMessage fresh = sim.user(1).prepare_contribution(sim.rng());
    auto accepted = sim.leader().register_contribution(fresh);
    bool pass = replayed.has_value() && *replayed == Err::ReplayDetected && !accepted.has_value();
    out.push_back({"replay", "cross-session replay", pass,
                   pass ? "stale counter rejected, fresh one accepted"
                        : "replayed message not rejected"});
  }
}

inline void scenario_tamper(std::vector<ScenarioResult>& out, std::uint64_t seed) {
  // Exhaustive single-bit sweep at n=3, p=97.
  FieldParamsPtr p97 = field_params(97);
  auto [keys, t] = run_honest_session(3, p97, seed);
  (void)keys;
  std::size_t wire_bits = 0;
  for (const auto& e : t.events)
    if (e.receiver == kBroadcastReceiver) wire_bits = e.octets() * 8;

  std::size_t accepted = 0;
  for (std::size_t bit = 0; bit < wire_bits; ++bit) {
    AdversaryScript script{{ActionKind::TamperBit, 0, bit}};
    ScriptResult r = run_script(script, 3, p97, seed);
    if (!all_users_rejected(r)) ++accepted;
  }
  out.push_back({"tamper", "broadcast bit sweep n=3 p=97", accepted == 0,
                 std::to_string(wire_bits) + " positions, " + std::to_string(accepted) +
                     " wrongly accepted"});
}

inline void scenario_forge(std::vector<ScenarioResult>& out, const FieldParamsPtr& params,
                           std::uint64_t seed) {
  AdversaryScript script{{ActionKind::InjectForged}};
  ScriptResult r = run_script(script, 3, params, seed);
  bool pass = true;
  for (const auto& u : r.users)
    pass = pass && u.phase == Phase::Rejected && u.reason == Err::SignatureInvalid;
  out.push_back({"forge", "forged broadcast signature", pass,
                 pass ? "all users rejected SignatureInvalid" : "a user accepted a forgery"});
}

inline void scenario_omission(std::vector<ScenarioResult>& out, const FieldParamsPtr& params,
                              std::uint64_t seed) {
  AdversaryScript script{{ActionKind::CorruptLeaderOmit, 2}};
  ScriptResult r = run_script(script, 3, params, seed);
  bool victim = r.users[1].phase == Phase::Rejected && r.users[1].reason == Err::ContributionNotUsed;
  bool others = r.users[0].phase == Phase::Accepted && r.users[2].phase == Phase::Accepted;
  out.push_back({"omission", "malicious leader omits user 2", victim && others,
                 victim ? "victim detected omission" : "victim failed to detect omission"});
}

inline void scenario_drop(std::vector<ScenarioResult>& out, const FieldParamsPtr& params,
                          std::uint64_t seed) {
  AdversaryScript script{{ActionKind::Drop, 1}};
  ScriptResult r = run_script(script, 3, params, seed);
  bool pass = r.leader.phase == Phase::Rejected && r.leader.reason == Err::MissingContributions;
  for (const auto& u : r.users) pass = pass && u.phase != Phase::Accepted;
  out.push_back({"drop", "dropped contribution stalls the round", pass,
                 pass ? "leader reported the absent id" : "round completed despite the drop"});
}

inline void scenario_membership(std::vector<ScenarioResult>& out, const FieldParamsPtr& params,
                                std::uint64_t seed) {
  {
    MembershipResult r = run_membership_scenario(MembershipKind::Join, 2, params, seed);
    bool fresh = true, agree = true;
    for (const auto& k : r.keys_after) {
      fresh = fresh && (k != r.keys_before.front());
      agree = agree && (k == r.keys_after.front());
    }
    out.push_back({"membership", "join refreshes the key", fresh && agree,
                   fresh ? "post-join key fresh and agreed" : "key did not change on join"});
  }
  {
    MembershipResult r = run_membership_scenario(MembershipKind::Leave, 3, params, seed);
    bool fresh = true, agree = true;
    for (const auto& k : r.keys_after) {
      fresh = fresh && (k != r.keys_before.front());
      agree = agree && (k == r.keys_after.front());
    }
    out.push_back({"membership", "leave refreshes the key", fresh && agree,
                   fresh ? "post-leave key fresh and agreed" : "key did not change on leave"});
  }
}

}  // namespace detail

// Bundled adversary-script corpus. `filter` selects one family; empty runs
// everything.
inline std::vector<ScenarioResult> run_attack_corpus(const FieldParamsPtr& params,
                                                     std::uint64_t seed,
                                                     const std::string& filter = "") {
  std::vector<ScenarioResult> out;
  auto want = [&](const char* family) { return filter.empty() || filter == family; };
  if (want("replay")) detail::scenario_replay(out, params, seed);
  if (want("tamper")) detail::scenario_tamper(out, seed);
  if (want("forge")) detail::scenario_forge(out, params, seed);
  if (want("omission")) detail::scenario_omission(out, params, seed);
  if (want("drop")) detail::scenario_drop(out, params, seed);
  if (want("membership")) detail::scenario_membership(out, params, seed);
  if (out.empty()) throw Error(Err::ScriptInvalid, "unknown scenario family: " + filter);
  return out;
}

}  // namespace gka
