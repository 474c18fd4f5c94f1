#pragma once

// Channel party state machine. Every input returns the list of actions the
// surrounding actor should perform (messages, transactions, timers); the
// machine itself never touches the network or the chain.

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "brick/channel.hpp"
#include "brick/ledger.hpp"
#include "brick/messages.hpp"
#include "brick/netsim.hpp"

namespace brick {

enum class PartyBehavior : std::uint8_t {
  Honest,
  WithholdCountersign,
  StaleCloseBriber,
  CrashAfterCommit,
  Silent,
  NoBroadcast,
  TamperHistory,
};

struct PartyStrategy {
  PartyBehavior kind = PartyBehavior::Honest;
  /// StaleCloseBriber: amount offered to each warden.
  Coins bribe = 0;
  /// CrashAfterCommit: crash once this sequence number is committed.
  Seq crash_seq = 2;

  /// Tags: honest, withhold-countersign, stale-close-briber[:BRIBE],
  /// crash-after-commit[:SEQ], silent, no-broadcast, tamper-history.
  static Result<PartyStrategy> parse(std::string_view tag);
  std::string tag() const;
  bool byzantine() const { return kind != PartyBehavior::Honest; }
};

enum class CloseMode : std::uint8_t { Optimistic, Pessimistic };

struct PartyConfig {
  Role role = Role::A;
  ChannelId channel;
  PartyKeys parties;
  Mode mode = Mode::Brick;
  std::vector<PublicKey> wardens;
  std::uint64_t t = 7;
  std::uint64_t f = 3;
  Coins total = 0;
  Coins update_fee = 1;
  Height confirm_depth = 6;
  Height liveness_bound = 2;
  /// Payments to A (negative: to B), one per update, seq 2 onward.
  std::vector<std::int64_t> workload;
  /// This party starts the close once it commits `close_at_seq`
  /// (0: after the workload).
  bool closer = false;
  Seq close_at_seq = 0;
  CloseMode close_mode = CloseMode::Optimistic;
  SimTime retransmit_interval = from_ms(400);
  SimTime warden_timeout = from_ms(2000);
  SimTime stall_timeout = from_ms(20000);
  SimTime optimistic_timeout = from_ms(180000);
  /// Local acceptance rule for incoming proposals; empty accepts everything
  /// that conserves funds.
  std::function<bool(const ChannelState& prev, const ChannelState& next)> policy;
};

struct Target {
  enum class Kind : std::uint8_t { Counterparty, Warden, Auditor };
  Kind kind = Kind::Counterparty;
  std::uint32_t index = 0;

  static Target counterparty() { return {Kind::Counterparty, 0}; }
  static Target warden(std::uint32_t i) { return {Kind::Warden, i}; }
  static Target auditor() { return {Kind::Auditor, 0}; }
};

enum class TimerKind : std::uint8_t { Retransmit, Stall, OptimisticTimeout };

namespace act {
struct Send {
  Target to;
  Message msg;
};
/// Sequential sends to wardens, in order.
struct Broadcast {
  std::vector<std::pair<std::uint32_t, Message>> msgs;
};
struct Submit {
  ContractCall call;
};
struct Timer {
  SimTime delay = 0;
  TimerKind kind = TimerKind::Retransmit;
  std::uint64_t generation = 0;
};
struct Crash {};
}  // namespace act

using Action = std::variant<act::Send, act::Broadcast, act::Submit, act::Timer, act::Crash>;
using Actions = std::vector<Action>;

/// Everything a party knows about one sequence number.
struct SignedState {
  ChannelState state;
  StateCommitment commitment;
  std::optional<Announcement> ann;
};

struct UpdateStats {
  SimTime broadcast_at = -1;
  SimTime quorum_at = -1;
  SimTime all_acked_at = -1;
};

class Party {
 public:
  /// `initial` is the both-signed state and announcement at seq 1.
  Party(KeyPair keys, PartyConfig config, PartyStrategy strategy, SignedState initial,
        std::uint64_t seed);

  const PartyConfig& config() const { return config_; }
  const PartyStrategy& strategy() const { return strategy_; }
  Role role() const { return config_.role; }
  const PublicKey& public_key() const { return keys_.public_key(); }

  /// Kicks off the workload.
  Actions start(SimTime now);
  Actions on_message(SimTime now, Target from, const Message& m);
  Actions on_timer(SimTime now, TimerKind kind, std::uint64_t generation);
  Actions on_block(SimTime now, const BrickContract& contract, const Chain& chain);

  // Protocol operations. The event handlers above call these; they are public
  // so tests can drive a party step by step.
  Result<Actions> propose_update(SimTime now, Coins balance_a, Coins balance_b);
  Result<Actions> countersign_update(SimTime now, const msg::Propose& p);
  Actions broadcast_update(SimTime now, Seq seq);
  Actions request_optimistic_close(SimTime now);
  Actions respond_optimistic_close(const BrickContract& contract);
  Actions request_pessimistic_close(SimTime now);
  Result<Actions> monitor_and_finalize(const BrickContract& contract, const Chain& chain);
  FeeTicket pay_fee(std::uint32_t warden);

  /// Proofs for every finalized claim contradicted by an archived ack.
  std::vector<ProofOfFraud> assemble_proofs(const BrickContract& contract, const Chain& chain) const;

  Seq latest_valid() const { return latest_valid_; }
  Seq committed() const { return committed_; }
  std::optional<Seq> in_flight() const { return in_flight_; }
  const std::map<Seq, SignedState>& states() const { return states_; }
  const SignedState* state_at(Seq s) const;
  const std::map<PublicKey, WardenAck>& ack_archive() const { return archive_; }
  std::size_t ack_count(Seq s) const;
  const std::map<Seq, UpdateStats>& update_stats() const { return stats_; }
  const std::map<std::uint32_t, Coins>& fees_paid() const { return fee_sent_; }
  const std::set<std::uint32_t>& dropped_wardens() const { return dropped_; }
  bool crashed() const { return crashed_; }
  bool closing() const { return close_requested_; }
  std::optional<SimTime> close_requested_at() const { return close_requested_at_; }
  bool workload_done() const;
  Seq final_workload_seq() const { return 1 + config_.workload.size(); }
  /// Seq and balance A of the optimistic claim this party filed, if any.
  std::optional<std::pair<Seq, Coins>> optimistic_claim() const { return opt_claim_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  std::optional<Seq> stale_target() const { return stale_target_; }

 private:
  Role proposer_of(Seq s) const { return s % 2 == 0 ? Role::A : Role::B; }
  std::optional<Digest> head_at(Seq s) const;
  Actions on_propose(SimTime now, const msg::Propose& p);
  Actions on_countersign(SimTime now, const msg::Countersign& c);
  Actions on_ann_sig(SimTime now, const msg::AnnSig& a);
  Actions on_ack(SimTime now, std::uint32_t warden, const WardenAck& ack);
  Actions on_reject(std::uint32_t warden, const msg::Reject& r);
  Actions on_optimistic_close(const msg::OptimisticClose& m);
  Actions on_history_request();
  Actions after_commit(SimTime now, Seq seq);
  Actions next_step(SimTime now);
  Actions begin_close(SimTime now);
  Actions stale_close(SimTime now);
  Actions retransmit(SimTime now);
  Actions arm_stall();
  void note(std::string text) { diagnostics_.push_back(std::move(text)); }

  KeyPair keys_;
  PartyConfig config_;
  PartyStrategy strategy_;
  std::mt19937_64 rng_;

  std::map<Seq, SignedState> states_;
  std::map<Seq, Signature> own_ann_sig_;
  Seq latest_valid_ = 1;
  Seq committed_ = 1;
  std::optional<Seq> in_flight_;
  std::optional<msg::Propose> deferred_;

  std::map<Seq, std::set<PublicKey>> acks_;
  std::map<PublicKey, WardenAck> archive_;
  std::map<Seq, UpdateStats> stats_;

  struct OutboxEntry {
    Seq seq;
    FeeTicket ticket;
  };
  std::map<std::uint32_t, std::deque<OutboxEntry>> outbox_;
  std::map<std::uint32_t, SimTime> waiting_since_;
  std::map<std::uint32_t, Coins> fee_sent_;
  std::set<std::uint32_t> dropped_;
  bool retransmit_armed_ = false;
  std::uint64_t stall_generation_ = 0;

  bool crashed_ = false;
  bool close_requested_ = false;
  std::optional<SimTime> close_requested_at_;
  bool close_started_ = false;
  std::optional<std::pair<Seq, Coins>> opt_claim_;
  std::optional<msg::OptimisticClose> opt_offer_;
  std::optional<Height> opt_submitted_at_;
  std::optional<Height> agree_submitted_at_;
  std::optional<Height> finalize_submitted_at_;
  std::optional<Seq> stale_target_;
  Seq known_closing_seq_ = 0;
  bool closed_seen_ = false;
  std::vector<std::string> diagnostics_;
};

}  // namespace brick
