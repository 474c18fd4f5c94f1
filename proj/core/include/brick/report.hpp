#pragma once

// Run report and the safety judgement applied to every finished run.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brick/incentives.hpp"
#include "brick/ledger.hpp"
#include "brick/scenario.hpp"

namespace brick {

inline constexpr std::string_view kReportSchema = "brick-report/1";

/// What the safety judgement needs to know about a finished close.
struct SafetyFacts {
  bool closed = false;
  CloseKind kind = CloseKind::None;
  std::optional<Seq> closing_seq;
  /// Highest seq acknowledged by at least t distinct wardens.
  Seq ack_quorum_seq = 1;
  /// Optimistic close: whether the agreed split is that of a state both
  /// parties signed.
  bool optimistic_split_signed = false;
  /// Pessimistic close: whether the party payouts cover the balances of the
  /// closing state.
  bool payouts_cover_state = true;
  /// Per honest party: payout and balance in the freshest committed state.
  std::vector<std::pair<Coins, Coins>> honest_payout_vs_due;
};

struct SafetyVerdict {
  bool ok = true;
  std::string reason;
};

/// A run is safe when the channel never closed, or closed
///  - pessimistically at a seq no lower than any ack quorum, with payouts
///    matching that state,
///  - optimistically at a split both parties signed, or
///  - through the fraud-majority branch without leaving an honest party below
///    its freshest committed balance.
SafetyVerdict judge_safety(const SafetyFacts& facts);

struct UpdateLatency {
  Seq seq = 0;
  double broadcast_ms = 0;
  double quorum_ms = 0;
  double latency_ms = 0;
};

struct RunReport {
  nlohmann::json config;
  std::string scenario;
  std::uint64_t seed = 0;
  RunMode mode = RunMode::Brick;

  std::string final_phase;
  std::string close_kind = "none";
  std::optional<Seq> closing_seq;
  Seq ack_quorum_seq = 1;
  Seq freshest_committed = 1;
  Seq final_workload_seq = 1;
  bool all_updates_committed = false;
  std::map<std::string, Coins> payouts;

  bool safety_ok = true;
  std::string safety_reason;
  bool liveness_ok = false;
  std::optional<double> liveness_ms;
  double end_ms = 0;
  std::uint64_t blocks = 0;

  std::uint64_t proofs_used = 0;
  std::vector<std::string> slashed;
  /// Wardens whose signatures formed a proof of fraud, whether or not it was
  /// submitted.
  std::vector<std::string> equivocators;
  std::optional<SettlementReport> settlement;
  std::vector<UpdateLatency> latencies;

  std::map<std::string, std::uint64_t> event_counts;
  std::string trace_digest;
  std::uint64_t trace_events = 0;

  nlohmann::json audit;
  nlohmann::json baseline;
  nlohmann::json incentives;
  nlohmann::json paired;
  /// Internal invariant failures; any entry is a bug, not an outcome.
  std::vector<std::string> violations;
  std::vector<std::string> diagnostics;

  /// 0 on success; 1 for a safety violation in a Brick run or any internal
  /// invariant failure.
  int exit_code() const;
  nlohmann::json to_json() const;
};

}  // namespace brick
