#include "brick/report.hpp"

#include <fmt/format.h>

namespace brick {

SafetyVerdict judge_safety(const SafetyFacts& f) {
  if (!f.closed) return {true, "channel still open"};
  switch (f.kind) {
    case CloseKind::Optimistic:
      if (!f.optimistic_split_signed) return {false, "optimistic split matches no both-signed state"};
      return {true, "optimistic close at a both-signed state"};
    case CloseKind::Pessimistic:
      if (!f.closing_seq) return {false, "pessimistic close without a closing seq"};
      if (*f.closing_seq < f.ack_quorum_seq) {
        return {false, fmt::format("closed at {} below committed {}", *f.closing_seq, f.ack_quorum_seq)};
      }
      if (!f.payouts_cover_state) return {false, "payouts do not match the closing state"};
      return {true, fmt::format("closed at freshest committed seq {}", *f.closing_seq)};
    case CloseKind::FraudMajority:
      for (const auto& [got, due] : f.honest_payout_vs_due) {
        if (got < due) return {false, fmt::format("honest party received {} of {}", got, due)};
      }
      return {true, "fraud majority; honest parties made whole"};
    case CloseKind::None:
      break;
  }
  return {false, "closed without a close kind"};
}

int RunReport::exit_code() const {
  if (!violations.empty()) return 1;
  if (mode != RunMode::Baseline && !safety_ok) return 1;
  return 0;
}

namespace {

template <class T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["mode"] = to_string(mode);
  j["config"] = config;
  j["final_phase"] = final_phase;
  j["close_kind"] = close_kind;
  j["closing_seq"] = opt(closing_seq);
  j["ack_quorum_seq"] = ack_quorum_seq;
  j["freshest_committed_seq"] = freshest_committed;
  j["final_workload_seq"] = final_workload_seq;
  j["all_updates_committed"] = all_updates_committed;
  j["payouts"] = payouts;
  j["safety_ok"] = safety_ok;
  j["safety_reason"] = safety_reason;
  j["liveness_ok"] = liveness_ok;
  j["liveness_ms"] = opt(liveness_ms);
  j["end_ms"] = end_ms;
  j["blocks"] = blocks;
  j["proofs_used"] = proofs_used;
  j["slashed"] = slashed;
  j["equivocators"] = equivocators;
  j["fee_reconciliation"] = settlement ? settlement->to_json() : nlohmann::json(nullptr);
  auto lat = nlohmann::json::array();
  for (const auto& l : latencies) {
    lat.push_back({{"seq", l.seq},
                   {"broadcast_ms", l.broadcast_ms},
                   {"quorum_ms", l.quorum_ms},
                   {"latency_ms", l.latency_ms}});
  }
  j["commit_latency"] = lat;
  j["event_counts"] = event_counts;
  j["trace_digest"] = trace_digest;
  j["trace_events"] = trace_events;
  if (!audit.is_null()) j["audit"] = audit;
  if (!baseline.is_null()) j["baseline"] = baseline;
  if (!incentives.is_null()) j["incentives"] = incentives;
  if (!paired.is_null()) j["paired"] = paired;
  j["violations"] = violations;
  j["diagnostics"] = diagnostics;
  j["exit_code"] = exit_code();
  return j;
}

}  // namespace brick
