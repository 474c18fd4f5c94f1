#include "brick/brick_plus.hpp"

#include <fmt/format.h>

namespace brick {

Digest genesis_head() { return Digest{}; }

Digest chain_head(const Digest& prev_head, const Digest& commitment, Seq seq) {
  ByteWriter w;
  w.blob(prev_head).blob(commitment).u64(seq);
  return hash(w.bytes());
}

Digest extend_chain(const Digest& prev_head, const ChannelState& state) {
  return chain_head(prev_head, commit_state(state), state.seq);
}

Result<StateCommitment> propose_chained_commitment(const ChannelId& channel,
                                                   const ChannelState& state, Coins total,
                                                   Seq previous_seq, const Digest& prev_head,
                                                   const KeyPair& proposer, Role proposer_role) {
  if (state.total() != total) return Errc::ConservationViolation;
  if (state.seq != previous_seq + 1) return Errc::NonMonotoneSeq;
  StateCommitment c;
  c.channel = channel;
  c.commitment = commit_state(state);
  c.seq = state.seq;
  c.head = chain_head(prev_head, c.commitment, c.seq);
  c.sig(proposer_role) = sign_commitment(c, proposer);
  return c;
}

Result<StateCommitment> make_chained_commitment(const ChannelId& channel, const ChannelState& state,
                                                Coins total, Seq previous_seq,
                                                const Digest& prev_head, const KeyPair& key_a,
                                                const KeyPair& key_b) {
  auto c = propose_chained_commitment(channel, state, total, previous_seq, prev_head, key_a,
                                      Role::A);
  if (!c) return c;
  c->sig_b = sign_commitment(*c, key_b);
  return c;
}

std::vector<Digest> replay_chain(const StateHistory& history) {
  std::vector<Digest> heads;
  heads.reserve(history.size());
  Digest prev = genesis_head();
  for (const auto& s : history) {
    prev = extend_chain(prev, s);
    heads.push_back(prev);
  }
  return heads;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Tampered: return "tampered";
    case Verdict::Unresponsive: return "unresponsive";
  }
  return "unknown";
}

std::optional<ClosingClaim> max_head_claim(const std::vector<ClosingClaim>& claims) {
  std::optional<ClosingClaim> best;
  for (const auto& c : claims) {
    if (!c.head) continue;
    if (!best || c.seq > best->seq) best = c;
  }
  return best;
}

HistoryCheck verify_history(const StateHistory& history, const std::vector<ClosingClaim>& claims) {
  auto target = max_head_claim(claims);
  if (!target) return {Verdict::Tampered, "no on-chain head to compare against"};
  if (history.empty()) return {Verdict::Tampered, "empty history"};
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history[i].seq != i + 1) {
      return {Verdict::Tampered, fmt::format("position {} carries seq {}", i + 1, history[i].seq)};
    }
  }
  if (history.back().seq != target->seq) {
    return {Verdict::Tampered,
            fmt::format("history ends at {} but chain closed at {}", history.back().seq, target->seq)};
  }
  auto heads = replay_chain(history);
  if (heads.back() != *target->head) return {Verdict::Tampered, "recomputed head differs"};
  return {Verdict::Consistent, {}};
}

Verdict AuditReport::overall() const {
  Verdict out = Verdict::Consistent;
  for (const auto& [role, check] : parties) {
    if (check.verdict == Verdict::Tampered) return Verdict::Tampered;
    if (check.verdict == Verdict::Unresponsive) out = Verdict::Unresponsive;
  }
  return out;
}

std::optional<Role> AuditReport::culprit() const {
  for (Verdict v : {Verdict::Tampered, Verdict::Unresponsive}) {
    for (const auto& [role, check] : parties) {
      if (check.verdict == v) return role;
    }
  }
  return std::nullopt;
}

void Auditor::on_history(Role from, StateHistory history) {
  histories_.emplace(from, std::move(history));
}

AuditReport Auditor::finish(const std::vector<ClosingClaim>& claims) const {
  AuditReport report;
  if (auto target = max_head_claim(claims)) {
    report.closing_seq = target->seq;
    report.head = *target->head;
  }
  for (Role r : {Role::A, Role::B}) {
    auto it = histories_.find(r);
    if (it == histories_.end()) {
      report.parties[r] = {Verdict::Unresponsive, "no history received"};
    } else {
      report.parties[r] = verify_history(it->second, claims);
    }
  }
  report.punish = report.overall() != Verdict::Consistent;
  return report;
}

}  // namespace brick
