#pragma once

// Hash-chained announcements and the audit flow.
//
// head_i = H(head_{i-1} || H(state_i, salt_i) || i), head_0 = 32 zero bytes.
// Wardens store only the latest head and its sequence number; an auditor
// later recomputes the chain from a party's full history and compares the
// result with the head recorded on-chain at the closing sequence number.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "brick/channel.hpp"
#include "brick/ledger.hpp"

namespace brick {

Digest genesis_head();
Digest chain_head(const Digest& prev_head, const Digest& commitment, Seq seq);
/// Head obtained by appending `state` (with its own seq and salt).
Digest extend_chain(const Digest& prev_head, const ChannelState& state);

/// Half-signed hash-chained commitment; the proposer signs the head.
Result<StateCommitment> propose_chained_commitment(const ChannelId& channel,
                                                   const ChannelState& state, Coins total,
                                                   Seq previous_seq, const Digest& prev_head,
                                                   const KeyPair& proposer, Role proposer_role);
Result<StateCommitment> make_chained_commitment(const ChannelId& channel, const ChannelState& state,
                                                Coins total, Seq previous_seq,
                                                const Digest& prev_head, const KeyPair& key_a,
                                                const KeyPair& key_b);

using StateHistory = std::vector<ChannelState>;

/// Heads for every prefix of the history; heads[i] belongs to history[i].
std::vector<Digest> replay_chain(const StateHistory& history);

enum class Verdict : std::uint8_t { Consistent, Tampered, Unresponsive };

std::string_view to_string(Verdict v);

struct HistoryCheck {
  Verdict verdict = Verdict::Unresponsive;
  std::string detail;
};

/// The claim with the highest sequence number (first in inclusion order on
/// ties), or nothing when no claim carries a head.
std::optional<ClosingClaim> max_head_claim(const std::vector<ClosingClaim>& claims);

/// Recreates the hash chain from `history` and compares it with the on-chain
/// head at the maximum claimed sequence number.
HistoryCheck verify_history(const StateHistory& history, const std::vector<ClosingClaim>& claims);

struct AuditReport {
  std::map<Role, HistoryCheck> parties;
  Seq closing_seq = 0;
  Digest head;
  /// Set when either party is tampered or unresponsive; stands in for the
  /// external punishment that follows a failed audit.
  bool punish = false;

  Verdict overall() const;
  std::optional<Role> culprit() const;
};

/// Auditor bookkeeping. The simulation drives it: the access request goes
/// on-chain, histories arrive as direct messages, and finish() is called once
/// the response deadline passes.
class Auditor {
 public:
  explicit Auditor(KeyPair keys) : keys_(std::move(keys)) {}

  const PublicKey& public_key() const { return keys_.public_key(); }

  void on_history(Role from, StateHistory history);
  bool has_history(Role r) const { return histories_.count(r) != 0; }
  AuditReport finish(const std::vector<ClosingClaim>& claims) const;

 private:
  KeyPair keys_;
  std::map<Role, StateHistory> histories_;
};

}  // namespace brick
