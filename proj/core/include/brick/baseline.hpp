#pragma once

// Dispute-window channel used as a point of comparison: a unilateral close
// stands unless a newer both-signed state lands on chain within t_d blocks.
// Only the close/dispute skeleton is modelled.

#include <map>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "brick/channel.hpp"
#include "brick/ledger.hpp"

namespace brick {

struct BaselineState {
  Seq seq = 1;
  Coins balance_a = 0;
  Coins balance_b = 0;
  Signature sig_a;
  Signature sig_b;

  bool operator==(const BaselineState&) const = default;
};

/// "BASELINE/state" || channel || seq || balance_a || balance_b
Bytes baseline_plaintext(const ChannelId& channel, Seq seq, Coins balance_a, Coins balance_b);
BaselineState sign_baseline_state(const ChannelId& channel, Seq seq, Coins balance_a,
                                  Coins balance_b, const KeyPair& a, const KeyPair& b);

struct BaselineParams {
  ChannelId channel;
  PartyKeys parties;
  Coins balance_a = 0;
  Coins balance_b = 0;
  /// Dispute window in blocks.
  Height dispute_window = 6;
};

enum class BaselinePhase : std::uint8_t { Open, Closing, Closed };
std::string_view to_string(BaselinePhase p);

namespace baseline_call {
struct Close { BaselineState state; };
struct Dispute { BaselineState state; };
}  // namespace baseline_call

using BaselineCall = std::variant<baseline_call::Close, baseline_call::Dispute>;
Bytes encode_baseline_call(const BaselineCall& c);
std::optional<BaselineCall> decode_baseline_call(ByteView data);
std::string_view baseline_call_kind(const BaselineCall& c);

class TimeoutChannel : public ContractExecutor {
 public:
  explicit TimeoutChannel(BaselineParams params);

  Receipt execute(const Transaction& tx, Height height) override;
  /// Settles at the closing state once the window has passed.
  void on_block(Height height) override;

  Status close_at(const PublicKey& sender, const BaselineState& state, Height height);
  /// LateDispute once the window has passed, NotNewer unless the state is
  /// fresher than the closing one.
  Status dispute(const PublicKey& sender, const BaselineState& state, Height height);

  const BaselineParams& params() const { return params_; }
  BaselinePhase phase() const { return phase_; }
  Coins v() const { return params_.balance_a + params_.balance_b; }
  std::optional<BaselineState> closing_state() const { return closing_; }
  std::optional<Height> closed_at() const { return close_height_; }
  std::optional<Height> settled_at() const { return settled_at_; }
  std::optional<Seq> settled_seq() const { return settled_seq_; }
  bool disputed() const { return disputed_; }
  const std::map<PublicKey, Coins>& payouts() const { return payouts_; }

  nlohmann::json to_json() const;

 private:
  bool valid(const BaselineState& s) const;
  void settle(const BaselineState& s, Height height);

  BaselineParams params_;
  BaselinePhase phase_ = BaselinePhase::Open;
  std::optional<BaselineState> closing_;
  std::optional<Height> close_height_;
  std::optional<Height> settled_at_;
  std::optional<Seq> settled_seq_;
  bool disputed_ = false;
  std::map<PublicKey, Coins> payouts_;
};

}  // namespace brick
