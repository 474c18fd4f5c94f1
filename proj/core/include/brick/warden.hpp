#pragma once

// Warden state machine: acknowledges announcements that extend its stored
// sequence number by exactly one, and publishes its stored announcement as a
// closing claim when asked. Deviant strategies are selectable for tests.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brick/channel.hpp"
#include "brick/ledger.hpp"
#include "brick/messages.hpp"

namespace brick {

enum class WardenBehavior : std::uint8_t {
  Honest,
  Unresponsive,
  AckWithoutStore,
  SignAfterClose,
  BribedOldClaim,
  Crash,
};

struct WardenStrategy {
  WardenBehavior kind = WardenBehavior::Honest;
  /// BribedOldClaim: smallest accepted offer; 0 accepts anything.
  Coins bribe = 0;
  /// Crash: number of handled events before the warden goes silent.
  std::uint64_t crash_after = 0;

  /// Tags: honest, unresponsive, ack-without-store, sign-after-close,
  /// bribed-old-claim[:AMOUNT], crash[:EVENTS].
  static Result<WardenStrategy> parse(std::string_view tag);
  std::string tag() const;
  bool deviant() const { return kind != WardenBehavior::Honest; }
};

struct WardenConfig {
  ChannelId channel;
  PartyKeys parties;
  Mode mode = Mode::Brick;
  Coins update_fee = 1;
  Coins collateral = 0;
  Coins epsilon = 1;
};

class Warden {
 public:
  Warden(KeyPair keys, WardenConfig config, WardenStrategy strategy,
         std::optional<Announcement> initial);

  const PublicKey& public_key() const { return keys_.public_key(); }
  const WardenStrategy& strategy() const { return strategy_; }
  const WardenConfig& config() const { return config_; }

  /// Acknowledges `ann` if it extends the stored sequence number by one and
  /// the ticket pays the update fee. Re-delivery of the stored announcement is
  /// acknowledged again; a payer that has not yet paid for it pays then.
  Result<WardenAck> on_announcement(const Announcement& ann, const FeeTicket& ticket);

  /// Publishes the closing claim. A second request yields nothing.
  Result<std::optional<ClosingClaim>> on_close_request();

  /// Rational acceptance rule: offer >= collateral + epsilon.
  bool decide_bribe(Coins offer) const;
  /// Applies the strategy's bribe rule; true when the offer was taken.
  bool on_bribe(const msg::BribeOffer& offer);

  bool responsive() const;
  bool closed() const { return closed_; }
  const std::optional<Announcement>& stored() const { return stored_; }
  Seq stored_seq() const { return stored_ ? stored_->seq : 0; }
  Seq acked_seq() const { return acked_seq_; }
  const std::optional<ClosingClaim>& claim() const { return claim_; }

  /// Every acknowledgement signature this warden produced, in order.
  const std::vector<WardenAck>& emitted_acks() const { return emitted_; }
  /// Highest fee ticket held per payer.
  const std::map<PublicKey, FeeTicket>& fee_tickets() const { return tickets_; }
  Coins fee_income() const;
  /// Number of distinct sequence numbers each payer paid for.
  const std::map<PublicKey, std::uint64_t>& paid_updates() const { return paid_updates_; }
  Coins bribes_taken() const { return bribes_taken_; }
  /// Whether the warden holds a bribed announcement to claim with.
  bool bribed() const { return bribed_.has_value(); }

 private:
  Result<WardenAck> issue(const Announcement& ann, const FeeTicket& ticket, bool store);
  Status take_fee(const Announcement& ann, const FeeTicket& ticket);
  void count_event();

  KeyPair keys_;
  WardenConfig config_;
  WardenStrategy strategy_;
  std::optional<Announcement> stored_;
  std::optional<Announcement> last_acked_;
  Seq acked_seq_ = 0;
  bool closed_ = false;
  std::optional<ClosingClaim> claim_;
  std::optional<Announcement> bribed_;
  Coins bribes_taken_ = 0;
  std::uint64_t events_ = 0;
  std::vector<WardenAck> emitted_;
  std::map<PublicKey, FeeTicket> tickets_;
  std::map<PublicKey, Seq> paid_seq_;
  std::map<PublicKey, std::uint64_t> paid_updates_;
};

}  // namespace brick
