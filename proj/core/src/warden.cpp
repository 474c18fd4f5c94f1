#include "brick/warden.hpp"

#include <charconv>

#include <fmt/format.h>

namespace brick {

namespace {

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Result<WardenStrategy> WardenStrategy::parse(std::string_view tag) {
  std::string_view name = tag;
  std::optional<std::string_view> arg;
  if (auto colon = tag.find(':'); colon != std::string_view::npos) {
    name = tag.substr(0, colon);
    arg = tag.substr(colon + 1);
  }
  WardenStrategy s;
  if (name == "honest") {
    s.kind = WardenBehavior::Honest;
  } else if (name == "unresponsive") {
    s.kind = WardenBehavior::Unresponsive;
  } else if (name == "ack-without-store") {
    s.kind = WardenBehavior::AckWithoutStore;
  } else if (name == "sign-after-close") {
    s.kind = WardenBehavior::SignAfterClose;
  } else if (name == "bribed-old-claim") {
    s.kind = WardenBehavior::BribedOldClaim;
    if (arg) {
      auto v = parse_u64(*arg);
      if (!v) return Error{Errc::ConfigInvalid, std::string(tag)};
      s.bribe = *v;
    }
    return s;
  } else if (name == "crash") {
    s.kind = WardenBehavior::Crash;
    if (arg) {
      auto v = parse_u64(*arg);
      if (!v) return Error{Errc::ConfigInvalid, std::string(tag)};
      s.crash_after = *v;
    }
    return s;
  } else {
    return Error{Errc::ConfigInvalid, fmt::format("unknown warden strategy '{}'", tag)};
  }
  if (arg) return Error{Errc::ConfigInvalid, std::string(tag)};
  return s;
}

std::string WardenStrategy::tag() const {
  switch (kind) {
    case WardenBehavior::Honest: return "honest";
    case WardenBehavior::Unresponsive: return "unresponsive";
    case WardenBehavior::AckWithoutStore: return "ack-without-store";
    case WardenBehavior::SignAfterClose: return "sign-after-close";
    case WardenBehavior::BribedOldClaim: return fmt::format("bribed-old-claim:{}", bribe);
    case WardenBehavior::Crash: return fmt::format("crash:{}", crash_after);
  }
  return "unknown";
}

Warden::Warden(KeyPair keys, WardenConfig config, WardenStrategy strategy,
               std::optional<Announcement> initial)
    : keys_(std::move(keys)), config_(std::move(config)), strategy_(strategy),
      stored_(std::move(initial)) {
  last_acked_ = stored_;
  acked_seq_ = stored_seq();
}

bool Warden::responsive() const {
  switch (strategy_.kind) {
    case WardenBehavior::Unresponsive: return false;
    case WardenBehavior::Crash: return events_ < strategy_.crash_after;
    default: return true;
  }
}

void Warden::count_event() { ++events_; }

Coins Warden::fee_income() const {
  Coins sum = 0;
  for (const auto& [payer, t] : tickets_) sum += t.cumulative;
  return sum;
}

Status Warden::take_fee(const Announcement& ann, const FeeTicket& ticket) {
  auto& paid = paid_seq_[ticket.payer];
  if (paid >= ann.seq) return {};
  if (ticket.warden != public_key() || ticket.channel != config_.channel ||
      (ticket.payer != config_.parties.a && ticket.payer != config_.parties.b) ||
      !verify_fee_ticket(ticket)) {
    return Error{Errc::InsufficientFee, "invalid ticket"};
  }
  Coins held = 0;
  if (auto it = tickets_.find(ticket.payer); it != tickets_.end()) held = it->second.cumulative;
  if (ticket.cumulative < held + config_.update_fee) {
    return Error{Errc::InsufficientFee, fmt::format("{} < {}", ticket.cumulative, held + config_.update_fee)};
  }
  tickets_[ticket.payer] = ticket;
  paid = ann.seq;
  ++paid_updates_[ticket.payer];
  return {};
}

Result<WardenAck> Warden::issue(const Announcement& ann, const FeeTicket& ticket, bool store) {
  if (auto s = take_fee(ann, ticket); !s) return s.error();
  if (store) stored_ = ann;
  last_acked_ = ann;
  acked_seq_ = ann.seq;
  WardenAck ack = make_ack(ann, keys_);
  emitted_.push_back(ack);
  return ack;
}

Result<WardenAck> Warden::on_announcement(const Announcement& ann, const FeeTicket& ticket) {
  if (!responsive()) return Errc::Unresponsive;
  count_event();
  bool keeps_signing = strategy_.kind == WardenBehavior::SignAfterClose;
  if (closed_ && !keeps_signing) return Errc::IgnoredAfterClose;
  if (ann.channel != config_.channel || ann.head.has_value() != (config_.mode == Mode::BrickPlus)) {
    return Errc::BadSignatures;
  }
  bool store = strategy_.kind != WardenBehavior::AckWithoutStore;
  // An AckWithoutStore warden tracks what it acknowledged, not what it stored.
  const auto& reference = store ? stored_ : last_acked_;
  if (reference && ann == *reference) return issue(ann, ticket, store);
  Seq expected = (reference ? reference->seq : 0) + 1;
  if (ann.seq != expected) {
    return Error{Errc::StaleOrGapSeq, fmt::format("got {}, expected {}", ann.seq, expected)};
  }
  if (!validate_announcement(ann, expected, config_.parties)) return Errc::BadSignatures;
  return issue(ann, ticket, store);
}

Result<std::optional<ClosingClaim>> Warden::on_close_request() {
  if (!responsive()) return Errc::Unresponsive;
  count_event();
  if (claim_) return std::optional<ClosingClaim>{};
  if (!stored_) return Errc::NothingStored;
  closed_ = true;
  const Announcement& src = (bribed_ && bribed_->seq < stored_->seq) ? *bribed_ : *stored_;
  ClosingClaim c;
  c.warden = public_key();
  c.seq = src.seq;
  c.head = src.head;
  c.warden_sig = sign(keys_, close_plaintext(config_.channel, src.seq, src.head));
  c.sig_a = src.sig_a;
  c.sig_b = src.sig_b;
  claim_ = c;
  return std::optional<ClosingClaim>{c};
}

bool Warden::decide_bribe(Coins offer) const {
  if (strategy_.kind == WardenBehavior::BribedOldClaim) return offer >= strategy_.bribe;
  return offer >= config_.collateral + config_.epsilon;
}

bool Warden::on_bribe(const msg::BribeOffer& offer) {
  if (!responsive()) return false;
  count_event();
  if (closed_ || bribed_) return false;
  bool willing = strategy_.kind == WardenBehavior::BribedOldClaim ||
                 strategy_.kind == WardenBehavior::Honest;
  if (!willing || !decide_bribe(offer.amount)) return false;
  if (offer.stale.channel != config_.channel || !verify_announcement(offer.stale, config_.parties)) {
    return false;
  }
  bribed_ = offer.stale;
  bribes_taken_ += offer.amount;
  return true;
}

}  // namespace brick
