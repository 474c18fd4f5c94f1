#include "brick/baseline.hpp"

#include <fmt/format.h>

namespace brick {

namespace {

constexpr std::string_view kCloseTag = "BRICK/tx/baseline-close/";
constexpr std::string_view kDisputeTag = "BRICK/tx/baseline-dispute/";

void write_state(ByteWriter& w, const BaselineState& s) {
  w.u64(s.seq).u64(s.balance_a).u64(s.balance_b).blob(s.sig_a).blob(s.sig_b);
}

BaselineState read_state(ByteReader& r) {
  BaselineState s;
  s.seq = r.u64();
  s.balance_a = r.u64();
  s.balance_b = r.u64();
  s.sig_a = r.blob<SignatureTag, 64>();
  s.sig_b = r.blob<SignatureTag, 64>();
  return s;
}

}  // namespace

Bytes baseline_plaintext(const ChannelId& channel, Seq seq, Coins balance_a, Coins balance_b) {
  ByteWriter w;
  w.tag("BASELINE/state").blob(channel).u64(seq).u64(balance_a).u64(balance_b);
  return std::move(w).bytes();
}

BaselineState sign_baseline_state(const ChannelId& channel, Seq seq, Coins balance_a,
                                  Coins balance_b, const KeyPair& a, const KeyPair& b) {
  Bytes pt = baseline_plaintext(channel, seq, balance_a, balance_b);
  return BaselineState{seq, balance_a, balance_b, sign(a, pt), sign(b, pt)};
}

std::string_view to_string(BaselinePhase p) {
  switch (p) {
    case BaselinePhase::Open: return "Open";
    case BaselinePhase::Closing: return "Closing";
    case BaselinePhase::Closed: return "Closed";
  }
  return "?";
}

Bytes encode_baseline_call(const BaselineCall& c) {
  ByteWriter w;
  if (auto* close = std::get_if<baseline_call::Close>(&c)) {
    w.tag(kCloseTag);
    write_state(w, close->state);
  } else {
    w.tag(kDisputeTag);
    write_state(w, std::get<baseline_call::Dispute>(c).state);
  }
  return std::move(w).bytes();
}

std::optional<BaselineCall> decode_baseline_call(ByteView data) {
  ByteReader r(data);
  BaselineCall out;
  if (r.peek_tag(kCloseTag)) {
    r.expect_tag(kCloseTag);
    out = baseline_call::Close{read_state(r)};
  } else if (r.peek_tag(kDisputeTag)) {
    r.expect_tag(kDisputeTag);
    out = baseline_call::Dispute{read_state(r)};
  } else {
    return std::nullopt;
  }
  if (!r.finish()) return std::nullopt;
  return out;
}

std::string_view baseline_call_kind(const BaselineCall& c) {
  return std::holds_alternative<baseline_call::Close>(c) ? "baseline-close" : "baseline-dispute";
}

TimeoutChannel::TimeoutChannel(BaselineParams params) : params_(std::move(params)) {}

bool TimeoutChannel::valid(const BaselineState& s) const {
  if (s.balance_a + s.balance_b != v()) return false;
  Bytes pt = baseline_plaintext(params_.channel, s.seq, s.balance_a, s.balance_b);
  return verify(params_.parties.a, pt, s.sig_a) && verify(params_.parties.b, pt, s.sig_b);
}

void TimeoutChannel::settle(const BaselineState& s, Height height) {
  payouts_[params_.parties.a] += s.balance_a;
  payouts_[params_.parties.b] += s.balance_b;
  phase_ = BaselinePhase::Closed;
  settled_at_ = height;
  settled_seq_ = s.seq;
}

Status TimeoutChannel::close_at(const PublicKey& sender, const BaselineState& state, Height height) {
  if (sender != params_.parties.a && sender != params_.parties.b) return Errc::WrongCaller;
  if (phase_ != BaselinePhase::Open) return Errc::WrongPhase;
  if (!valid(state)) return Errc::BadSignature;
  closing_ = state;
  close_height_ = height;
  phase_ = BaselinePhase::Closing;
  return {};
}

Status TimeoutChannel::dispute(const PublicKey& sender, const BaselineState& state, Height height) {
  if (sender != params_.parties.a && sender != params_.parties.b) return Errc::WrongCaller;
  if (phase_ == BaselinePhase::Closed && close_height_ && height > *close_height_ + params_.dispute_window) {
    return Error{Errc::LateDispute, fmt::format("window closed at height {}",
                                                *close_height_ + params_.dispute_window)};
  }
  if (phase_ != BaselinePhase::Closing) return Errc::WrongPhase;
  if (height > *close_height_ + params_.dispute_window) return Errc::LateDispute;
  if (!valid(state)) return Errc::BadSignature;
  if (state.seq <= closing_->seq) return Errc::NotNewer;
  disputed_ = true;
  settle(state, height);
  return {};
}

Receipt TimeoutChannel::execute(const Transaction& tx, Height height) {
  Receipt rc;
  rc.tx = tx.id;
  rc.height = height;
  auto call = decode_baseline_call(tx.payload);
  if (!call) {
    rc.error = Error{Errc::MalformedTransaction};
    return rc;
  }
  Status s = std::holds_alternative<baseline_call::Close>(*call)
                 ? close_at(tx.sender, std::get<baseline_call::Close>(*call).state, height)
                 : dispute(tx.sender, std::get<baseline_call::Dispute>(*call).state, height);
  if (!s) rc.error = s.error();
  return rc;
}

void TimeoutChannel::on_block(Height height) {
  if (phase_ == BaselinePhase::Closing && height > *close_height_ + params_.dispute_window) {
    settle(*closing_, height);
  }
}

nlohmann::json TimeoutChannel::to_json() const {
  nlohmann::json j;
  j["phase"] = to_string(phase_);
  j["dispute_window"] = params_.dispute_window;
  j["closing_seq"] = closing_ ? nlohmann::json(closing_->seq) : nlohmann::json(nullptr);
  j["close_height"] = close_height_ ? nlohmann::json(*close_height_) : nlohmann::json(nullptr);
  j["settled_seq"] = settled_seq_ ? nlohmann::json(*settled_seq_) : nlohmann::json(nullptr);
  j["settled_at"] = settled_at_ ? nlohmann::json(*settled_at_) : nlohmann::json(nullptr);
  j["disputed"] = disputed_;
  return j;
}

}  // namespace brick
