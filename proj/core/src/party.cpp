#include "brick/party.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "brick/brick_plus.hpp"

namespace brick {

namespace {

void append(Actions& into, Actions from) {
  for (auto& a : from) into.push_back(std::move(a));
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Result<PartyStrategy> PartyStrategy::parse(std::string_view tag) {
  std::string_view name = tag;
  std::optional<std::string_view> arg;
  if (auto colon = tag.find(':'); colon != std::string_view::npos) {
    name = tag.substr(0, colon);
    arg = tag.substr(colon + 1);
  }
  PartyStrategy s;
  std::optional<std::uint64_t> value;
  if (arg) {
    value = parse_u64(*arg);
    if (!value) return Error{Errc::ConfigInvalid, std::string(tag)};
  }
  if (name == "honest") {
    s.kind = PartyBehavior::Honest;
  } else if (name == "withhold-countersign") {
    s.kind = PartyBehavior::WithholdCountersign;
  } else if (name == "stale-close-briber") {
    s.kind = PartyBehavior::StaleCloseBriber;
    if (value) s.bribe = *value;
    return s;
  } else if (name == "crash-after-commit") {
    s.kind = PartyBehavior::CrashAfterCommit;
    if (value) s.crash_seq = *value;
    return s;
  } else if (name == "silent") {
    s.kind = PartyBehavior::Silent;
  } else if (name == "no-broadcast") {
    s.kind = PartyBehavior::NoBroadcast;
  } else if (name == "tamper-history") {
    s.kind = PartyBehavior::TamperHistory;
  } else {
    return Error{Errc::ConfigInvalid, fmt::format("unknown party strategy '{}'", tag)};
  }
  if (arg) return Error{Errc::ConfigInvalid, std::string(tag)};
  return s;
}

std::string PartyStrategy::tag() const {
  switch (kind) {
    case PartyBehavior::Honest: return "honest";
    case PartyBehavior::WithholdCountersign: return "withhold-countersign";
    case PartyBehavior::StaleCloseBriber: return fmt::format("stale-close-briber:{}", bribe);
    case PartyBehavior::CrashAfterCommit: return fmt::format("crash-after-commit:{}", crash_seq);
    case PartyBehavior::Silent: return "silent";
    case PartyBehavior::NoBroadcast: return "no-broadcast";
    case PartyBehavior::TamperHistory: return "tamper-history";
  }
  return "unknown";
}

Party::Party(KeyPair keys, PartyConfig config, PartyStrategy strategy, SignedState initial,
             std::uint64_t seed)
    : keys_(std::move(keys)), config_(std::move(config)), strategy_(strategy), rng_(seed) {
  Seq s = initial.state.seq;
  states_.emplace(s, std::move(initial));
  latest_valid_ = s;
  committed_ = s;
}

const SignedState* Party::state_at(Seq s) const {
  auto it = states_.find(s);
  return it == states_.end() ? nullptr : &it->second;
}

std::size_t Party::ack_count(Seq s) const {
  auto it = acks_.find(s);
  return it == acks_.end() ? 0 : it->second.size();
}

bool Party::workload_done() const { return committed_ >= final_workload_seq(); }

std::optional<Digest> Party::head_at(Seq s) const {
  if (s == 0) return genesis_head();
  auto* st = state_at(s);
  if (!st) return std::nullopt;
  return st->commitment.head;
}

Actions Party::start(SimTime now) {
  if (crashed_) return {};
  Actions out = next_step(now);
  append(out, arm_stall());
  return out;
}

Actions Party::arm_stall() {
  return {act::Timer{config_.stall_timeout, TimerKind::Stall, ++stall_generation_}};
}

Actions Party::next_step(SimTime now) {
  if (crashed_ || close_started_ || in_flight_ || committed_ < latest_valid_) return {};
  bool close_due = config_.close_at_seq ? committed_ >= config_.close_at_seq : workload_done();
  if (config_.closer && close_due) return begin_close(now);
  if (workload_done() || proposer_of(committed_ + 1) != role()) return {};
  const auto& cur = states_.at(committed_).state;
  std::int64_t delta = config_.workload.at(committed_ + 1 - 2);
  std::int64_t a = static_cast<std::int64_t>(cur.balance_a) + delta;
  a = std::clamp<std::int64_t>(a, 0, static_cast<std::int64_t>(config_.total));
  auto r = propose_update(now, static_cast<Coins>(a), config_.total - static_cast<Coins>(a));
  if (!r) {
    note(fmt::format("proposal failed: {}", r.error().message()));
    return {};
  }
  return std::move(r).value();
}

Result<Actions> Party::propose_update(SimTime /*now*/, Coins balance_a, Coins balance_b) {
  if (in_flight_ || latest_valid_ != committed_) return Errc::UpdateInFlight;
  ChannelState st;
  st.seq = latest_valid_ + 1;
  st.balance_a = balance_a;
  st.balance_b = balance_b;
  st.salt = draw_salt(rng_);
  auto c = config_.mode == Mode::BrickPlus
               ? propose_chained_commitment(config_.channel, st, config_.total, latest_valid_,
                                            *head_at(latest_valid_), keys_, role())
               : propose_commitment(config_.channel, st, config_.total, latest_valid_, keys_, role());
  if (!c) return c.error();
  states_[st.seq] = SignedState{st, *c, std::nullopt};
  in_flight_ = st.seq;
  Actions out;
  out.push_back(act::Send{Target::counterparty(), msg::Propose{*c, st}});
  append(out, arm_stall());
  return out;
}

Result<Actions> Party::countersign_update(SimTime /*now*/, const msg::Propose& p) {
  const auto& st = p.state;
  const auto& c = p.commitment;
  Seq seq = st.seq;
  Role proposer = other(role());
  if (seq != latest_valid_ + 1 || c.seq != seq || proposer_of(seq) != proposer ||
      c.channel != config_.channel) {
    return Error{Errc::BadCommitment, fmt::format("unexpected seq {}", seq)};
  }
  if (st.total() != config_.total) return Error{Errc::BadCommitment, "balances do not conserve"};
  if (commit_state(st) != c.commitment) return Error{Errc::BadCommitment, "commitment mismatch"};
  if (config_.mode == Mode::BrickPlus) {
    if (!c.head || *c.head != chain_head(*head_at(latest_valid_), c.commitment, seq)) {
      return Error{Errc::BadCommitment, "head does not extend the chain"};
    }
  } else if (c.head) {
    return Error{Errc::BadCommitment, "unexpected head"};
  }
  const auto& their = c.sig(proposer);
  if (!their || !verify_commitment_sig(c, config_.parties.of(proposer), *their)) {
    return Error{Errc::BadCommitment, "proposer signature"};
  }
  if (config_.policy && !config_.policy(states_.at(latest_valid_).state, st)) {
    return Errc::RejectedByPolicy;
  }
  StateCommitment full = c;
  Signature commit_sig = sign_commitment(full, keys_);
  full.sig(role()) = commit_sig;
  Signature ann_sig = config_.mode == Mode::BrickPlus
                          ? commit_sig
                          : sign_announcement(config_.channel, seq, std::nullopt, keys_);
  states_[seq] = SignedState{st, full, std::nullopt};
  own_ann_sig_[seq] = ann_sig;
  latest_valid_ = seq;
  in_flight_ = seq;
  Actions out;
  out.push_back(act::Send{Target::counterparty(), msg::Countersign{seq, commit_sig, ann_sig}});
  append(out, arm_stall());
  return out;
}

Actions Party::on_propose(SimTime now, const msg::Propose& p) {
  if (strategy_.kind == PartyBehavior::WithholdCountersign) {
    note(fmt::format("withholding countersignature for seq {}", p.state.seq));
    return {};
  }
  if (close_started_) return {};
  Seq seq = p.state.seq;
  if (seq == latest_valid_ + 1 && latest_valid_ > committed_) {
    // The previous update is valid here but not yet committed.
    deferred_ = p;
    return {};
  }
  if (in_flight_) {
    deferred_ = p;
    return {};
  }
  auto r = countersign_update(now, p);
  if (!r) {
    note(fmt::format("rejected proposal: {}", r.error().message()));
    return {};
  }
  return std::move(r).value();
}

Actions Party::on_countersign(SimTime now, const msg::Countersign& c) {
  auto it = states_.find(c.seq);
  if (!in_flight_ || *in_flight_ != c.seq || it == states_.end() || proposer_of(c.seq) != role() ||
      it->second.commitment.fully_signed()) {
    return {};
  }
  auto& ss = it->second;
  Role peer = other(role());
  const PublicKey& peer_pk = config_.parties.of(peer);
  if (!verify_commitment_sig(ss.commitment, peer_pk, c.commit_sig) ||
      !verify(peer_pk, announce_plaintext(config_.channel, c.seq, ss.commitment.head), c.ann_sig)) {
    note(fmt::format("bad countersignature for seq {}", c.seq));
    return {};
  }
  ss.commitment.sig(peer) = c.commit_sig;
  latest_valid_ = c.seq;
  Signature own = config_.mode == Mode::BrickPlus
                      ? *ss.commitment.sig(role())
                      : sign_announcement(config_.channel, c.seq, std::nullopt, keys_);
  Announcement ann;
  ann.channel = config_.channel;
  ann.seq = c.seq;
  ann.head = ss.commitment.head;
  (role() == Role::A ? ann.sig_a : ann.sig_b) = own;
  (role() == Role::A ? ann.sig_b : ann.sig_a) = c.ann_sig;
  ss.ann = ann;
  Actions out;
  out.push_back(act::Send{Target::counterparty(), msg::AnnSig{c.seq, own}});
  append(out, broadcast_update(now, c.seq));
  return out;
}

Actions Party::on_ann_sig(SimTime now, const msg::AnnSig& a) {
  auto it = states_.find(a.seq);
  if (it == states_.end() || it->second.ann || proposer_of(a.seq) == role() ||
      !it->second.commitment.fully_signed()) {
    return {};
  }
  auto& ss = it->second;
  Role peer = other(role());
  if (!verify(config_.parties.of(peer),
              announce_plaintext(config_.channel, a.seq, ss.commitment.head), a.ann_sig)) {
    note(fmt::format("bad announcement signature for seq {}", a.seq));
    return {};
  }
  Announcement ann;
  ann.channel = config_.channel;
  ann.seq = a.seq;
  ann.head = ss.commitment.head;
  (role() == Role::A ? ann.sig_a : ann.sig_b) = own_ann_sig_.at(a.seq);
  (role() == Role::A ? ann.sig_b : ann.sig_a) = a.ann_sig;
  ss.ann = ann;
  return broadcast_update(now, a.seq);
}

FeeTicket Party::pay_fee(std::uint32_t warden) {
  Coins& cum = fee_sent_[warden];
  cum += config_.update_fee;
  FeeTicket t;
  t.channel = config_.channel;
  t.payer = public_key();
  t.warden = config_.wardens.at(warden);
  t.cumulative = cum;
  t.sig = sign(keys_, t.plaintext());
  return t;
}

Actions Party::broadcast_update(SimTime now, Seq seq) {
  if (strategy_.kind == PartyBehavior::NoBroadcast) return {};
  const auto& ann = *states_.at(seq).ann;
  auto& st = stats_[seq];
  if (st.broadcast_at < 0) st.broadcast_at = now;
  act::Broadcast b;
  for (std::uint32_t w = 0; w < config_.wardens.size(); ++w) {
    if (dropped_.count(w)) continue;
    FeeTicket ticket = pay_fee(w);
    auto& q = outbox_[w];
    if (q.empty()) waiting_since_[w] = now;
    q.push_back(OutboxEntry{seq, ticket});
    b.msgs.emplace_back(w, msg::Announce{ann, ticket});
  }
  Actions out;
  out.push_back(std::move(b));
  if (!retransmit_armed_) {
    retransmit_armed_ = true;
    out.push_back(act::Timer{config_.retransmit_interval, TimerKind::Retransmit, 0});
  }
  return out;
}

Actions Party::on_ack(SimTime now, std::uint32_t w, const WardenAck& ack) {
  if (w >= config_.wardens.size() || ack.warden != config_.wardens[w] ||
      ack.channel != config_.channel) {
    return {};
  }
  auto* ss = state_at(ack.seq);
  if (!ss || ss->commitment.head != ack.head || !verify_ack(ack)) return {};
  auto [it, fresh] = archive_.try_emplace(ack.warden, ack);
  if (!fresh && ack.seq > it->second.seq) it->second = ack;

  auto& q = outbox_[w];
  while (!q.empty() && q.front().seq <= ack.seq) q.pop_front();
  if (q.empty()) {
    waiting_since_.erase(w);
  } else {
    waiting_since_[w] = now;
  }

  auto& set = acks_[ack.seq];
  if (!set.insert(ack.warden).second) return {};
  auto& st = stats_[ack.seq];
  if (set.size() == config_.t) st.quorum_at = now;
  if (set.size() == config_.wardens.size()) st.all_acked_at = now;
  if (set.size() >= config_.t && ack.seq > committed_) {
    committed_ = ack.seq;
    return after_commit(now, ack.seq);
  }
  return {};
}

Actions Party::after_commit(SimTime now, Seq seq) {
  if (in_flight_ && *in_flight_ <= seq) in_flight_.reset();
  if (strategy_.kind == PartyBehavior::CrashAfterCommit && seq >= strategy_.crash_seq) {
    crashed_ = true;
    return {act::Crash{}};
  }
  Actions out;
  if (deferred_ && deferred_->state.seq == committed_ + 1) {
    msg::Propose p = std::move(*deferred_);
    deferred_.reset();
    append(out, on_propose(now, p));
  }
  append(out, next_step(now));
  append(out, arm_stall());
  return out;
}

Actions Party::on_reject(std::uint32_t w, const msg::Reject& r) {
  if (r.code == Errc::IgnoredAfterClose) {
    outbox_[w].clear();
    waiting_since_.erase(w);
  }
  return {};
}

Actions Party::retransmit(SimTime now) {
  retransmit_armed_ = false;
  if (crashed_ || closed_seen_) return {};
  Actions out;
  bool pending = false;
  for (auto& [w, q] : outbox_) {
    if (q.empty() || dropped_.count(w)) continue;
    if (now - waiting_since_[w] > config_.warden_timeout && dropped_.size() < config_.f) {
      note(fmt::format("dropping unresponsive warden {}", w));
      dropped_.insert(w);
      q.clear();
      waiting_since_.erase(w);
      continue;
    }
    pending = true;
    for (const auto& e : q) {
      out.push_back(act::Send{Target::warden(w), msg::Announce{*states_.at(e.seq).ann, e.ticket}});
    }
  }
  if (pending) {
    retransmit_armed_ = true;
    out.push_back(act::Timer{config_.retransmit_interval, TimerKind::Retransmit, 0});
  }
  return out;
}

Actions Party::begin_close(SimTime now) {
  close_started_ = true;
  if (strategy_.kind == PartyBehavior::StaleCloseBriber) return stale_close(now);
  if (config_.close_mode == CloseMode::Optimistic && config_.mode == Mode::Brick) {
    return request_optimistic_close(now);
  }
  return request_pessimistic_close(now);
}

Actions Party::request_optimistic_close(SimTime /*now*/) {
  close_started_ = true;
  const auto& st = states_.at(committed_).state;
  opt_claim_ = {committed_, st.balance_a};
  Actions out;
  out.push_back(act::Submit{call::OptimisticRequest{st.balance_a}});
  out.push_back(act::Send{Target::counterparty(), msg::OptimisticClose{committed_, st.balance_a}});
  out.push_back(act::Timer{config_.optimistic_timeout, TimerKind::OptimisticTimeout, 0});
  return out;
}

Actions Party::on_optimistic_close(const msg::OptimisticClose& m) {
  if (strategy_.kind == PartyBehavior::Silent) return {};
  opt_offer_ = m;
  return {};
}

Actions Party::respond_optimistic_close(const BrickContract& contract) {
  if (strategy_.kind == PartyBehavior::Silent || agree_submitted_at_) return {};
  Coins claimed = contract.optimistic_claim();
  bool matches = false;
  for (Seq s : {committed_, latest_valid_}) {
    if (auto* ss = state_at(s); ss && ss->state.balance_a == claimed) matches = true;
  }
  if (opt_offer_ && opt_offer_->claimed_a != claimed) matches = false;
  if (!matches) {
    note(fmt::format("disputing optimistic claim of {}", claimed));
    return request_pessimistic_close(0);
  }
  close_started_ = true;
  return {act::Submit{call::OptimisticAgree{}}};
}

Actions Party::request_pessimistic_close(SimTime now) {
  close_started_ = true;
  if (close_requested_) return {};
  close_requested_ = true;
  close_requested_at_ = now;
  act::Broadcast b;
  for (std::uint32_t w = 0; w < config_.wardens.size(); ++w) b.msgs.emplace_back(w, msg::CloseRequest{});
  return {std::move(b)};
}

Actions Party::stale_close(SimTime now) {
  Seq target = committed_ > 1 ? committed_ - 1 : 1;
  Coins best = 0;
  for (const auto& [s, ss] : states_) {
    if (s >= committed_ || !ss.ann) continue;
    Coins mine = ss.state.balance(role());
    if (mine > best) {
      best = mine;
      target = s;
    }
  }
  stale_target_ = target;
  act::Broadcast b;
  const auto& ann = *states_.at(target).ann;
  for (std::uint32_t w = 0; w < config_.wardens.size(); ++w) {
    b.msgs.emplace_back(w, msg::BribeOffer{ann, strategy_.bribe});
  }
  Actions out;
  out.push_back(std::move(b));
  append(out, request_pessimistic_close(now));
  return out;
}

std::vector<ProofOfFraud> Party::assemble_proofs(const BrickContract& contract,
                                                 const Chain& /*chain*/) const {
  std::vector<ProofOfFraud> proofs;
  for (const auto& c : contract.claims()) {
    auto it = archive_.find(c.warden);
    if (it != archive_.end() && it->second.seq > c.seq) proofs.push_back(ProofOfFraud{it->second, c});
  }
  return proofs;
}

Result<Actions> Party::monitor_and_finalize(const BrickContract& contract, const Chain& chain) {
  if (contract.phase() != Phase::PessimisticPending) return Actions{};
  Height h = chain.height();
  if (finalize_submitted_at_ && h <= *finalize_submitted_at_ + config_.liveness_bound + 1) {
    return Actions{};
  }
  const auto& claims = contract.claims();
  // Wait for the claim set to settle so that no contradicted claim slips in
  // unproven.
  for (const auto& c : claims) {
    if (!chain.is_final(c.included_at)) return Actions{};
  }
  auto proofs = assemble_proofs(contract, chain);

  // Every contradicted claim is proven. Up to f proofs the close lands on the
  // highest remaining claim; beyond f the contract awards the channel to the
  // counterparty and this party keeps only the slashed collateral.
  call::PessimisticClose pc;
  if (proofs.size() >= config_.f + 1) {
    const auto& cur = states_.at(committed_);
    pc.state = cur.state;
    pc.sig_a = cur.commitment.sig_a.value_or(Signature{});
    pc.sig_b = cur.commitment.sig_b.value_or(Signature{});
  } else {
    std::set<PublicKey> excluded;
    for (const auto& p : proofs) excluded.insert(p.warden());
    std::optional<Seq> top;
    std::size_t usable = 0;
    for (const auto& c : claims) {
      if (excluded.count(c.warden)) continue;
      ++usable;
      if (!top || c.seq > *top) top = c.seq;
    }
    if (usable < config_.t || !top) return Actions{};
    const SignedState* ss = state_at(*top);
    if (!ss || !ss->commitment.fully_signed()) {
      return Error{Errc::MissingState, fmt::format("no both-signed state at seq {}", *top)};
    }
    pc.state = ss->state;
    pc.sig_a = *ss->commitment.sig_a;
    pc.sig_b = *ss->commitment.sig_b;
    if (config_.mode == Mode::BrickPlus) pc.prev_head = head_at(*top - 1);
  }
  pc.proofs = std::move(proofs);
  finalize_submitted_at_ = h;
  return Actions{act::Submit{std::move(pc)}};
}

Actions Party::on_history_request() {
  msg::History h;
  h.role = role();
  Seq last = known_closing_seq_ ? known_closing_seq_ : committed_;
  for (const auto& [s, ss] : states_) {
    if (s <= last) h.states.push_back(ss.state);
  }
  if (strategy_.kind == PartyBehavior::TamperHistory && !h.states.empty()) {
    auto& victim = h.states.size() > 1 ? h.states[1] : h.states[0];
    if (victim.balance_a > 0) {
      victim.balance_a -= 1;
      victim.balance_b += 1;
    } else {
      victim.salt.bytes[0] ^= 0x01;
    }
  }
  return {act::Send{Target::auditor(), std::move(h)}};
}

Actions Party::on_message(SimTime now, Target from, const Message& m) {
  if (crashed_) return {};
  if (from.kind == Target::Kind::Warden) {
    if (auto* a = std::get_if<msg::Ack>(&m)) return on_ack(now, from.index, a->ack);
    if (auto* r = std::get_if<msg::Reject>(&m)) return on_reject(from.index, *r);
    return {};
  }
  if (from.kind == Target::Kind::Auditor) {
    if (std::holds_alternative<msg::HistoryRequest>(m)) {
      if (strategy_.kind == PartyBehavior::Silent) return {};
      return on_history_request();
    }
    return {};
  }
  if (auto* p = std::get_if<msg::Propose>(&m)) return on_propose(now, *p);
  if (auto* c = std::get_if<msg::Countersign>(&m)) return on_countersign(now, *c);
  if (auto* a = std::get_if<msg::AnnSig>(&m)) return on_ann_sig(now, *a);
  if (auto* o = std::get_if<msg::OptimisticClose>(&m)) return on_optimistic_close(*o);
  return {};
}

Actions Party::on_timer(SimTime now, TimerKind kind, std::uint64_t generation) {
  if (crashed_) return {};
  switch (kind) {
    case TimerKind::Retransmit:
      return retransmit(now);
    case TimerKind::Stall:
      if (generation != stall_generation_ || close_started_ || workload_done()) return {};
      if (strategy_.kind == PartyBehavior::WithholdCountersign) return {};
      note(fmt::format("no progress after seq {}; closing", committed_));
      return request_pessimistic_close(now);
    case TimerKind::OptimisticTimeout:
      if (closed_seen_ || close_requested_) return {};
      note("optimistic close timed out; escalating");
      return request_pessimistic_close(now);
  }
  return {};
}

Actions Party::on_block(SimTime now, const BrickContract& contract, const Chain& chain) {
  if (crashed_) return {};
  Phase phase = contract.phase();
  if (phase == Phase::Closed) {
    closed_seen_ = true;
    if (auto cs = contract.closing_seq()) known_closing_seq_ = *cs;
    return {};
  }
  Actions out;
  Height h = chain.height();
  if (opt_claim_ && !close_requested_) {
    if (!opt_submitted_at_) {
      opt_submitted_at_ = h;
    } else if (phase == Phase::Open && h > *opt_submitted_at_ + config_.liveness_bound + 1) {
      opt_submitted_at_ = h;
      out.push_back(act::Submit{call::OptimisticRequest{opt_claim_->second}});
    }
  }
  if (phase == Phase::OptimisticPending && contract.optimistic_claimant() == other(role())) {
    auto at = contract.optimistic_requested_at();
    if (at && chain.is_final(*at)) {
      if (!agree_submitted_at_) {
        auto acts = respond_optimistic_close(contract);
        if (!acts.empty() && std::holds_alternative<act::Submit>(acts.front())) agree_submitted_at_ = h;
        append(out, std::move(acts));
      } else if (h > *agree_submitted_at_ + config_.liveness_bound + 1) {
        agree_submitted_at_ = h;
        out.push_back(act::Submit{call::OptimisticAgree{}});
      }
    }
  }
  if (phase == Phase::PessimisticPending) {
    if (!close_requested_) append(out, request_pessimistic_close(now));
    if (strategy_.kind != PartyBehavior::StaleCloseBriber) {
      auto r = monitor_and_finalize(contract, chain);
      if (r) {
        append(out, std::move(r).value());
      } else if (diagnostics_.empty() || diagnostics_.back() != r.error().message()) {
        note(r.error().message());
      }
    }
  }
  return out;
}

}  // namespace brick
