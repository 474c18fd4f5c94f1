#include "brick/world.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace brick {

namespace {

SimTime us(double ms) { return static_cast<SimTime>(std::llround(ms * 1000.0)); }

ChannelId channel_id(std::uint64_t run_seed) {
  Seed s = derive_seed(run_seed, "channel", 0);
  Digest d = hash(s.view());
  ChannelId id;
  id.bytes = d.bytes;
  return id;
}

std::string receipts_summary(const Block& b) {
  std::string out = fmt::format("height={}", b.height);
  for (std::size_t i = 0; i < b.txs.size(); ++i) {
    const auto& r = b.receipts[i];
    out += fmt::format(" {}:{}", b.txs[i].kind, r.ok() ? "ok" : r.error->message());
  }
  return out;
}

// State after the first `steps` workload payments.
ChannelState workload_state(const ScenarioConfig& cfg, std::size_t steps) {
  ChannelState s{1, cfg.balance_a, cfg.balance_b, {}};
  for (std::size_t i = 0; i < steps && i < cfg.workload.size(); ++i) {
    auto a = static_cast<std::int64_t>(s.balance_a) + cfg.workload[i];
    s.balance_a = static_cast<Coins>(a);
    s.balance_b = cfg.v() - s.balance_a;
    s.seq = i + 2;
  }
  return s;
}

}  // namespace

World::World(ScenarioConfig cfg)
    : cfg_(std::move(cfg)),
      trace_(cfg_.keep_trace),
      chain_(ChainParams{cfg_.confirm_depth, cfg_.liveness_bound}, derive_u64(cfg_.seed, "chain")) {}

Result<std::unique_ptr<World>> World::create(ScenarioConfig cfg) {
  if (auto s = cfg.validate(); !s) return s.error();
  if (cfg.mode == RunMode::Baseline) return Error{Errc::ConfigInvalid, "baseline runs have no world"};
  std::unique_ptr<World> w(new World(std::move(cfg)));
  if (auto s = w->setup(); !s) return s.error();
  return w;
}

Status World::setup() {
  const auto seed = cfg_.seed;
  key_a_ = keygen(derive_seed(seed, "party", 0));
  key_b_ = keygen(derive_seed(seed, "party", 1));
  for (std::uint64_t i = 0; i < cfg_.n; ++i) warden_keys_.push_back(keygen(derive_seed(seed, "warden", i)));
  if (cfg_.audit) auditor_key_ = keygen(derive_seed(seed, "auditor", 0));
  channel_ = channel_id(seed);
  const Mode mode = cfg_.mode == RunMode::BrickPlus ? Mode::BrickPlus : Mode::Brick;
  const PartyKeys parties{key_a_.public_key(), key_b_.public_key()};

  ContractParams cp;
  cp.channel = channel_;
  cp.parties = parties;
  for (const auto& k : warden_keys_) cp.warden_hashes.push_back(hash(k.public_key().view()));
  cp.t = cfg_.threshold();
  cp.closing_fee = cfg_.closing_fee;
  cp.mode = mode;
  if (auditor_key_ && cfg_.auditor_authorized) cp.auditors.push_back(auditor_key_->public_key());
  auto deployed = BrickContract::deploy(cp);
  if (!deployed) return deployed.error();
  contract_ = std::move(*deployed);
  chain_.register_contract(channel_, contract_.get());

  auto land = [&](std::vector<std::pair<PublicKey, ContractCall>> txs) -> Status {
    std::vector<TxId> ids;
    for (auto& [pk, c] : txs) ids.push_back(chain_.submit(pk, channel_, std::string(call_kind(c)), encode_call(c)));
    while (chain_.pending() > 0) trace_.record(0, "block", "chain", "", receipts_summary(chain_.advance_block()));
    for (TxId id : ids) {
      auto r = chain_.receipt(id);
      if (!r) return Error{Errc::ConfigInvalid, "setup transaction not included"};
      if (!r->ok()) return *r->error;
    }
    return {};
  };
  if (auto s = land({{key_a_.public_key(), call::FundParty{cfg_.balance_a}}}); !s) return s;
  if (auto s = land({{key_b_.public_key(), call::FundParty{cfg_.balance_b}}}); !s) return s;
  std::vector<std::pair<PublicKey, ContractCall>> funding;
  for (const auto& k : warden_keys_) funding.emplace_back(k.public_key(), call::FundWarden{contract_->collateral()});
  if (auto s = land(std::move(funding)); !s) return s;
  if (auto s = land({{key_a_.public_key(), call::Open{}}}); !s) return s;
  last_block_ = chain_.height();

  std::mt19937_64 salt_rng(derive_u64(seed, "salt"));
  ChannelState s1{1, cfg_.balance_a, cfg_.balance_b, draw_salt(salt_rng)};
  auto commitment = mode == Mode::BrickPlus
                        ? make_chained_commitment(channel_, s1, cfg_.v(), 0, genesis_head(), key_a_, key_b_)
                        : make_commitment(channel_, s1, cfg_.v(), 0, key_a_, key_b_);
  if (!commitment) return commitment.error();
  auto ann = make_announcement(*commitment, key_a_, key_b_);
  if (!ann) return ann.error();
  SignedState initial{s1, *commitment, *ann};

  NetPolicy np;
  np.rtt = us(cfg_.rtt_ms);
  np.jitter = us(cfg_.jitter_ms);
  np.stagger = static_cast<SimTime>(std::llround(cfg_.stagger_us));
  if (cfg_.adversary == Adversary::Reorder) np.reorder_max_hold = us(cfg_.reorder_ms);
  net_ = std::make_unique<Network<Message>>(sched_, trace_, np, derive_u64(seed, "net"),
                                            [](const Message& m) { return summarize(m); });

  std::vector<PublicKey> warden_pks;
  for (const auto& k : warden_keys_) warden_pks.push_back(k.public_key());
  for (Role r : {Role::A, Role::B}) {
    PartyConfig pc;
    pc.role = r;
    pc.channel = channel_;
    pc.parties = parties;
    pc.mode = mode;
    pc.wardens = warden_pks;
    pc.t = cfg_.threshold();
    pc.f = cfg_.f();
    pc.total = cfg_.v();
    pc.update_fee = cfg_.update_fee;
    pc.confirm_depth = cfg_.confirm_depth;
    pc.liveness_bound = cfg_.liveness_bound;
    pc.workload = cfg_.workload;
    pc.closer = cfg_.closer == (r == Role::A ? "a" : "b");
    pc.close_at_seq = cfg_.close_at_seq;
    pc.close_mode = cfg_.close_mode;
    pc.stall_timeout = us(cfg_.stall_ms);
    pc.optimistic_timeout = us(cfg_.optimistic_timeout_ms);
    auto strat = PartyStrategy::parse(r == Role::A ? cfg_.party_a : cfg_.party_b);
    if (!strat) return strat.error();
    const std::size_t idx = r == Role::A ? 0 : 1;
    parties_[idx] = std::make_unique<Party>(r == Role::A ? key_a_ : key_b_, pc, *strat, initial,
                                            derive_u64(seed, "party-rng", idx));
  }

  WardenConfig wc{channel_, parties, mode, cfg_.update_fee, contract_->collateral(), cfg_.epsilon};
  for (std::uint64_t i = 0; i < cfg_.n; ++i) {
    auto strat = WardenStrategy::parse(cfg_.warden_tag(i));
    if (!strat) return strat.error();
    wardens_.emplace_back(warden_keys_[i], wc, *strat, *ann);
  }
  acked_at_claim_.assign(cfg_.n, 0);
  if (auditor_key_) auditor_ = std::make_unique<Auditor>(*auditor_key_);

  party_node_[0] = net_->add_node("A", [this](auto from, const Message& m) { on_party_message(Role::A, from, m); });
  party_node_[1] = net_->add_node("B", [this](auto from, const Message& m) { on_party_message(Role::B, from, m); });
  for (std::uint64_t i = 0; i < cfg_.n; ++i) {
    warden_node_.push_back(net_->add_node(fmt::format("W{}", i), [this, i](auto from, const Message& m) {
      on_warden_message(i, from, m);
    }));
  }
  if (auditor_) {
    auditor_node_ = net_->add_node("auditor", [this](auto from, const Message& m) { on_auditor_message(from, m); });
  }
  install_adversary();
  return {};
}

void World::install_adversary() {
  switch (cfg_.adversary) {
    case Adversary::Honest:
    case Adversary::Reorder:
      break;
    case Adversary::TargetedDelay: {
      std::set<std::uint32_t> targets;
      if (cfg_.hold_wardens.empty()) {
        targets.insert(warden_node_.begin(), warden_node_.end());
      } else {
        for (auto i : cfg_.hold_wardens) {
          if (i < warden_node_.size()) targets.insert(warden_node_[i]);
        }
      }
      std::optional<Seq> from_seq;
      if (cfg_.hold_target.rfind("announce:", 0) == 0) from_seq = std::stoull(cfg_.hold_target.substr(9));
      net_->add_targeted_delay(
          [targets, from_seq](std::uint32_t, std::uint32_t to, const Message& m) {
            if (!targets.count(to)) return false;
            if (!from_seq) return std::holds_alternative<msg::CloseRequest>(m);
            auto* a = std::get_if<msg::Announce>(&m);
            return a && a->ann.seq >= *from_seq;
          },
          us(cfg_.hold_ms));
      break;
    }
    case Adversary::CensorLedger: {
      PublicKey victim = cfg_.censor_victim == "a" ? key_a_.public_key() : key_b_.public_key();
      Height hold = cfg_.censor_blocks;
      chain_.add_hold_policy([victim, hold](const Transaction& tx) { return tx.sender == victim ? hold : 0; });
      break;
    }
  }
}

void World::start() {
  if (started_) return;
  started_ = true;
  for (Role r : {Role::A, Role::B}) execute(r, party(r).start(sched_.now()));
  sched_.after(us(cfg_.block_ms), [this] { tick(); });
}

void World::run_until(SimTime limit) {
  start();
  sched_.run(limit, [this] { return settled(); });
}

RunReport World::run() {
  run_until(us(cfg_.limit_s * 1000.0));
  return report();
}

void World::execute(Role r, Actions actions) {
  const auto node = party_node_[r == Role::A ? 0 : 1];
  for (auto& a : actions) {
    std::visit(
        [&](auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, act::Send>) {
            std::uint32_t dst = 0;
            switch (x.to.kind) {
              case Target::Kind::Counterparty: dst = party_node_[r == Role::A ? 1 : 0]; break;
              case Target::Kind::Warden: dst = warden_node_.at(x.to.index); break;
              case Target::Kind::Auditor:
                if (!auditor_) return;
                dst = auditor_node_;
                break;
            }
            net_->send(node, dst, std::move(x.msg));
          } else if constexpr (std::is_same_v<T, act::Broadcast>) {
            std::vector<std::uint32_t> dsts;
            for (const auto& [w, m] : x.msgs) dsts.push_back(warden_node_.at(w));
            std::size_t k = 0;
            net_->broadcast(node, dsts, [&](std::uint32_t) { return x.msgs[k++].second; });
          } else if constexpr (std::is_same_v<T, act::Submit>) {
            const auto& pk = party(r).public_key();
            trace_.record(sched_.now(), "submit", net_->name(node), "chain", std::string(call_kind(x.call)));
            if (std::holds_alternative<call::OptimisticRequest>(x.call) && !close_started_at_) {
              close_started_at_ = sched_.now();
            }
            chain_.submit(pk, channel_, std::string(call_kind(x.call)), encode_call(x.call));
          } else if constexpr (std::is_same_v<T, act::Timer>) {
            auto kind = x.kind;
            auto gen = x.generation;
            sched_.after(x.delay, [this, r, kind, gen] {
              if (party(r).crashed()) return;
              execute(r, party(r).on_timer(sched_.now(), kind, gen));
            });
          } else if constexpr (std::is_same_v<T, act::Crash>) {
            trace_.record(sched_.now(), "crash", net_->name(node), "", "");
            net_->set_down(node, true);
          }
        },
        a);
  }
  if (auto at = party(r).close_requested_at(); at && (!close_started_at_ || *at < *close_started_at_)) {
    close_started_at_ = *at;
  }
}

void World::on_party_message(Role r, std::uint32_t from, const Message& m) {
  Party& p = party(r);
  if (p.crashed()) return;
  Target t;
  if (from == party_node_[0] || from == party_node_[1]) {
    t = Target::counterparty();
  } else if (auditor_ && from == auditor_node_) {
    t = Target::auditor();
  } else {
    auto it = std::find(warden_node_.begin(), warden_node_.end(), from);
    if (it == warden_node_.end()) return;
    t = Target::warden(static_cast<std::uint32_t>(it - warden_node_.begin()));
  }
  execute(r, p.on_message(sched_.now(), t, m));
}

void World::on_warden_message(std::size_t w, std::uint32_t from, const Message& m) {
  Warden& wd = wardens_[w];
  if (auto* a = std::get_if<msg::Announce>(&m)) {
    auto r = wd.on_announcement(a->ann, a->ticket);
    if (r) {
      net_->send(warden_node_[w], from, msg::Ack{*r});
      for (auto node : party_node_) {
        if (node != from) net_->send(warden_node_[w], node, msg::Ack{*r});
      }
    } else if (r.error().code != Errc::Unresponsive) {
      net_->send(warden_node_[w], from, msg::Reject{a->ann.seq, r.error().code});
    }
  } else if (std::holds_alternative<msg::CloseRequest>(m)) {
    submit_claim(w);
  } else if (auto* b = std::get_if<msg::BribeOffer>(&m)) {
    bool taken = wd.on_bribe(*b);
    trace_.record(sched_.now(), "bribe", net_->name(from), net_->name(warden_node_[w]),
                  fmt::format("seq={} amount={} taken={}", b->stale.seq, b->amount, taken));
  }
}

void World::on_auditor_message(std::uint32_t from, const Message& m) {
  if (!auditor_) return;
  if (auto* h = std::get_if<msg::History>(&m)) {
    if (from != party_node_[0] && from != party_node_[1]) return;
    auditor_->on_history(h->role, h->states);
  }
}

void World::submit_claim(std::size_t w) {
  Warden& wd = wardens_[w];
  auto r = wd.on_close_request();
  if (!r || !*r) return;
  Seq acked = 0;
  for (const auto& a : wd.emitted_acks()) acked = std::max(acked, a.seq);
  acked_at_claim_[w] = acked;
  trace_.record(sched_.now(), "claim", net_->name(warden_node_[w]), "chain", fmt::format("seq={}", (*r)->seq));
  ContractCall c = call::RecordClaim{**r};
  chain_.submit(wd.public_key(), channel_, std::string(call_kind(c)), encode_call(c));
}

void World::tick() {
  const auto now = sched_.now();
  const Block& b = chain_.advance_block();
  last_block_ = b.height;
  trace_.record(now, "block", "chain", "", receipts_summary(b));
  const Phase ph = contract_->phase();
  if ((ph == Phase::Closed || ph == Phase::Cancelled) && !closed_at_) closed_at_ = now;

  if (contract_->access_requests().size() > access_seen_) {
    access_seen_ = contract_->access_requests().size();
    if (!close_started_at_) close_started_at_ = now;
    for (std::size_t w = 0; w < wardens_.size(); ++w) submit_claim(w);
  }

  if (ph == Phase::Closed) {
    for (std::size_t w = 0; w < wardens_.size(); ++w) {
      const auto& pk = wardens_[w].public_key();
      if (redeem_submitted_.count(w) || !contract_->redeemable().count(pk) || !wardens_[w].responsive()) continue;
      redeem_submitted_.insert(w);
      chain_.submit(pk, channel_, std::string(call_kind(call::Redeem{})), encode_call(call::Redeem{}));
    }
  }

  for (Role r : {Role::A, Role::B}) {
    if (party(r).crashed()) continue;
    execute(r, party(r).on_block(now, *contract_, chain_));
  }

  if (auditor_) {
    auto idle = [&](Role r) { return party(r).crashed() || (party(r).workload_done() && !party(r).in_flight()); };
    if (!audit_requested_ && ph == Phase::Open && idle(Role::A) && idle(Role::B)) {
      audit_requested_ = true;
      trace_.record(now, "submit", "auditor", "chain", "audit");
      chain_.submit(auditor_->public_key(), channel_, std::string(call_kind(call::Audit{})), encode_call(call::Audit{}));
    }
    if (audit_requested_ && ph == Phase::Closed && !histories_requested_) {
      histories_requested_ = true;
      for (auto node : party_node_) net_->send(auditor_node_, node, msg::HistoryRequest{});
      sched_.after(from_ms(30000), [this] { finish_audit(); });
    }
  }

  if (!settled()) sched_.after(us(cfg_.block_ms), [this] { tick(); });
}

void World::finish_audit() {
  if (!auditor_ || audit_done_) return;
  audit_report_ = auditor_->finish(contract_->claims());
  audit_done_ = true;
  trace_.record(sched_.now(), "audit", "auditor", "", std::string(to_string(audit_report_->overall())));
}

bool World::settled() const {
  const Phase ph = contract_->phase();
  if (ph != Phase::Closed && ph != Phase::Cancelled) return false;
  if (chain_.pending() > 0) return false;
  for (const auto& w : wardens_) {
    if (contract_->redeemable().count(w.public_key()) && w.responsive()) return false;
  }
  if (audit_requested_ && !audit_done_) return false;
  return true;
}

Seq World::ack_quorum_seq() const {
  std::map<Seq, std::uint64_t> count;
  for (const auto& w : wardens_) {
    std::set<Seq> seqs;
    for (const auto& a : w.emitted_acks()) seqs.insert(a.seq);
    for (Seq s : seqs) ++count[s];
  }
  Seq best = 1;
  for (const auto& [s, c] : count) {
    if (c >= cfg_.threshold()) best = std::max(best, s);
  }
  return best;
}

std::vector<std::size_t> World::equivocators() const {
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < wardens_.size(); ++w) {
    const auto& pk = wardens_[w].public_key();
    for (const auto& c : contract_->claims()) {
      if (c.warden == pk) {
        if (acked_at_claim_[w] > c.seq) out.push_back(w);
        break;
      }
    }
  }
  return out;
}

std::string World::actor_name(const PublicKey& pk) const {
  if (pk == key_a_.public_key()) return "A";
  if (pk == key_b_.public_key()) return "B";
  for (std::size_t i = 0; i < warden_keys_.size(); ++i) {
    if (warden_keys_[i].public_key() == pk) return fmt::format("W{}", i);
  }
  if (auditor_key_ && auditor_key_->public_key() == pk) return "auditor";
  return pk.hex().substr(0, 12);
}

SafetyFacts World::safety_facts() const {
  SafetyFacts f;
  f.closed = contract_->phase() == Phase::Closed;
  f.kind = contract_->close_kind();
  f.closing_seq = contract_->closing_seq();
  f.ack_quorum_seq = ack_quorum_seq();

  auto find_state = [&](Seq s) -> const SignedState* {
    for (Role r : {Role::A, Role::B}) {
      if (auto* st = party(r).state_at(s); st && st->commitment.fully_signed()) return st;
    }
    return nullptr;
  };
  auto paid = [&](Role r) {
    auto it = contract_->payouts().find(r == Role::A ? key_a_.public_key() : key_b_.public_key());
    return it == contract_->payouts().end() ? Coins{0} : it->second;
  };

  if (f.kind == CloseKind::Optimistic) {
    for (Role r : {Role::A, Role::B}) {
      for (const auto& [s, st] : party(r).states()) {
        if (st.commitment.fully_signed() && st.state.balance_a == contract_->optimistic_claim()) {
          f.optimistic_split_signed = true;
        }
      }
    }
  }
  if (f.kind == CloseKind::Pessimistic && f.closing_seq) {
    const auto* st = find_state(*f.closing_seq);
    f.payouts_cover_state = st && paid(Role::A) >= st->state.balance_a && paid(Role::B) >= st->state.balance_b;
  }
  for (Role r : {Role::A, Role::B}) {
    if (party(r).strategy().byzantine()) continue;
    if (const auto* st = party(r).state_at(f.ack_quorum_seq)) {
      f.honest_payout_vs_due.emplace_back(paid(r), st->state.balance(r));
    }
  }
  return f;
}

RunReport World::report() const {
  RunReport rep;
  rep.config = config_to_json(cfg_);
  rep.scenario = cfg_.scenario;
  rep.seed = cfg_.seed;
  rep.mode = cfg_.mode;
  rep.final_phase = std::string(to_string(contract_->phase()));
  rep.close_kind = std::string(to_string(contract_->close_kind()));
  rep.ack_quorum_seq = ack_quorum_seq();
  rep.closing_seq = contract_->closing_seq();
  if (contract_->close_kind() == CloseKind::Optimistic) {
    if (auto claimant = contract_->optimistic_claimant()) {
      if (auto c = party(*claimant).optimistic_claim()) rep.closing_seq = c->first;
    }
  }
  rep.freshest_committed = std::max(rep.ack_quorum_seq, rep.closing_seq.value_or(0));
  rep.final_workload_seq = party(Role::A).final_workload_seq();
  rep.all_updates_committed = rep.ack_quorum_seq >= rep.final_workload_seq;
  for (const auto& [pk, amount] : contract_->payouts()) rep.payouts[actor_name(pk)] += amount;

  auto verdict = judge_safety(safety_facts());
  rep.safety_ok = verdict.ok;
  rep.safety_reason = verdict.reason;
  const Phase ph = contract_->phase();
  rep.liveness_ok = ph == Phase::Closed || ph == Phase::Cancelled;
  if (closed_at_ && close_started_at_) rep.liveness_ms = to_ms(*closed_at_ - *close_started_at_);
  rep.end_ms = to_ms(sched_.now());
  rep.blocks = chain_.height();

  for (const auto& pk : contract_->slashed()) rep.slashed.push_back(actor_name(pk));
  rep.proofs_used = rep.slashed.size();
  for (auto w : equivocators()) {
    rep.equivocators.push_back(fmt::format("W{}", w));
    if (!wardens_[w].strategy().deviant()) rep.violations.push_back(fmt::format("honest warden W{} equivocated", w));
  }

  std::vector<FeeFlow> flows;
  for (Role r : {Role::A, Role::B}) {
    const Party& p = party(r);
    for (std::size_t w = 0; w < wardens_.size(); ++w) {
      FeeFlow ff;
      ff.payer = p.public_key();
      ff.warden = wardens_[w].public_key();
      if (auto it = p.fees_paid().find(static_cast<std::uint32_t>(w)); it != p.fees_paid().end()) ff.issued = it->second;
      if (auto it = wardens_[w].fee_tickets().find(ff.payer); it != wardens_[w].fee_tickets().end()) {
        ff.received = it->second.cumulative;
      }
      if (auto it = wardens_[w].paid_updates().find(ff.payer); it != wardens_[w].paid_updates().end()) {
        ff.paid_updates = it->second;
      }
      flows.push_back(ff);
    }
  }
  rep.settlement = settlement_audit(*contract_, flows, cfg_.update_fee);
  for (const auto& m : rep.settlement->mismatches) rep.violations.push_back("settlement: " + m);

  for (const auto& [seq, st] : party(Role::A).update_stats()) {
    if (st.broadcast_at < 0 || st.quorum_at < 0) continue;
    rep.latencies.push_back({seq, to_ms(st.broadcast_at), to_ms(st.quorum_at), to_ms(st.quorum_at - st.broadcast_at)});
  }
  rep.event_counts = trace_.counts();
  rep.trace_digest = trace_.digest().hex();
  rep.trace_events = trace_.size();

  if (audit_report_) {
    nlohmann::json parties = nlohmann::json::object();
    for (const auto& [r, chk] : audit_report_->parties) {
      parties[std::string(to_string(r))] = {{"verdict", std::string(to_string(chk.verdict))}, {"detail", chk.detail}};
    }
    auto culprit = audit_report_->culprit();
    rep.audit = {{"verdict", std::string(to_string(audit_report_->overall()))},
                 {"closing_seq", audit_report_->closing_seq},
                 {"head", audit_report_->head.hex()},
                 {"punish", audit_report_->punish},
                 {"culprit", culprit ? nlohmann::json(std::string(to_string(*culprit))) : nlohmann::json(nullptr)},
                 {"parties", parties}};
  } else if (cfg_.audit) {
    rep.audit = {{"verdict", nullptr},
                 {"requested", audit_requested_},
                 {"access_requests", contract_->access_requests().size()}};
  }

  for (Role r : {Role::A, Role::B}) {
    const Party& p = party(r);
    if (p.strategy().kind != PartyBehavior::StaleCloseBriber) continue;
    Coins bribes = 0;
    std::uint64_t accepted = 0;
    for (const auto& w : wardens_) {
      bribes += w.bribes_taken();
      if (w.bribed()) ++accepted;
    }
    Coins payout = 0;
    if (auto it = contract_->payouts().find(p.public_key()); it != contract_->payouts().end()) payout = it->second;
    Coins due = 0;
    if (const auto* st = p.state_at(rep.ack_quorum_seq)) due = st->state.balance(r);
    GameParams gp{static_cast<std::int64_t>(cfg_.v()), static_cast<std::int64_t>(cfg_.f()),
                  static_cast<std::int64_t>(due), static_cast<std::int64_t>(cfg_.epsilon)};
    auto net_gain = static_cast<std::int64_t>(payout) - static_cast<std::int64_t>(bribes);
    auto honest_take = static_cast<std::int64_t>(due + fee_share(cfg_.closing_fee, r));
    rep.incentives = {{"briber", std::string(to_string(r))},
                      {"bribe_offer", p.strategy().bribe},
                      {"bribes_accepted", accepted},
                      {"bribes_paid", bribes},
                      {"payout", payout},
                      {"committed_balance", due},
                      {"net", net_gain},
                      {"profitable", net_gain > honest_take},
                      {"bound", payoff(gp, gp.f, 0)},
                      {"within_bound", net_gain <= payoff(gp, gp.f, 0)},
                      {"stale_target", p.stale_target() ? nlohmann::json(*p.stale_target()) : nlohmann::json(nullptr)}};
  }

  for (Role r : {Role::A, Role::B}) {
    for (const auto& d : party(r).diagnostics()) rep.diagnostics.push_back(fmt::format("{}: {}", to_string(r), d));
  }
  return rep;
}

Result<RunReport> run_scenario(const ScenarioConfig& cfg, std::ostream* trace_out) {
  if (auto s = cfg.validate(); !s) return s.error();
  if (cfg.mode == RunMode::Baseline) return run_baseline(cfg, trace_out);
  ScenarioConfig c = cfg;
  if (trace_out) c.keep_trace = true;
  auto world = World::create(std::move(c));
  if (!world) return world.error();
  RunReport rep = (*world)->run();
  if (trace_out) (*world)->trace().write_jsonl(*trace_out);
  return rep;
}

Result<RunReport> run_baseline(const ScenarioConfig& cfg, std::ostream* trace_out) {
  if (auto s = cfg.validate(); !s) return s.error();
  const auto seed = cfg.seed;
  KeyPair ka = keygen(derive_seed(seed, "party", 0));
  KeyPair kb = keygen(derive_seed(seed, "party", 1));
  const ChannelId ch = channel_id(seed);
  const PartyKeys parties{ka.public_key(), kb.public_key()};

  std::vector<BaselineState> states;
  for (std::size_t i = 0; i <= cfg.workload.size(); ++i) {
    ChannelState s = workload_state(cfg, i);
    states.push_back(sign_baseline_state(ch, s.seq, s.balance_a, s.balance_b, ka, kb));
  }
  const Seq freshest = states.back().seq;

  auto pa = PartyStrategy::parse(cfg.party_a);
  auto pb = PartyStrategy::parse(cfg.party_b);
  std::optional<Role> cheater;
  if (pa->byzantine()) cheater = Role::A;
  else if (pb->byzantine()) cheater = Role::B;
  const Role closer = cheater ? *cheater : (cfg.closer == "b" ? Role::B : Role::A);
  const Role victim = other(closer);

  BaselineState closing = states.back();
  if (cheater) {
    for (const auto& s : states) {
      if (s.seq >= freshest) break;
      Coins bal = closer == Role::A ? s.balance_a : s.balance_b;
      Coins best = closer == Role::A ? closing.balance_a : closing.balance_b;
      if (closing.seq == freshest || bal > best) closing = s;
    }
  }

  Scheduler sched;
  Trace trace(cfg.keep_trace || trace_out);
  Chain chain(ChainParams{cfg.confirm_depth, cfg.liveness_bound}, derive_u64(seed, "chain"));
  TimeoutChannel channel(BaselineParams{ch, parties, cfg.balance_a, cfg.balance_b, cfg.dispute_window});
  chain.register_contract(ch, &channel);
  const PublicKey victim_pk = parties.of(victim);
  if (cfg.adversary == Adversary::CensorLedger) {
    PublicKey censored = cfg.censor_victim == "a" ? parties.a : parties.b;
    Height hold = cfg.censor_blocks;
    chain.add_hold_policy([censored, hold](const Transaction& tx) { return tx.sender == censored ? hold : 0; });
  }

  auto submit = [&](const PublicKey& from, const BaselineCall& c) {
    trace.record(sched.now(), "submit", from == parties.a ? "A" : "B", "chain",
                 fmt::format("{} seq={}", baseline_call_kind(c),
                             std::visit([](const auto& x) { return x.state.seq; }, c)));
    return chain.submit(from, ch, std::string(baseline_call_kind(c)), encode_baseline_call(c));
  };
  submit(parties.of(closer), baseline_call::Close{closing});

  std::optional<TxId> dispute_tx;
  bool dispute_scheduled = false;
  std::optional<SimTime> settled_time;
  const SimTime reaction = cfg.adversary == Adversary::TargetedDelay ? us(cfg.hold_ms) : 0;
  std::function<void()> tick = [&] {
    const Block& b = chain.advance_block();
    trace.record(sched.now(), "block", "chain", "", receipts_summary(b));
    if (channel.phase() == BaselinePhase::Closing && !dispute_scheduled && channel.closing_state() &&
        channel.closing_state()->seq < freshest) {
      dispute_scheduled = true;
      sched.after(reaction, [&] { dispute_tx = submit(victim_pk, baseline_call::Dispute{states.back()}); });
    }
    if (channel.phase() == BaselinePhase::Closed && !settled_time) settled_time = sched.now();
    if (!(channel.phase() == BaselinePhase::Closed && chain.pending() == 0 && (!dispute_scheduled || dispute_tx))) {
      sched.after(us(cfg.block_ms), tick);
    }
  };
  sched.after(us(cfg.block_ms), tick);
  sched.run(us(cfg.limit_s * 1000.0));

  RunReport rep;
  rep.config = config_to_json(cfg);
  rep.scenario = cfg.scenario;
  rep.seed = seed;
  rep.mode = RunMode::Baseline;
  rep.final_phase = std::string(to_string(channel.phase()));
  rep.close_kind = channel.disputed() ? "disputed" : (channel.phase() == BaselinePhase::Closed ? "timeout" : "none");
  rep.closing_seq = channel.settled_seq();
  rep.ack_quorum_seq = freshest;
  rep.freshest_committed = freshest;
  rep.final_workload_seq = freshest;
  rep.all_updates_committed = true;
  for (const auto& [pk, amount] : channel.payouts()) rep.payouts[pk == parties.a ? "A" : "B"] += amount;
  rep.liveness_ok = channel.phase() == BaselinePhase::Closed;
  if (settled_time) rep.liveness_ms = to_ms(*settled_time);
  rep.end_ms = to_ms(sched.now());
  rep.blocks = chain.height();
  if (!channel.settled_seq()) {
    rep.safety_ok = true;
    rep.safety_reason = "channel still open";
  } else if (*channel.settled_seq() < freshest) {
    rep.safety_ok = false;
    rep.safety_reason = fmt::format("settled at {} below freshest {}", *channel.settled_seq(), freshest);
  } else {
    rep.safety_reason = fmt::format("settled at freshest seq {}", freshest);
  }
  if (channel.phase() == BaselinePhase::Closed) {
    Coins sum = 0;
    for (const auto& [pk, amount] : channel.payouts()) sum += amount;
    if (sum != channel.v()) rep.violations.push_back(fmt::format("payouts {} != channel value {}", sum, channel.v()));
  }
  const BaselineState& last = states.back();
  Coins due = victim == Role::A ? last.balance_a : last.balance_b;
  Coins got = 0;
  if (auto it = channel.payouts().find(victim_pk); it != channel.payouts().end()) got = it->second;
  nlohmann::json dispute = nullptr;
  if (dispute_tx) {
    auto r = chain.receipt(*dispute_tx);
    auto h = chain.inclusion_height(*dispute_tx);
    dispute = {{"included_at", h ? nlohmann::json(*h) : nlohmann::json(nullptr)},
               {"error", r && !r->ok() ? nlohmann::json(r->error->message()) : nlohmann::json(nullptr)}};
  }
  rep.baseline = {{"dispute_window", cfg.dispute_window},
                  {"closer", std::string(to_string(closer))},
                  {"close_seq", closing.seq},
                  {"close_height", channel.closed_at() ? nlohmann::json(*channel.closed_at()) : nlohmann::json(nullptr)},
                  {"settled_at", channel.settled_at() ? nlohmann::json(*channel.settled_at()) : nlohmann::json(nullptr)},
                  {"dispute", dispute},
                  {"victim", std::string(to_string(victim))},
                  {"victim_loss", due > got ? due - got : 0}};
  rep.event_counts = trace.counts();
  rep.trace_digest = trace.digest().hex();
  rep.trace_events = trace.size();
  if (trace_out) trace.write_jsonl(*trace_out);

  if (cfg.paired) {
    ScenarioConfig brick = cfg;
    brick.mode = RunMode::Brick;
    brick.scenario = cfg.scenario + "/paired";
    brick.close_mode = CloseMode::Pessimistic;
    brick.paired = false;
    if (brick.n <= 7 || brick.n % 3 != 1) brick.n = 10;
    auto paired = run_scenario(brick);
    if (!paired) return paired.error();
    rep.paired = paired->to_json();
    if (!paired->violations.empty()) rep.violations.push_back("paired brick run reported violations");
  }
  return rep;
}

}  // namespace brick
