#include <algorithm>

#include <fmt/format.h>

#include "brick/brick_plus.hpp"
#include "brick/ledger.hpp"

namespace brick {

namespace {

constexpr std::string_view kTxTag = "BRICK/tx/";

void write_head(ByteWriter& w, const std::optional<Digest>& head) {
  w.u8(head ? 1 : 0);
  if (head) w.blob(*head);
}

std::optional<Digest> read_head(ByteReader& r) {
  auto flag = r.u8();
  if (flag == 0) return std::nullopt;
  if (flag != 1) {
    r.fail();
    return std::nullopt;
  }
  return r.blob<DigestTag, 32>();
}

void write_claim(ByteWriter& w, const ClosingClaim& c) {
  w.blob(c.warden).u64(c.seq);
  write_head(w, c.head);
  w.blob(c.warden_sig).blob(c.sig_a).blob(c.sig_b);
}

ClosingClaim read_claim(ByteReader& r) {
  ClosingClaim c;
  c.warden = r.blob<PublicKeyTag, 32>();
  c.seq = r.u64();
  c.head = read_head(r);
  c.warden_sig = r.blob<SignatureTag, 64>();
  c.sig_a = r.blob<SignatureTag, 64>();
  c.sig_b = r.blob<SignatureTag, 64>();
  return c;
}

void write_ack(ByteWriter& w, const WardenAck& a) {
  w.blob(a.channel).u64(a.seq);
  write_head(w, a.head);
  w.blob(a.warden).blob(a.sig);
}

WardenAck read_ack(ByteReader& r) {
  WardenAck a;
  a.channel = r.blob<ChannelIdTag, 32>();
  a.seq = r.u64();
  a.head = read_head(r);
  a.warden = r.blob<PublicKeyTag, 32>();
  a.sig = r.blob<SignatureTag, 64>();
  return a;
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Deployed: return "Deployed";
    case Phase::PartyAFunded: return "PartyAFunded";
    case Phase::BothPartiesFunded: return "BothPartiesFunded";
    case Phase::Open: return "Open";
    case Phase::OptimisticPending: return "OptimisticPending";
    case Phase::PessimisticPending: return "PessimisticPending";
    case Phase::Closed: return "Closed";
    case Phase::Cancelled: return "Cancelled";
  }
  return "Unknown";
}

std::string_view to_string(CloseKind k) {
  switch (k) {
    case CloseKind::None: return "none";
    case CloseKind::Optimistic: return "optimistic";
    case CloseKind::Pessimistic: return "pessimistic";
    case CloseKind::FraudMajority: return "fraud-majority";
  }
  return "unknown";
}

std::string_view call_kind(const ContractCall& c) {
  return std::visit(
      Overloaded{
          [](const call::FundParty&) { return std::string_view("fund-party"); },
          [](const call::FundWarden&) { return std::string_view("fund-warden"); },
          [](const call::Withdraw&) { return std::string_view("withdraw"); },
          [](const call::Open&) { return std::string_view("open"); },
          [](const call::OptimisticRequest&) { return std::string_view("optimistic-request"); },
          [](const call::OptimisticAgree&) { return std::string_view("optimistic-agree"); },
          [](const call::RecordClaim&) { return std::string_view("claim"); },
          [](const call::PessimisticClose&) { return std::string_view("pessimistic-close"); },
          [](const call::Redeem&) { return std::string_view("redeem"); },
          [](const call::Audit&) { return std::string_view("audit"); },
      },
      c);
}

Bytes encode_call(const ContractCall& c) {
  ByteWriter w;
  w.tag(kTxTag).tag(call_kind(c)).tag("/");
  std::visit(Overloaded{
                 [&](const call::FundParty& x) { w.u64(x.amount); },
                 [&](const call::FundWarden& x) { w.u64(x.amount); },
                 [&](const call::Withdraw&) {},
                 [&](const call::Open&) {},
                 [&](const call::OptimisticRequest& x) { w.u64(x.claimed_a); },
                 [&](const call::OptimisticAgree&) {},
                 [&](const call::RecordClaim& x) { write_claim(w, x.claim); },
                 [&](const call::PessimisticClose& x) {
                   w.var(encode_state(x.state)).blob(x.sig_a).blob(x.sig_b);
                   write_head(w, x.prev_head);
                   w.u64(x.proofs.size());
                   for (const auto& p : x.proofs) {
                     write_ack(w, p.ack);
                     write_claim(w, p.claim);
                   }
                 },
                 [&](const call::Redeem&) {},
                 [&](const call::Audit&) {},
             },
             c);
  return std::move(w).bytes();
}

std::optional<ContractCall> decode_call(ByteView data) {
  static const std::vector<ContractCall> kPrototypes = {
      call::FundParty{},         call::FundWarden{},      call::Withdraw{},
      call::Open{},              call::OptimisticRequest{}, call::OptimisticAgree{},
      call::RecordClaim{},       call::PessimisticClose{}, call::Redeem{},
      call::Audit{},
  };
  for (const auto& proto : kPrototypes) {
    ByteReader r(data);
    if (!r.expect_tag(kTxTag) || !r.expect_tag(call_kind(proto)) || !r.expect_tag("/")) continue;
    ContractCall out = proto;
    std::visit(Overloaded{
                   [&](call::FundParty& x) { x.amount = r.u64(); },
                   [&](call::FundWarden& x) { x.amount = r.u64(); },
                   [&](call::Withdraw&) {},
                   [&](call::Open&) {},
                   [&](call::OptimisticRequest& x) { x.claimed_a = r.u64(); },
                   [&](call::OptimisticAgree&) {},
                   [&](call::RecordClaim& x) { x.claim = read_claim(r); },
                   [&](call::PessimisticClose& x) {
                     auto st = decode_state(r.var());
                     if (st) {
                       x.state = *st;
                     } else {
                       r.fail();
                     }
                     x.sig_a = r.blob<SignatureTag, 64>();
                     x.sig_b = r.blob<SignatureTag, 64>();
                     x.prev_head = read_head(r);
                     auto count = r.u64();
                     for (std::uint64_t i = 0; i < count && r.ok(); ++i) {
                       ProofOfFraud p;
                       p.ack = read_ack(r);
                       p.claim = read_claim(r);
                       x.proofs.push_back(std::move(p));
                     }
                   },
                   [&](call::Redeem&) {},
                   [&](call::Audit&) {},
               },
               out);
    if (r.finish()) return out;
    return std::nullopt;
  }
  return std::nullopt;
}

Coins fee_share(Coins closing_fee, Role r) {
  return r == Role::A ? (closing_fee + 1) / 2 : closing_fee / 2;
}

Coins collateral_for(Coins v, std::uint64_t f) { return f == 0 ? v : (v + f - 1) / f; }

BrickContract::BrickContract(ContractParams params) : params_(std::move(params)) {}

Result<std::unique_ptr<BrickContract>> BrickContract::deploy(ContractParams params) {
  std::uint64_t n = params.warden_hashes.size();
  if (n < 4 || (n - 1) % 3 != 0 || n <= 7) {
    return Error{Errc::BadCommitteeSize, fmt::format("n={}", n)};
  }
  std::uint64_t f = (n - 1) / 3;
  if (params.t != 2 * f + 1) return Error{Errc::BadThreshold, fmt::format("t={}", params.t)};
  return std::unique_ptr<BrickContract>(new BrickContract(std::move(params)));
}

std::optional<Role> BrickContract::role_of(const PublicKey& pk) const {
  if (pk == params_.parties.a) return Role::A;
  if (pk == params_.parties.b) return Role::B;
  return std::nullopt;
}

bool BrickContract::is_warden(const PublicKey& pk) const {
  Digest h = hash(pk.view());
  return std::find(params_.warden_hashes.begin(), params_.warden_hashes.end(), h) !=
         params_.warden_hashes.end();
}

void BrickContract::pay(const PublicKey& to, Coins amount) { payouts_[to] += amount; }

Receipt BrickContract::execute(const Transaction& tx, Height height) {
  Receipt receipt;
  receipt.tx = tx.id;
  receipt.height = height;
  auto decoded = decode_call(tx.payload);
  if (!decoded || call_kind(*decoded) != tx.kind) {
    receipt.error = Error{Errc::MalformedTransaction, tx.kind};
    return receipt;
  }
  auto fail = [&](const Error& e) { receipt.error = e; };
  std::visit(Overloaded{
                 [&](const call::FundParty& x) {
                   if (auto s = fund_party(tx.sender, x.amount); !s) fail(s.error());
                 },
                 [&](const call::FundWarden& x) {
                   if (auto s = fund_warden(tx.sender, x.amount); !s) fail(s.error());
                 },
                 [&](const call::Withdraw&) {
                   if (auto s = withdraw(tx.sender); !s) fail(s.error());
                 },
                 [&](const call::Open&) {
                   if (auto s = open(tx.sender); !s) fail(s.error());
                 },
                 [&](const call::OptimisticRequest& x) {
                   if (auto s = optimistic_close_request(tx.sender, x.claimed_a); !s) {
                     fail(s.error());
                   } else {
                     opt_requested_at_ = height;
                   }
                 },
                 [&](const call::OptimisticAgree&) {
                   if (auto s = optimistic_close_agree(tx.sender); !s) fail(s.error());
                 },
                 [&](const call::RecordClaim& x) {
                   if (auto s = record_closing_claim(tx.sender, x.claim, height); !s) fail(s.error());
                 },
                 [&](const call::PessimisticClose& x) {
                   auto s = pessimistic_close(tx.sender, x);
                   if (!s) {
                     fail(s.error());
                   } else {
                     receipt.notes = s->ignored_proofs;
                     closed_at_ = height;
                   }
                 },
                 [&](const call::Redeem&) {
                   if (auto s = redeem_warden(tx.sender); !s) fail(s.error());
                 },
                 [&](const call::Audit&) {
                   if (auto s = audit_request(tx.sender, height); !s) fail(s.error());
                 },
             },
             *decoded);
  if (phase_ == Phase::Closed && !closed_at_) closed_at_ = height;
  return receipt;
}

Status BrickContract::fund_party(const PublicKey& sender, Coins amount) {
  auto role = role_of(sender);
  if (!role) return Errc::UnknownActor;
  if (*role == Role::A) {
    if (phase_ == Phase::Cancelled) return Errc::WrongPhase;
    if (phase_ != Phase::Deployed) return Errc::DoubleFunding;
    amount_a_ = amount;
    deposits_[sender] += amount + fee_share(params_.closing_fee, Role::A);
    phase_ = Phase::PartyAFunded;
    return {};
  }
  if (phase_ == Phase::Deployed) return Errc::OutOfOrderFunding;
  if (phase_ != Phase::PartyAFunded) {
    return deposits_.count(sender) ? Status(Errc::DoubleFunding) : Status(Errc::WrongPhase);
  }
  amount_b_ = amount;
  deposits_[sender] += amount + fee_share(params_.closing_fee, Role::B);
  v_ = amount_a_ + amount_b_;
  collateral_ = collateral_for(v_, f());
  phase_ = Phase::BothPartiesFunded;
  return {};
}

Status BrickContract::fund_warden(const PublicKey& sender, Coins amount) {
  if (!is_warden(sender)) return Errc::UnknownWarden;
  if (phase_ != Phase::BothPartiesFunded) return Errc::WrongPhase;
  if (funded_wardens_.count(sender)) return Errc::DoubleFunding;
  if (amount != collateral_) {
    return Error{Errc::WrongCollateralAmount,
                 fmt::format("expected {}, got {}", collateral_, amount)};
  }
  funded_wardens_.insert(sender);
  deposits_[sender] += amount;
  return {};
}

Status BrickContract::withdraw(const PublicKey& sender) {
  switch (phase_) {
    case Phase::Open:
    case Phase::OptimisticPending:
    case Phase::PessimisticPending:
    case Phase::Closed:
      return Errc::WrongPhase;
    default:
      break;
  }
  if (!role_of(sender) && !is_warden(sender)) return Errc::UnknownActor;
  if (withdrawn_.count(sender)) return Errc::AlreadyWithdrawn;
  withdrawn_.insert(sender);
  phase_ = Phase::Cancelled;
  if (auto it = deposits_.find(sender); it != deposits_.end()) pay(sender, it->second);
  return {};
}

Status BrickContract::open(const PublicKey& sender) {
  if (!role_of(sender)) return Errc::WrongCaller;
  if (phase_ == Phase::Deployed || phase_ == Phase::PartyAFunded) return Errc::NotFullyFunded;
  if (phase_ != Phase::BothPartiesFunded) return Errc::WrongPhase;
  if (funded_wardens_.size() != n()) {
    return Error{Errc::NotFullyFunded, fmt::format("{} of {} wardens", funded_wardens_.size(), n())};
  }
  phase_ = Phase::Open;
  return {};
}

Status BrickContract::optimistic_close_request(const PublicKey& sender, Coins claimed_a) {
  if (params_.mode == Mode::BrickPlus) return Errc::WrongMode;
  auto role = role_of(sender);
  if (!role) return Errc::WrongCaller;
  if (phase_ != Phase::Open) return Errc::WrongPhase;
  if (claimed_a > v_) return Error{Errc::OverClaim, fmt::format("{} > {}", claimed_a, v_)};
  opt_claimant_ = *role;
  opt_claimed_a_ = claimed_a;
  phase_ = Phase::OptimisticPending;
  return {};
}

Status BrickContract::optimistic_close_agree(const PublicKey& sender) {
  if (phase_ != Phase::OptimisticPending) return Errc::WrongPhase;
  auto role = role_of(sender);
  if (!role || *role == *opt_claimant_) return Errc::WrongCaller;
  pay(params_.parties.a, opt_claimed_a_ + fee_share(params_.closing_fee, Role::A));
  pay(params_.parties.b, (v_ - opt_claimed_a_) + fee_share(params_.closing_fee, Role::B));
  for (const auto& w : funded_wardens_) pay(w, collateral_);
  phase_ = Phase::Closed;
  close_kind_ = CloseKind::Optimistic;
  return {};
}

Status BrickContract::record_closing_claim(const PublicKey& sender, ClosingClaim claim,
                                           Height height) {
  if (phase_ != Phase::Open && phase_ != Phase::OptimisticPending &&
      phase_ != Phase::PessimisticPending) {
    return Errc::WrongPhase;
  }
  if (sender != claim.warden) return Errc::WrongCaller;
  if (!is_warden(claim.warden)) return Errc::UnknownWarden;
  for (const auto& c : claims_) {
    if (c.warden == claim.warden) return Errc::DuplicateClaim;
  }
  if ((params_.mode == Mode::BrickPlus) != claim.head.has_value()) {
    return Error{Errc::BadSignature, "claim format does not match channel mode"};
  }
  if (!verify(claim.warden, close_plaintext(channel(), claim.seq, claim.head), claim.warden_sig)) {
    return Error{Errc::BadSignature, "warden signature"};
  }
  Bytes ann = announce_plaintext(channel(), claim.seq, claim.head);
  if (!verify(params_.parties.a, ann, claim.sig_a) || !verify(params_.parties.b, ann, claim.sig_b)) {
    return Error{Errc::BadSignature, "party announcement signature"};
  }
  claim.inclusion_order = claims_.size() + 1;
  claim.included_at = height;
  claims_.push_back(std::move(claim));
  phase_ = Phase::PessimisticPending;
  return {};
}

Status BrickContract::check_proof(const ProofOfFraud& proof) const {
  if (proof.ack.warden != proof.claim.warden) return Error{Errc::InvalidProof, "key mismatch"};
  if (proof.ack.channel != channel()) return Error{Errc::InvalidProof, "foreign channel"};
  if (proof.ack.seq <= proof.claim.seq) return Error{Errc::InvalidProof, "ack not newer than claim"};
  if (!verify_ack(proof.ack)) return Error{Errc::InvalidProof, "ack signature"};
  for (const auto& c : claims_) {
    if (c.warden == proof.claim.warden) {
      if (!c.same_content(proof.claim)) return Error{Errc::InvalidProof, "claim not on chain"};
      return {};
    }
  }
  return Error{Errc::InvalidProof, "no recorded claim"};
}

Result<PessimisticOutcome> BrickContract::pessimistic_close(const PublicKey& sender,
                                                            const call::PessimisticClose& c) {
  if (phase_ != Phase::PessimisticPending) return Errc::WrongPhase;
  auto role = role_of(sender);
  if (!role) return Errc::WrongCaller;

  PessimisticOutcome out;
  out.submitter = sender;
  std::set<PublicKey> proven;
  for (const auto& p : c.proofs) {
    auto s = check_proof(p);
    if (!s) {
      out.ignored_proofs.push_back(fmt::format("{}: {}", p.ack.warden.hex().substr(0, 8),
                                               s.error().message()));
      continue;
    }
    if (!proven.insert(p.warden()).second) {
      out.ignored_proofs.push_back(fmt::format("{}: duplicate proof", p.ack.warden.hex().substr(0, 8)));
    }
  }
  const PublicKey& counterparty = params_.parties.of(other(*role));
  Coins slashed_total = proven.size() * collateral_;

  if (proven.size() >= f() + 1) {
    for (const auto& w : funded_wardens_) {
      if (!proven.count(w)) redeemable_[w] = collateral_;
    }
    pay(sender, slashed_total);
    pay(counterparty, v_ + params_.closing_fee);
    slashed_ = proven;
    out.slashed.assign(proven.begin(), proven.end());
    phase_ = Phase::Closed;
    close_kind_ = CloseKind::FraudMajority;
    return out;
  }

  std::vector<const ClosingClaim*> counted;
  for (const auto& cl : claims_) {
    if (!proven.count(cl.warden)) counted.push_back(&cl);
  }
  if (counted.size() < t()) {
    return Error{Errc::InsufficientClaims, fmt::format("{} of {}", counted.size(), t())};
  }
  const ClosingClaim* top = counted.front();
  for (const auto* cl : counted) {
    if (cl->seq > top->seq) top = cl;
  }
  Seq i_star = top->seq;
  if (c.state.seq != i_star) {
    return Error{Errc::WrongState, fmt::format("state seq {} but max claim {}", c.state.seq, i_star)};
  }
  if (c.state.total() != v_) return Error{Errc::WrongState, "balances do not sum to v"};
  Digest commitment = commit_state(c.state);
  Bytes plaintext;
  if (params_.mode == Mode::BrickPlus) {
    if (!c.prev_head) return Error{Errc::WrongState, "missing previous head"};
    Digest head = chain_head(*c.prev_head, commitment, i_star);
    if (!top->head || head != *top->head) return Error{Errc::WrongState, "head mismatch"};
    plaintext = announce_plaintext(channel(), i_star, head);
  } else {
    plaintext = commit_plaintext(channel(), commitment, i_star);
  }
  if (!verify(params_.parties.a, plaintext, c.sig_a) || !verify(params_.parties.b, plaintext, c.sig_b)) {
    return Errc::BadCommitSignature;
  }

  pay(params_.parties.a, c.state.balance_a);
  pay(params_.parties.b, c.state.balance_b);
  pay(sender, slashed_total);
  Coins share = params_.closing_fee / t();
  pay(sender, params_.closing_fee % t());
  for (const auto& w : funded_wardens_) {
    if (!proven.count(w)) redeemable_[w] = collateral_;
  }
  for (std::size_t i = 0; i < t(); ++i) redeemable_[counted[i]->warden] += share;
  slashed_ = proven;
  out.slashed.assign(proven.begin(), proven.end());
  out.closing_seq = i_star;
  closing_seq_ = i_star;
  phase_ = Phase::Closed;
  close_kind_ = CloseKind::Pessimistic;
  return out;
}

Result<Coins> BrickContract::redeem_warden(const PublicKey& sender) {
  if (phase_ != Phase::Closed || close_kind_ == CloseKind::Optimistic) return Errc::WrongPhase;
  if (!is_warden(sender)) return Errc::UnknownWarden;
  if (slashed_.count(sender)) return Errc::SlashedWarden;
  if (redeemed_.count(sender)) return Errc::AlreadyRedeemed;
  auto it = redeemable_.find(sender);
  if (it == redeemable_.end()) return Errc::UnknownWarden;
  Coins amount = it->second;
  redeemable_.erase(it);
  redeemed_.insert(sender);
  pay(sender, amount);
  return amount;
}

Status BrickContract::audit_request(const PublicKey& sender, Height height) {
  if (params_.mode != Mode::BrickPlus) return Errc::WrongMode;
  if (std::find(params_.auditors.begin(), params_.auditors.end(), sender) == params_.auditors.end()) {
    return Errc::InvalidRequest;
  }
  if (phase_ != Phase::Open && phase_ != Phase::PessimisticPending && phase_ != Phase::Closed) {
    return Errc::WrongPhase;
  }
  access_.push_back(AccessRequest{sender, height});
  return {};
}

Coins BrickContract::total_deposits() const {
  Coins sum = 0;
  for (const auto& [k, v] : deposits_) sum += v;
  return sum;
}

Coins BrickContract::total_payouts() const {
  Coins sum = 0;
  for (const auto& [k, v] : payouts_) sum += v;
  return sum;
}

Coins BrickContract::total_outstanding() const {
  Coins sum = 0;
  for (const auto& [k, v] : redeemable_) sum += v;
  return sum;
}

nlohmann::json BrickContract::to_json() const {
  nlohmann::json j;
  j["channel"] = channel().hex();
  j["mode"] = to_string(params_.mode);
  j["phase"] = to_string(phase_);
  j["close_kind"] = to_string(close_kind_);
  j["v"] = v_;
  j["collateral"] = collateral_;
  j["closing_fee"] = params_.closing_fee;
  if (closing_seq_) j["closing_seq"] = *closing_seq_;
  j["claims"] = nlohmann::json::array();
  for (const auto& c : claims_) {
    j["claims"].push_back({{"warden", c.warden.hex().substr(0, 16)},
                           {"seq", c.seq},
                           {"order", c.inclusion_order},
                           {"height", c.included_at}});
  }
  j["slashed"] = nlohmann::json::array();
  for (const auto& s : slashed_) j["slashed"].push_back(s.hex().substr(0, 16));
  j["deposits"] = total_deposits();
  j["payouts"] = total_payouts();
  j["outstanding"] = total_outstanding();
  return j;
}

}  // namespace brick
