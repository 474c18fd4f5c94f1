#pragma once

// Simulated blockchain and the channel contract that runs on it.
//
// Transactions are included a bounded number of blocks after submission and
// executed at inclusion; a transaction at depth >= confirm_depth is final.
// The chain authenticates the sender of a transaction by construction, so
// transactions carry no signatures of their own.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "brick/channel.hpp"
#include "brick/primitives.hpp"
#include "brick/result.hpp"

namespace brick {

using Height = std::uint64_t;
using TxId = std::uint64_t;

struct Transaction {
  TxId id = 0;
  PublicKey sender;
  ChannelId contract;
  std::string kind;
  Bytes payload;
  Height submitted_at = 0;
};

struct Receipt {
  TxId tx = 0;
  Height height = 0;
  std::optional<Error> error;
  /// Non-fatal remarks from execution, such as ignored proofs.
  std::vector<std::string> notes;

  bool ok() const { return !error.has_value(); }
};

struct Block {
  Height height = 0;
  std::vector<Transaction> txs;
  std::vector<Receipt> receipts;
};

class ContractExecutor {
 public:
  virtual ~ContractExecutor() = default;
  virtual Receipt execute(const Transaction& tx, Height height) = 0;
  virtual void on_block(Height /*height*/) {}
};

struct ChainParams {
  Height confirm_depth = 6;
  /// Honest transactions land within this many blocks of submission.
  Height liveness_bound = 2;
};

class Chain {
 public:
  /// Extra blocks an adversary holds a transaction back. Zero means no hold.
  using HoldPolicy = std::function<Height(const Transaction&)>;

  Chain(ChainParams params, std::uint64_t seed);

  const ChainParams& params() const { return params_; }
  Height height() const { return blocks_.size() - 1; }
  /// Highest height whose block is at depth >= confirm_depth.
  std::optional<Height> finalized_height() const;
  bool is_final(Height included_at) const;

  void register_contract(const ChannelId& address, ContractExecutor* executor);
  void add_hold_policy(HoldPolicy policy);

  TxId submit(const PublicKey& sender, const ChannelId& contract, std::string kind, Bytes payload);
  /// Seals the next block: includes every due transaction in submission order
  /// and executes each against its contract.
  const Block& advance_block();

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(Height h) const { return blocks_.at(h); }
  std::optional<Receipt> receipt(TxId id) const;
  std::optional<Height> inclusion_height(TxId id) const;
  std::size_t pending() const { return pending_.size(); }

  nlohmann::json to_json() const;

 private:
  struct Pending {
    Height due;
    Transaction tx;
  };

  ChainParams params_;
  std::mt19937_64 rng_;
  std::vector<Block> blocks_;
  std::vector<Pending> pending_;
  std::map<ChannelId, ContractExecutor*> contracts_;
  std::vector<HoldPolicy> holds_;
  std::map<TxId, std::pair<Height, std::size_t>> index_;
  TxId next_id_ = 1;
};

// ---------------------------------------------------------------------------
// Channel contract

enum class Phase : std::uint8_t {
  Deployed,
  PartyAFunded,
  BothPartiesFunded,
  Open,
  OptimisticPending,
  PessimisticPending,
  Closed,
  Cancelled,
};

std::string_view to_string(Phase p);

enum class CloseKind : std::uint8_t { None, Optimistic, Pessimistic, FraudMajority };

std::string_view to_string(CloseKind k);

struct ClosingClaim {
  PublicKey warden;
  Seq seq = 0;
  std::optional<Digest> head;
  Signature warden_sig;
  Signature sig_a;
  Signature sig_b;
  /// Assigned by the contract, 1-based.
  std::uint64_t inclusion_order = 0;
  Height included_at = 0;

  bool same_content(const ClosingClaim& o) const {
    return warden == o.warden && seq == o.seq && head == o.head && warden_sig == o.warden_sig &&
           sig_a == o.sig_a && sig_b == o.sig_b;
  }
};

struct ProofOfFraud {
  WardenAck ack;
  ClosingClaim claim;

  const PublicKey& warden() const { return ack.warden; }
};

struct AccessRequest {
  PublicKey auditor;
  Height included_at = 0;
};

namespace call {
struct FundParty { Coins amount = 0; };
struct FundWarden { Coins amount = 0; };
struct Withdraw {};
struct Open {};
struct OptimisticRequest { Coins claimed_a = 0; };
struct OptimisticAgree {};
struct RecordClaim { ClosingClaim claim; };
struct PessimisticClose {
  ChannelState state;
  Signature sig_a;
  Signature sig_b;
  /// Previous chain head for hash-chained channels.
  std::optional<Digest> prev_head;
  std::vector<ProofOfFraud> proofs;
};
struct Redeem {};
struct Audit {};
}  // namespace call

using ContractCall =
    std::variant<call::FundParty, call::FundWarden, call::Withdraw, call::Open,
                 call::OptimisticRequest, call::OptimisticAgree, call::RecordClaim,
                 call::PessimisticClose, call::Redeem, call::Audit>;

std::string_view call_kind(const ContractCall& c);
Bytes encode_call(const ContractCall& c);
std::optional<ContractCall> decode_call(ByteView data);

struct ContractParams {
  ChannelId channel;
  PartyKeys parties;
  std::vector<Digest> warden_hashes;
  std::uint64_t t = 0;
  Coins closing_fee = 0;
  Mode mode = Mode::Brick;
  /// Keys allowed to file an audit access request.
  std::vector<PublicKey> auditors;
};

/// Deposit each party adds on top of its balance to fund the closing fee.
Coins fee_share(Coins closing_fee, Role r);
Coins collateral_for(Coins v, std::uint64_t f);

struct PessimisticOutcome {
  Seq closing_seq = 0;
  std::vector<PublicKey> slashed;
  std::vector<std::string> ignored_proofs;
  PublicKey submitter;
};

class BrickContract : public ContractExecutor {
 public:
  static Result<std::unique_ptr<BrickContract>> deploy(ContractParams params);

  Receipt execute(const Transaction& tx, Height height) override;

  /// Direct entry points, also used by execute(). The sender is the
  /// chain-authenticated caller.
  Status fund_party(const PublicKey& sender, Coins amount);
  Status fund_warden(const PublicKey& sender, Coins amount);
  Status withdraw(const PublicKey& sender);
  Status open(const PublicKey& sender);
  Status optimistic_close_request(const PublicKey& sender, Coins claimed_a);
  Status optimistic_close_agree(const PublicKey& sender);
  Status record_closing_claim(const PublicKey& sender, ClosingClaim claim, Height height);
  Result<PessimisticOutcome> pessimistic_close(const PublicKey& sender, const call::PessimisticClose& c);
  Result<Coins> redeem_warden(const PublicKey& sender);
  Status audit_request(const PublicKey& sender, Height height);

  /// Pure check used by the contract and by parties assembling proofs.
  Status check_proof(const ProofOfFraud& proof) const;

  const ContractParams& params() const { return params_; }
  const ChannelId& channel() const { return params_.channel; }
  Phase phase() const { return phase_; }
  CloseKind close_kind() const { return close_kind_; }
  std::uint64_t n() const { return params_.warden_hashes.size(); }
  std::uint64_t f() const { return (n() - 1) / 3; }
  std::uint64_t t() const { return params_.t; }
  Coins v() const { return v_; }
  Coins collateral() const { return collateral_; }
  std::optional<Role> optimistic_claimant() const { return opt_claimant_; }
  Coins optimistic_claim() const { return opt_claimed_a_; }
  std::optional<Height> optimistic_requested_at() const { return opt_requested_at_; }
  std::optional<Seq> closing_seq() const { return closing_seq_; }

  /// Recorded claims in inclusion order.
  const std::vector<ClosingClaim>& claims() const { return claims_; }
  const std::set<PublicKey>& slashed() const { return slashed_; }
  const std::vector<AccessRequest>& access_requests() const { return access_; }
  std::optional<Height> closed_at() const { return closed_at_; }

  const std::map<PublicKey, Coins>& deposits() const { return deposits_; }
  const std::map<PublicKey, Coins>& payouts() const { return payouts_; }
  /// Amounts wardens may still redeem.
  const std::map<PublicKey, Coins>& redeemable() const { return redeemable_; }
  Coins total_deposits() const;
  Coins total_payouts() const;
  Coins total_outstanding() const;

  nlohmann::json to_json() const;

 private:
  explicit BrickContract(ContractParams params);

  std::optional<Role> role_of(const PublicKey& pk) const;
  bool is_warden(const PublicKey& pk) const;
  void pay(const PublicKey& to, Coins amount);

  ContractParams params_;
  Phase phase_ = Phase::Deployed;
  CloseKind close_kind_ = CloseKind::None;
  Coins amount_a_ = 0;
  Coins amount_b_ = 0;
  Coins v_ = 0;
  Coins collateral_ = 0;
  std::set<PublicKey> funded_wardens_;
  std::optional<Role> opt_claimant_;
  Coins opt_claimed_a_ = 0;
  std::optional<Height> opt_requested_at_;
  std::vector<ClosingClaim> claims_;
  std::set<PublicKey> slashed_;
  std::set<PublicKey> withdrawn_;
  std::set<PublicKey> redeemed_;
  std::vector<AccessRequest> access_;
  std::optional<Seq> closing_seq_;
  std::optional<Height> closed_at_;
  std::map<PublicKey, Coins> deposits_;
  std::map<PublicKey, Coins> payouts_;
  std::map<PublicKey, Coins> redeemable_;
};

}  // namespace brick
