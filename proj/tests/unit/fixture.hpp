#pragma once

// Shared test channel: two parties, a committee of n wardens and a deployed
// contract, plus helpers to build signed states, acks and claims by hand.

#include <map>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "brick/brick_plus.hpp"
#include "brick/channel.hpp"
#include "brick/ledger.hpp"

namespace brick::testing {

inline Salt fixed_salt(std::uint8_t b) {
  Salt s;
  s.bytes.fill(b);
  return s;
}

struct TestChannel {
  Mode mode;
  std::uint64_t n;
  Coins fee;
  KeyPair a = keygen(derive_seed(99, "party", 0));
  KeyPair b = keygen(derive_seed(99, "party", 1));
  KeyPair outsider = keygen(derive_seed(99, "outsider", 0));
  KeyPair auditor = keygen(derive_seed(99, "auditor", 0));
  std::vector<KeyPair> w;
  ChannelId ch;
  std::unique_ptr<BrickContract> contract;
  std::map<Seq, ChannelState> states;
  std::map<Seq, StateCommitment> commits;
  std::map<Seq, Announcement> anns;
  std::map<Seq, Digest> heads;

  explicit TestChannel(Mode m = Mode::Brick, std::uint64_t committee = 10, Coins closing_fee = 70)
      : mode(m), n(committee), fee(closing_fee) {
    ch.bytes = hash(derive_seed(99, "channel", 0).view()).bytes;
    for (std::uint64_t i = 0; i < n; ++i) w.push_back(keygen(derive_seed(99, "warden", i)));
    heads[0] = genesis_head();
  }

  PartyKeys keys() const { return {a.public_key(), b.public_key()}; }
  std::uint64_t f() const { return (n - 1) / 3; }
  std::uint64_t t() const { return 2 * f() + 1; }

  ContractParams params() const {
    ContractParams p;
    p.channel = ch;
    p.parties = keys();
    for (const auto& k : w) p.warden_hashes.push_back(hash(k.public_key().view()));
    p.t = t();
    p.closing_fee = fee;
    p.mode = mode;
    p.auditors = {auditor.public_key()};
    return p;
  }

  void deploy() {
    auto c = BrickContract::deploy(params());
    ASSERT_TRUE(c.ok());
    contract = std::move(*c);
  }

  void open(Coins ba = 6, Coins bb = 6) {
    deploy();
    ASSERT_TRUE(contract->fund_party(a.public_key(), ba));
    ASSERT_TRUE(contract->fund_party(b.public_key(), bb));
    for (const auto& k : w) ASSERT_TRUE(contract->fund_warden(k.public_key(), contract->collateral()));
    ASSERT_TRUE(contract->open(a.public_key()));
    ASSERT_EQ(contract->phase(), Phase::Open);
  }

  /// Both-signed state and announcement at `seq`; states must be added in order.
  const Announcement& add_state(Seq seq, Coins ba, Coins bb) {
    ChannelState s{seq, ba, bb, fixed_salt(static_cast<std::uint8_t>(seq))};
    states[seq] = s;
    if (mode == Mode::BrickPlus) {
      auto c = make_chained_commitment(ch, s, ba + bb, seq - 1, heads.at(seq - 1), a, b);
      EXPECT_TRUE(c.ok());
      commits[seq] = *c;
      heads[seq] = *c->head;
    } else {
      auto c = make_commitment(ch, s, ba + bb, seq - 1, a, b);
      EXPECT_TRUE(c.ok());
      commits[seq] = *c;
    }
    auto ann = make_announcement(commits[seq], a, b);
    EXPECT_TRUE(ann.ok());
    anns[seq] = *ann;
    return anns[seq];
  }

  /// Balances 6/6 at seq 1, then 7/5 on even and 5/7 on odd seqs, up to `last`.
  void add_states(Seq last) {
    for (Seq s = 1; s <= last; ++s) {
      if (s == 1) add_state(s, 6, 6);
      else if (s % 2 == 0) add_state(s, 7, 5);
      else add_state(s, 5, 7);
    }
  }

  ClosingClaim claim(std::size_t warden, Seq seq) const {
    const auto& ann = anns.at(seq);
    ClosingClaim c;
    c.warden = w[warden].public_key();
    c.seq = seq;
    c.head = ann.head;
    c.warden_sig = sign(w[warden], close_plaintext(ch, seq, ann.head));
    c.sig_a = ann.sig_a;
    c.sig_b = ann.sig_b;
    return c;
  }

  WardenAck ack(std::size_t warden, Seq seq) const { return make_ack(anns.at(seq), w[warden]); }

  Status record(std::size_t warden, Seq seq, Height h = 10) {
    return contract->record_closing_claim(w[warden].public_key(), claim(warden, seq), h);
  }

  const ClosingClaim& onchain(std::size_t warden) const {
    for (const auto& c : contract->claims()) {
      if (c.warden == w[warden].public_key()) return c;
    }
    throw std::runtime_error("no claim");
  }

  ProofOfFraud proof(std::size_t warden, Seq acked) const { return {ack(warden, acked), onchain(warden)}; }

  call::PessimisticClose finalize(Seq seq, std::vector<ProofOfFraud> proofs = {}) const {
    call::PessimisticClose pc;
    pc.state = states.at(seq);
    if (mode == Mode::BrickPlus) {
      pc.sig_a = anns.at(seq).sig_a;
      pc.sig_b = anns.at(seq).sig_b;
      pc.prev_head = heads.at(seq - 1);
    } else {
      pc.sig_a = *commits.at(seq).sig_a;
      pc.sig_b = *commits.at(seq).sig_b;
    }
    pc.proofs = std::move(proofs);
    return pc;
  }

  Coins paid(const KeyPair& k) const {
    auto it = contract->payouts().find(k.public_key());
    return it == contract->payouts().end() ? 0 : it->second;
  }
};

}  // namespace brick::testing
