#include <gtest/gtest.h>

#include "fixture.hpp"
#include "brick/world.hpp"

using namespace brick;
using brick::testing::fixed_salt;
using brick::testing::TestChannel;

namespace {

StateHistory sample_history(std::size_t len) {
  StateHistory h;
  for (Seq s = 1; s <= len; ++s) h.push_back(ChannelState{s, 6 + s % 3, 6 - s % 3, fixed_salt(static_cast<std::uint8_t>(s))});
  return h;
}

ClosingClaim head_claim(const StateHistory& h) {
  ClosingClaim c;
  c.seq = h.back().seq;
  c.head = replay_chain(h).back();
  return c;
}

}  // namespace

// Heads from tests/oracle/oracle.py.
TEST(BrickPlus, ChainHeadsMatchOracle) {
  StateHistory h{{1, 6, 6, fixed_salt(0x11)}, {2, 8, 4, fixed_salt(0x11)}, {3, 5, 7, fixed_salt(0x11)}};
  auto heads = replay_chain(h);
  ASSERT_EQ(heads.size(), 3u);
  EXPECT_EQ(heads[0].hex(), "d51c539ca14be753422d14673eba4e633fb1ecc836012891f8434ece850a6080");
  EXPECT_EQ(heads[1].hex(), "d2bd1a2d0b3a38db92971ba49cf51a592a120ae95fa771a3b9909b80e5bde41f");
  EXPECT_EQ(heads[2].hex(), "bd8fafede133bf42b6ebd2b10a98773227d8e92a09d0e5827ff31d7e2caf7c6a");
  EXPECT_TRUE(genesis_head().is_zero());
  EXPECT_EQ(heads[0], extend_chain(genesis_head(), h[0]));
  EXPECT_EQ(heads[1], chain_head(heads[0], commit_state(h[1]), 2));
}

TEST(BrickPlus, AlteringAStateChangesEveryLaterHead) {
  auto h = sample_history(6);
  auto before = replay_chain(h);
  h[2].balance_a += 1;
  h[2].balance_b -= 1;
  auto after = replay_chain(h);
  EXPECT_EQ(before[0], after[0]);
  EXPECT_EQ(before[1], after[1]);
  for (std::size_t i = 2; i < 6; ++i) EXPECT_NE(before[i], after[i]) << i;
}

TEST(BrickPlus, VerifyHistoryVerdicts) {
  auto h = sample_history(5);
  std::vector<ClosingClaim> claims{head_claim(h)};
  EXPECT_EQ(verify_history(h, claims).verdict, Verdict::Consistent);

  auto altered = h;
  altered[2].balance_a -= 1;
  altered[2].balance_b += 1;
  EXPECT_EQ(verify_history(altered, claims).verdict, Verdict::Tampered);
  auto resalted = h;
  resalted[2].salt = fixed_salt(0xAB);
  EXPECT_EQ(verify_history(resalted, claims).verdict, Verdict::Tampered);
  auto shorter = h;
  shorter.pop_back();
  EXPECT_EQ(verify_history(shorter, claims).verdict, Verdict::Tampered);
  auto reordered = h;
  std::swap(reordered[1], reordered[2]);
  EXPECT_EQ(verify_history(reordered, claims).verdict, Verdict::Tampered);
  EXPECT_EQ(verify_history({}, claims).verdict, Verdict::Tampered);
  EXPECT_EQ(verify_history(h, {}).verdict, Verdict::Tampered);
}

TEST(BrickPlus, MaxHeadClaimPicksHighestSeq) {
  auto h = sample_history(5);
  auto prefix = h;
  prefix.resize(4);
  std::vector<ClosingClaim> claims{head_claim(prefix), head_claim(h), head_claim(prefix)};
  auto top = max_head_claim(claims);
  ASSERT_TRUE(top.has_value());
  EXPECT_EQ(top->seq, 5u);
  EXPECT_EQ(verify_history(h, claims).verdict, Verdict::Consistent);
  ClosingClaim plain;
  plain.seq = 9;
  EXPECT_FALSE(max_head_claim({plain}).has_value());
}

TEST(BrickPlus, EverySingleFieldMutationDetected) {
  auto h = sample_history(6);
  std::vector<ClosingClaim> claims{head_claim(h)};
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (int field = 0; field < 4; ++field) {
      auto m = h;
      switch (field) {
        case 0: m[i].balance_a += 1; break;
        case 1: m[i].balance_b += 1; break;
        case 2: m[i].salt.bytes[31] ^= 0x80; break;
        case 3: m[i].seq += 7; break;
      }
      EXPECT_EQ(verify_history(m, claims).verdict, Verdict::Tampered) << i << "/" << field;
    }
  }
}

TEST(BrickPlus, AuditorReport) {
  KeyPair k = keygen(derive_seed(1, "auditor", 0));
  auto h = sample_history(4);
  std::vector<ClosingClaim> claims{head_claim(h)};
  Auditor quiet(k);
  quiet.on_history(Role::A, h);
  auto r = quiet.finish(claims);
  EXPECT_EQ(r.parties.at(Role::A).verdict, Verdict::Consistent);
  EXPECT_EQ(r.parties.at(Role::B).verdict, Verdict::Unresponsive);
  EXPECT_EQ(r.overall(), Verdict::Unresponsive);
  EXPECT_EQ(r.culprit(), Role::B);
  EXPECT_TRUE(r.punish);
  EXPECT_EQ(r.closing_seq, 4u);

  Auditor both(k);
  both.on_history(Role::A, h);
  auto bad = h;
  bad[0].balance_a += 1;
  both.on_history(Role::B, bad);
  auto r2 = both.finish(claims);
  EXPECT_EQ(r2.overall(), Verdict::Tampered);
  EXPECT_EQ(r2.culprit(), Role::B);

  Auditor good(k);
  good.on_history(Role::A, h);
  good.on_history(Role::B, h);
  EXPECT_FALSE(good.finish(claims).punish);
}

TEST(BrickPlus, ContractDisablesOptimisticClose) {
  TestChannel tc(Mode::BrickPlus);
  tc.open();
  EXPECT_EQ(tc.contract->optimistic_close_request(tc.a.public_key(), 6).code(), Errc::WrongMode);
  TestChannel plain;
  plain.open();
  EXPECT_EQ(plain.contract->audit_request(plain.auditor.public_key(), 3).code(), Errc::WrongMode);
}

TEST(BrickPlus, AccessRequestAllowList) {
  TestChannel tc(Mode::BrickPlus);
  tc.open();
  EXPECT_EQ(tc.contract->audit_request(tc.outsider.public_key(), 3).code(), Errc::InvalidRequest);
  EXPECT_TRUE(tc.contract->access_requests().empty());
  ASSERT_TRUE(tc.contract->audit_request(tc.auditor.public_key(), 3));
  ASSERT_EQ(tc.contract->access_requests().size(), 1u);
  EXPECT_EQ(tc.contract->access_requests()[0].included_at, 3u);
}

TEST(BrickPlus, PessimisticCloseChecksHead) {
  TestChannel tc(Mode::BrickPlus);
  tc.open();
  tc.add_states(5);
  for (std::size_t i = 0; i < 7; ++i) ASSERT_TRUE(tc.record(i, 5));
  auto wrong_prev = tc.finalize(5);
  wrong_prev.prev_head = tc.heads[3];
  EXPECT_EQ(tc.contract->pessimistic_close(tc.a.public_key(), wrong_prev).code(), Errc::WrongState);
  auto no_prev = tc.finalize(5);
  no_prev.prev_head.reset();
  EXPECT_EQ(tc.contract->pessimistic_close(tc.a.public_key(), no_prev).code(), Errc::WrongState);
  auto out = tc.contract->pessimistic_close(tc.a.public_key(), tc.finalize(5));
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out->closing_seq, 5u);
  EXPECT_EQ(tc.paid(tc.a), 5u);
  EXPECT_EQ(tc.paid(tc.b), 7u);
}

TEST(BrickPlus, PlainClaimRejectedOnChainedChannel) {
  TestChannel tc(Mode::BrickPlus);
  tc.open();
  tc.add_states(2);
  auto c = tc.claim(0, 2);
  c.head.reset();
  EXPECT_EQ(tc.contract->record_closing_claim(tc.w[0].public_key(), c, 3).code(), Errc::BadSignature);
}

namespace {

RunReport audit_run(const std::string& setting) {
  auto cfg = *scenario_preset("audit-flow", 4);
  if (!setting.empty()) {
    auto eq = setting.find('=');
    EXPECT_TRUE(apply_setting(cfg, setting.substr(0, eq), setting.substr(eq + 1)));
  }
  auto rep = run_scenario(cfg);
  EXPECT_TRUE(rep.ok());
  return *rep;
}

}  // namespace

TEST(BrickPlus, AuditFlowEndToEnd) {
  auto honest = audit_run("");
  EXPECT_EQ(honest.final_phase, "Closed");
  EXPECT_EQ(honest.audit["verdict"], "consistent");
  EXPECT_EQ(honest.audit["closing_seq"], 4);
  EXPECT_TRUE(honest.safety_ok);

  auto tampered = audit_run("party_b=tamper-history");
  EXPECT_EQ(tampered.audit["verdict"], "tampered");
  EXPECT_EQ(tampered.audit["culprit"], "B");
  EXPECT_EQ(tampered.audit["parties"]["A"]["verdict"], "consistent");

  auto silent = audit_run("party_a=silent");
  EXPECT_EQ(silent.audit["verdict"], "unresponsive");
  EXPECT_EQ(silent.audit["culprit"], "A");
  EXPECT_EQ(silent.audit["parties"]["B"]["verdict"], "consistent");

  auto refused = audit_run("auditor_authorized=false");
  EXPECT_EQ(refused.final_phase, "Open");
  EXPECT_EQ(refused.audit["access_requests"], 0);
}

TEST(BrickPlus, WardensSeeOnlyDigestsBeforeAudit) {
  auto cfg = *scenario_preset("audit-flow", 2);
  cfg.keep_trace = true;
  auto world = World::create(cfg);
  ASSERT_TRUE(world.ok());
  auto& w = **world;
  w.start();
  w.run_until(from_ms(20000));
  for (const auto& warden : w.wardens()) {
    ASSERT_TRUE(warden.stored().has_value());
    EXPECT_TRUE(warden.stored()->head.has_value());
  }
  for (const auto& b : w.chain().blocks()) {
    for (const auto& tx : b.txs) EXPECT_NE(tx.kind, "pessimistic-close");
  }
}
