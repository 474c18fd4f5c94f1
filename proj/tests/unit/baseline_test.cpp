#include <gtest/gtest.h>

#include "brick/baseline.hpp"
#include "brick/world.hpp"

using namespace brick;

namespace {

struct BaselineBench {
  KeyPair a = keygen(derive_seed(3, "party", 0));
  KeyPair b = keygen(derive_seed(3, "party", 1));
  ChannelId ch;
  TimeoutChannel chan;
  std::vector<BaselineState> states;

  BaselineBench() : chan(params()) {
    states.push_back(sign_baseline_state(ch, 1, 6, 6, a, b));
    states.push_back(sign_baseline_state(ch, 2, 10, 2, a, b));
    states.push_back(sign_baseline_state(ch, 3, 7, 5, a, b));
  }

  BaselineParams params() {
    ch.bytes.fill(0x42);
    return BaselineParams{ch, {a.public_key(), b.public_key()}, 6, 6, 6};
  }

  Coins paid(const KeyPair& k) const {
    auto it = chan.payouts().find(k.public_key());
    return it == chan.payouts().end() ? 0 : it->second;
  }
};

}  // namespace

TEST(Baseline, TimelyDisputeSettlesFreshest) {
  BaselineBench bb;
  ASSERT_TRUE(bb.chan.close_at(bb.a.public_key(), bb.states[1], 10));
  EXPECT_EQ(bb.chan.phase(), BaselinePhase::Closing);
  ASSERT_TRUE(bb.chan.dispute(bb.b.public_key(), bb.states[2], 13));
  EXPECT_EQ(bb.chan.phase(), BaselinePhase::Closed);
  EXPECT_EQ(bb.chan.settled_seq(), 3u);
  EXPECT_EQ(bb.paid(bb.a), 7u);
  EXPECT_EQ(bb.paid(bb.b), 5u);
}

TEST(Baseline, LateDisputeLetsStaleCloseStand) {
  BaselineBench bb;
  ASSERT_TRUE(bb.chan.close_at(bb.a.public_key(), bb.states[1], 10));
  for (Height h = 11; h <= 16; ++h) bb.chan.on_block(h);
  EXPECT_EQ(bb.chan.phase(), BaselinePhase::Closing);
  bb.chan.on_block(17);
  EXPECT_EQ(bb.chan.phase(), BaselinePhase::Closed);
  EXPECT_EQ(bb.chan.dispute(bb.b.public_key(), bb.states[2], 17).code(), Errc::LateDispute);
  EXPECT_EQ(bb.chan.settled_seq(), 2u);
  EXPECT_EQ(bb.paid(bb.b), 2u);
}

TEST(Baseline, DisputeRules) {
  BaselineBench bb;
  EXPECT_EQ(bb.chan.dispute(bb.b.public_key(), bb.states[2], 3).code(), Errc::WrongPhase);
  ASSERT_TRUE(bb.chan.close_at(bb.a.public_key(), bb.states[1], 10));
  EXPECT_EQ(bb.chan.close_at(bb.b.public_key(), bb.states[2], 10).code(), Errc::WrongPhase);
  EXPECT_EQ(bb.chan.dispute(bb.b.public_key(), bb.states[0], 11).code(), Errc::NotNewer);
  EXPECT_EQ(bb.chan.dispute(bb.b.public_key(), bb.states[1], 11).code(), Errc::NotNewer);
  KeyPair stranger = keygen(derive_seed(3, "x", 0));
  EXPECT_EQ(bb.chan.dispute(stranger.public_key(), bb.states[2], 11).code(), Errc::WrongCaller);
  auto forged = bb.states[2];
  forged.balance_b = 12;
  forged.balance_a = 0;
  EXPECT_EQ(bb.chan.dispute(bb.b.public_key(), forged, 11).code(), Errc::BadSignature);
  EXPECT_EQ(bb.chan.dispute(bb.b.public_key(), bb.states[2], 17).code(), Errc::LateDispute);
}

TEST(Baseline, CallEncodingRoundTrip) {
  BaselineBench bb;
  for (const BaselineCall& c : {BaselineCall{baseline_call::Close{bb.states[1]}},
                                BaselineCall{baseline_call::Dispute{bb.states[2]}}}) {
    auto bytes = encode_baseline_call(c);
    auto back = decode_baseline_call(bytes);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(back->index(), c.index());
    EXPECT_EQ(encode_baseline_call(*back), bytes);
  }
  EXPECT_NE(baseline_call_kind(baseline_call::Close{}), baseline_call_kind(baseline_call::Dispute{}));
  EXPECT_FALSE(decode_baseline_call(Bytes{1, 2}).has_value());
}

TEST(Baseline, CensorshipBreaksBaselineButNotBrick) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto rep = run_scenario(*scenario_preset("baseline-censorship", seed));
    ASSERT_TRUE(rep.ok());
    EXPECT_FALSE(rep->safety_ok);
    EXPECT_GT(rep->baseline["victim_loss"].get<Coins>(), 0u);
    ASSERT_FALSE(rep->paired.is_null());
    EXPECT_TRUE(rep->paired["safety_ok"].get<bool>());
    EXPECT_EQ(rep->paired["closing_seq"], rep->paired["freshest_committed_seq"]);
    // An unsafe baseline is the expected outcome, not a failure of the run.
    EXPECT_EQ(rep->exit_code(), 0);
  }
}

TEST(Baseline, PromptInclusionIsSafe) {
  auto cfg = *scenario_preset("baseline-censorship", 1);
  cfg.adversary = Adversary::Honest;
  auto rep = run_scenario(cfg);
  ASSERT_TRUE(rep.ok());
  EXPECT_TRUE(rep->safety_ok);
  EXPECT_EQ(rep->baseline["victim_loss"], 0);
}
