#include <sstream>

#include <gtest/gtest.h>

#include "brick/world.hpp"

using namespace brick;

namespace {

RunReport run(const std::string& name, std::uint64_t seed = 1) {
  auto cfg = scenario_preset(name, seed);
  EXPECT_TRUE(cfg);
  auto r = run_scenario(*cfg);
  EXPECT_TRUE(r) << name;
  return *r;
}

std::uint32_t warden_node(std::size_t i) { return static_cast<std::uint32_t>(2 + i); }

}  // namespace

TEST(World, EveryBrickPresetClosesSafely) {
  for (const auto& name : scenario_names()) {
    if (name == "baseline-censorship") continue;
    auto r = run(name);
    EXPECT_EQ(r.final_phase, "Closed") << name;
    EXPECT_TRUE(r.safety_ok) << name << ": " << r.safety_reason;
    EXPECT_TRUE(r.liveness_ok) << name;
    EXPECT_TRUE(r.violations.empty()) << name;
    ASSERT_TRUE(r.closing_seq) << name;
    EXPECT_GE(*r.closing_seq, r.ack_quorum_seq) << name;
    EXPECT_EQ(r.exit_code(), 0) << name;
  }
}

TEST(World, HonestFlowOptimisticPayouts) {
  auto r = run("honest-flow");
  EXPECT_EQ(r.close_kind, "optimistic");
  EXPECT_EQ(r.closing_seq, 4u);
  EXPECT_EQ(r.payouts.at("A"), 42u);
  EXPECT_EQ(r.payouts.at("B"), 40u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(r.payouts.at("W" + std::to_string(i)), 4u);
}

TEST(World, ByzantineMinoritySlashedExactly) {
  auto r = run("byzantine-f");
  EXPECT_EQ(r.close_kind, "pessimistic");
  EXPECT_EQ(r.closing_seq, r.freshest_committed);
  auto eq = r.equivocators;
  auto sl = r.slashed;
  std::sort(eq.begin(), eq.end());
  std::sort(sl.begin(), sl.end());
  EXPECT_EQ(eq, (std::vector<std::string>{"W0", "W1", "W2"}));
  EXPECT_EQ(sl, eq);
  for (const auto& w : sl) EXPECT_EQ(r.payouts.count(w), 0u);
}

TEST(World, CrashedPartyClosesAtLastCommitted) {
  auto r = run("crash-party");
  EXPECT_EQ(r.closing_seq, 3u);
  EXPECT_EQ(r.payouts.at("A"), 10u);
  EXPECT_EQ(r.payouts.at("B"), 2u);
}

TEST(World, SameSeedSameTrace) {
  auto cfg = *scenario_preset("byzantine-f", 11);
  auto x = *run_scenario(cfg);
  auto y = *run_scenario(cfg);
  EXPECT_EQ(x.trace_digest, y.trace_digest);
  EXPECT_EQ(x.trace_events, y.trace_events);
  EXPECT_EQ(x.to_json().dump(), y.to_json().dump());
  cfg.seed = 12;
  EXPECT_NE(run_scenario(cfg)->trace_digest, x.trace_digest);
}

TEST(World, TraceStreamMatchesEventCount) {
  auto cfg = *scenario_preset("honest-flow");
  std::ostringstream out;
  auto r = run_scenario(cfg, &out);
  ASSERT_TRUE(r);
  auto text = out.str();
  EXPECT_EQ(static_cast<std::uint64_t>(std::count(text.begin(), text.end(), '\n')), r->trace_events);
}

TEST(World, ReportJsonFields) {
  auto j = run("fee-reconciliation").to_json();
  for (const char* key : {"ack_quorum_seq", "freshest_committed_seq", "closing_seq", "close_kind", "safety_ok",
                          "safety_reason", "payouts", "slashed", "equivocators", "fee_reconciliation",
                          "diagnostics", "exit_code"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["exit_code"], 0);
  auto b = run("baseline-censorship").to_json();
  EXPECT_TRUE(b.contains("baseline"));
  EXPECT_TRUE(b["paired"].is_object());
}

TEST(World, BaselineUnsafetyDoesNotFailExitCode) {
  auto r = run("baseline-censorship");
  EXPECT_FALSE(r.safety_ok);
  EXPECT_EQ(r.exit_code(), 0);
}

TEST(World, InvalidConfigRejected) {
  auto cfg = *scenario_preset("honest-flow");
  cfg.n = 7;
  auto w = World::create(cfg);
  ASSERT_FALSE(w);
  EXPECT_EQ(w.error().code, Errc::ConfigInvalid);
}

TEST(World, SixAcksLeaveStateUncommitted) {
  auto cfg = *scenario_preset("unilateral-close");
  cfg.workload = {2};
  auto created = World::create(cfg);
  ASSERT_TRUE(created);
  auto w = std::move(created).value();
  for (std::size_t i = 0; i < 4; ++i) w->network().set_down(warden_node(i), true);
  w->start();
  w->run_until(from_ms(1500));
  EXPECT_EQ(w->party(Role::A).latest_valid(), 2u);
  EXPECT_EQ(w->party(Role::A).ack_count(2), 6u);
  EXPECT_EQ(w->party(Role::A).committed(), 1u);
  EXPECT_EQ(w->party(Role::B).committed(), 1u);
  EXPECT_EQ(w->ack_quorum_seq(), 1u);

  // Once the wardens return the retransmitted announcement completes the
  // quorum and the close lands on it.
  for (std::size_t i = 0; i < 4; ++i) w->network().set_down(warden_node(i), false);
  w->run_until(from_ms(cfg.limit_s * 1000));
  auto r = w->report();
  EXPECT_TRUE(r.safety_ok) << r.safety_reason;
  EXPECT_EQ(r.ack_quorum_seq, 2u);
  EXPECT_EQ(r.closing_seq, 2u);
}
