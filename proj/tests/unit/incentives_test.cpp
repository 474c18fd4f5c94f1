#include <gtest/gtest.h>

#include "brick/incentives.hpp"
#include "brick/world.hpp"

using namespace brick;

TEST(Incentives, PayoffClosedForm) {
  GameParams p{12, 3, 5, 1};
  EXPECT_EQ(p.collateral(), 4);
  EXPECT_EQ(payoff(p, 0, 0), 5);
  EXPECT_EQ(payoff(p, 3, 0), 17);
  EXPECT_EQ(payoff(p, 4, 1), 16);
  EXPECT_LE(payoff(p, 4, 1), p.c_a + p.v - p.epsilon);
}

TEST(Incentives, FraudulentClosePayoff) {
  GameParams p{12, 3, 0, 1};
  EXPECT_EQ(fraudulent_close_payoff(p, 0, 0), 7);
  EXPECT_EQ(fraudulent_close_payoff(p, 3, 2), 2);
}

// Maxima from tests/oracle/oracle.py.
TEST(Incentives, FraudulentCloseBoundScan) {
  struct Case {
    GameParams p;
    std::int64_t max;
  };
  for (const auto& c : {Case{{12, 3, 0, 1}, 7}, Case{{100, 3, 0, 1}, 65}, Case{{200, 5, 0, 2}, 158}}) {
    std::int64_t best = fraudulent_close_payoff(c.p, 0, 0);
    for (std::int64_t m = 0; m <= c.p.f; ++m) {
      for (std::int64_t y = 0; y <= c.p.n(); ++y) best = std::max(best, fraudulent_close_payoff(c.p, m, y));
    }
    EXPECT_EQ(best, c.max);
    EXPECT_LE(best, c.p.v - c.p.collateral() - c.p.epsilon);
  }
}

TEST(Incentives, BestResponseIsHonestProofSubmission) {
  struct Case {
    GameParams p;
    std::int64_t expected;
  };
  for (const auto& c : {Case{{12, 3, 0, 1}, 12}, Case{{100, 3, 50, 1}, 150}, Case{{12, 3, 12, 1}, 24}}) {
    auto br = best_response(c.p);
    EXPECT_EQ(br.best.strategy, 2);
    EXPECT_TRUE(br.best.integral());
    EXPECT_EQ(br.best.payoff(), c.expected);
    EXPECT_GT(br.profiles, 0u);
    for (const auto& [strategy, scaled] : br.per_strategy) {
      EXPECT_LE(scaled, br.best.scaled_payoff) << strategy;
    }
  }
}

TEST(Incentives, EvaluateClassifiesProfiles) {
  GameParams p{12, 3, 5, 1};
  EXPECT_EQ(evaluate(p, CollateralModel::Configured, 0, 0, 0, 0, 0).strategy, 1);
  EXPECT_EQ(evaluate(p, CollateralModel::Configured, 3, 0, 0, 0, 0).strategy, 2);
  EXPECT_EQ(evaluate(p, CollateralModel::Configured, 3, 0, 1, 1, 0).strategy, 3);
  auto stale = evaluate(p, CollateralModel::Configured, 0, 3, 1, 0, 1);
  EXPECT_EQ(stale.strategy, 4);
  EXPECT_TRUE(stale.stale_close);
  EXPECT_EQ(stale.payoff(), 12 - 5);
  auto exact = evaluate(p, CollateralModel::Exact, 3, 0, 0, 0, 0);
  EXPECT_EQ(exact.scale, 3);
  EXPECT_EQ(exact.payoff(), 17);
}

TEST(Incentives, HostageFeasibility) {
  EXPECT_FALSE(hostage_feasible(10));
  EXPECT_TRUE(hostage_feasible(7));
  EXPECT_TRUE(hostage_feasible(4));
  EXPECT_FALSE(hostage_feasible(151));
}

TEST(Incentives, GridDominance) {
  auto grid = dominance_grid();
  EXPECT_EQ(grid.size(), 20u * 3u * 3u * 2u);
  auto rows = scan_grid(grid);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.dominance_ok) << r.params.v << "/" << r.params.f << "/" << r.params.c_a;
    EXPECT_TRUE(r.fraud_bound_ok) << r.params.v << "/" << r.params.f;
  }
  auto j = grid_to_json(rows);
  EXPECT_FALSE(j.empty());
}

TEST(Incentives, ParamsValidation) {
  EXPECT_TRUE(GameParams({12, 3, 5, 1}).validate());
  EXPECT_EQ(GameParams({12, 0, 5, 1}).validate().code(), Errc::ConfigInvalid);
  EXPECT_EQ(GameParams({12, 3, 13, 1}).validate().code(), Errc::ConfigInvalid);
}

namespace {

// Net income of warden `idx` over a finished run: everything the contract
// pays or owes it, plus update fees, minus the collateral it locked.
std::int64_t warden_income(World& w, std::size_t idx) {
  const auto& pk = w.warden(idx).public_key();
  const auto& c = w.contract();
  std::int64_t in = 0;
  if (auto it = c.payouts().find(pk); it != c.payouts().end()) in += static_cast<std::int64_t>(it->second);
  if (auto it = c.redeemable().find(pk); it != c.redeemable().end()) in += static_cast<std::int64_t>(it->second);
  in += static_cast<std::int64_t>(w.warden(idx).fee_income());
  in += static_cast<std::int64_t>(w.warden(idx).bribes_taken());
  return in - static_cast<std::int64_t>(c.collateral());
}

std::int64_t income_in_run(ScenarioConfig cfg, std::size_t idx) {
  auto world = World::create(cfg);
  EXPECT_TRUE(world.ok()) << world.error().message();
  auto rep = (*world)->run();
  EXPECT_TRUE(rep.safety_ok) << rep.safety_reason;
  return warden_income(**world, idx);
}

}  // namespace

TEST(Incentives, DeviantWardensEarnLessThanHonest) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto base = *scenario_preset("unilateral-close", seed);
    for (std::string tag : {"unresponsive", "ack-without-store", "crash:4"}) {
      for (std::size_t idx : {0u, 5u}) {
        auto honest = base;
        auto deviant = base;
        deviant.wardens.assign(10, "honest");
        deviant.wardens[idx] = tag;
        EXPECT_LT(income_in_run(deviant, idx), income_in_run(honest, idx)) << tag << " seed " << seed;
      }
    }
    // A warden that takes a stale-close bribe of at most the collateral.
    auto honest = *scenario_preset("unilateral-close", seed);
    honest.party_a = "stale-close-briber:4";
    auto bribed = honest;
    bribed.wardens = {"bribed-old-claim:0"};
    EXPECT_LT(income_in_run(bribed, 0), income_in_run(honest, 0)) << "bribed seed " << seed;
  }
}

TEST(Incentives, SettlementAuditReconcilesHonestRun) {
  auto cfg = *scenario_preset("fee-reconciliation", 2);
  auto world = World::create(cfg);
  ASSERT_TRUE(world.ok());
  auto rep = (*world)->run();
  ASSERT_TRUE(rep.settlement.has_value());
  const auto& s = *rep.settlement;
  EXPECT_TRUE(s.ok());
  // Three updates, both parties pay every one of ten wardens.
  EXPECT_EQ(s.update_fees, 3u * 2u * 10u);
  EXPECT_EQ(s.closing_fee_to_wardens, 70u);
  EXPECT_EQ(s.deposits, s.payouts + s.outstanding);
}

TEST(Incentives, SettlementAuditOptimisticRefund) {
  auto world = World::create(*scenario_preset("honest-flow", 1));
  ASSERT_TRUE(world.ok());
  auto rep = (*world)->run();
  ASSERT_TRUE(rep.settlement.has_value());
  EXPECT_EQ(rep.settlement->closing_fee_refunded, 70u);
  EXPECT_EQ(rep.settlement->closing_fee_to_wardens, 0u);
  EXPECT_EQ(rep.settlement->deposits, rep.settlement->payouts);
}
