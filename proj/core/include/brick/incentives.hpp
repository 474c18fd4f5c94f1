#pragma once

// Payoff model of a cheating party that bribes wardens, evaluated both in
// closed form and by brute force over the discrete action space, plus the
// coin-level settlement audit of a finished run.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brick/ledger.hpp"

namespace brick {

struct GameParams {
  std::int64_t v = 12;
  std::int64_t f = 3;
  /// Briber's balance in the freshest committed state.
  std::int64_t c_a = 0;
  std::int64_t epsilon = 1;

  std::int64_t n() const { return 3 * f + 1; }
  std::int64_t t() const { return 2 * f + 1; }
  std::int64_t collateral() const { return (v + f - 1) / f; }
  Status validate() const;
};

/// p_A = c_A + x*coll - b*(coll + eps), coll = ceil(v/f).
std::int64_t payoff(const GameParams& p, std::int64_t x, std::int64_t b);

/// Upper bound for closing in a stale state with m Byzantine and y bribed
/// proofs: v + (m+y)*coll - (y+m+1)*(coll + eps).
std::int64_t fraudulent_close_payoff(const GameParams& p, std::int64_t m, std::int64_t y);

/// How the per-warden collateral is valued when searching the action space.
enum class CollateralModel : std::uint8_t {
  /// Exactly v/f. Payoffs are tracked scaled by f so they stay integral.
  Exact,
  /// The contract's ceil(v/f).
  Configured,
};

/// One point of the party's action space.
struct Outcome {
  int strategy = 1;
  std::int64_t m = 0;  // Byzantine proofs submitted
  std::int64_t s = 0;  // Byzantine stale claims
  std::int64_t b = 0;  // rational wardens bribed
  std::int64_t y = 0;  // bribed wardens handing over a proof
  std::int64_t z = 0;  // bribed wardens claiming stale
  bool stale_close = false;
  /// Payoff times `scale`.
  std::int64_t scaled_payoff = 0;
  std::int64_t scale = 1;

  /// Exact payoff; only meaningful when scaled_payoff divides evenly.
  std::int64_t payoff() const { return scaled_payoff / scale; }
  bool integral() const { return scaled_payoff % scale == 0; }
};

/// Evaluates a single action profile without using the closed forms.
Outcome evaluate(const GameParams& p, CollateralModel model, std::int64_t m, std::int64_t s,
                 std::int64_t b, std::int64_t y, std::int64_t z);

struct BestResponse {
  Outcome best;
  /// Best payoff reached within each strategy class 1..4 (scaled).
  std::map<int, std::int64_t> per_strategy;
  std::uint64_t profiles = 0;
};

BestResponse best_response(const GameParams& p, CollateralModel model = CollateralModel::Exact);

/// Whether colluders can credibly hold the richest party's funds hostage:
/// true iff v/2 <= v/f, i.e. f <= 2.
bool hostage_feasible(std::int64_t n);

/// Grid from the dominance property: v in 10..200 step 10, f in {3,4,5},
/// c_A in {0, v/2, v}, eps in {1,2}.
std::vector<GameParams> dominance_grid();

struct GridRow {
  GameParams params;
  BestResponse exact;
  BestResponse configured;
  /// Largest fraudulent_close_payoff over m in [0,f], y in [0,n].
  std::int64_t max_fraud = 0;
  bool dominance_ok = false;
  bool fraud_bound_ok = false;
};

std::vector<GridRow> scan_grid(const std::vector<GameParams>& grid);
nlohmann::json grid_to_json(const std::vector<GridRow>& rows);

// ---------------------------------------------------------------------------
// Settlement audit

struct FeeFlow {
  PublicKey payer;
  PublicKey warden;
  /// Cumulative amount the payer signed over to the warden.
  Coins issued = 0;
  /// Highest ticket the warden holds.
  Coins received = 0;
  /// Distinct sequence numbers the warden was paid for by this payer.
  std::uint64_t paid_updates = 0;
};

struct SettlementReport {
  Coins deposits = 0;
  Coins payouts = 0;
  Coins outstanding = 0;
  Coins update_fees = 0;
  Coins closing_fee_to_wardens = 0;
  Coins closing_fee_refunded = 0;
  Coins closing_fee_to_submitter = 0;
  Coins slashed = 0;
  std::vector<std::string> mismatches;

  bool ok() const { return mismatches.empty(); }
  /// ReconciliationMismatch carrying the first complaint, if any.
  Status status() const;
  nlohmann::json to_json() const;
};

/// Reconciles every coin of a terminal contract plus the off-chain fee
/// tickets.
SettlementReport settlement_audit(const BrickContract& contract,
                                  const std::vector<FeeFlow>& fees, Coins update_fee);

}  // namespace brick
