#include "brick/incentives.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace brick {

Status GameParams::validate() const {
  if (f < 1) return Error{Errc::ConfigInvalid, "f must be positive"};
  if (v < 0 || epsilon < 0 || c_a < 0) return Error{Errc::ConfigInvalid, "negative parameter"};
  if (c_a > v) return Error{Errc::ConfigInvalid, "c_A exceeds v"};
  return {};
}

std::int64_t payoff(const GameParams& p, std::int64_t x, std::int64_t b) {
  std::int64_t coll = p.collateral();
  return p.c_a + x * coll - b * (coll + p.epsilon);
}

std::int64_t fraudulent_close_payoff(const GameParams& p, std::int64_t m, std::int64_t y) {
  std::int64_t coll = p.collateral();
  return p.v + (m + y) * coll - (y + m + 1) * (coll + p.epsilon);
}

Outcome evaluate(const GameParams& p, CollateralModel model, std::int64_t m, std::int64_t s,
                 std::int64_t b, std::int64_t y, std::int64_t z) {
  Outcome o{};
  o.m = m;
  o.s = s;
  o.b = b;
  o.y = y;
  o.z = z;
  o.scale = model == CollateralModel::Exact ? p.f : 1;
  // Everything below is in units of 1/scale coins.
  std::int64_t coll = model == CollateralModel::Exact ? p.v : p.collateral();
  std::int64_t eps = p.epsilon * o.scale;
  std::int64_t bribes = b * (coll + eps);
  std::int64_t proofs = m + y;
  std::int64_t stale_claims = s + z;

  // Wardens that have not seen the freshest state may number f, so a stale
  // close needs f+1 claims below it.
  o.stale_close = stale_claims >= p.f + 1;
  if (proofs >= p.f + 1) {
    // The counterparty takes the whole balance; the submitter keeps only the
    // slashed collateral.
    o.scaled_payoff = proofs * coll - bribes;
  } else if (o.stale_close) {
    // Best case for the briber: the stale state gives it everything.
    o.scaled_payoff = p.v * o.scale + proofs * coll - bribes;
  } else {
    o.scaled_payoff = p.c_a * o.scale + proofs * coll - bribes;
  }
  if (o.stale_close) {
    o.strategy = 4;
  } else if (b > 0) {
    o.strategy = 3;
  } else if (proofs > 0) {
    o.strategy = 2;
  } else {
    o.strategy = 1;
  }
  return o;
}

BestResponse best_response(const GameParams& p, CollateralModel model) {
  BestResponse r;
  bool first = true;
  std::int64_t rational = p.t();
  for (std::int64_t m = 0; m <= p.f; ++m) {
    for (std::int64_t s = 0; s + m <= p.f; ++s) {
      for (std::int64_t b = 0; b <= rational; ++b) {
        for (std::int64_t y = 0; y <= b; ++y) {
          for (std::int64_t z = 0; y + z <= b; ++z) {
            Outcome o = evaluate(p, model, m, s, b, y, z);
            ++r.profiles;
            auto [it, fresh] = r.per_strategy.try_emplace(o.strategy, o.scaled_payoff);
            if (!fresh) it->second = std::max(it->second, o.scaled_payoff);
            // Ties go to the cheaper profile, which enumeration order visits first.
            if (first || o.scaled_payoff > r.best.scaled_payoff) {
              r.best = o;
              first = false;
            }
          }
        }
      }
    }
  }
  return r;
}

bool hostage_feasible(std::int64_t n) {
  std::int64_t f = (n - 1) / 3;
  // v/2 > v/f exactly when f > 2, independent of v.
  return f <= 2;
}

std::vector<GameParams> dominance_grid() {
  std::vector<GameParams> grid;
  for (std::int64_t v = 10; v <= 200; v += 10) {
    for (std::int64_t f : {3, 4, 5}) {
      for (std::int64_t c : {std::int64_t{0}, v / 2, v}) {
        for (std::int64_t eps : {1, 2}) grid.push_back(GameParams{v, f, c, eps});
      }
    }
  }
  return grid;
}

std::vector<GridRow> scan_grid(const std::vector<GameParams>& grid) {
  std::vector<GridRow> rows;
  rows.reserve(grid.size());
  for (const auto& p : grid) {
    GridRow row;
    row.params = p;
    row.exact = best_response(p, CollateralModel::Exact);
    row.configured = best_response(p, CollateralModel::Configured);
    row.max_fraud = fraudulent_close_payoff(p, 0, 0);
    for (std::int64_t m = 0; m <= p.f; ++m) {
      for (std::int64_t y = 0; y <= p.n(); ++y) {
        row.max_fraud = std::max(row.max_fraud, fraudulent_close_payoff(p, m, y));
      }
    }
    const auto& ex = row.exact.best;
    const auto& cf = row.configured.best;
    row.dominance_ok = ex.strategy == 2 && ex.integral() && ex.payoff() == p.c_a + p.v &&
                       cf.strategy == 2 && cf.payoff() == payoff(p, p.f, 0);
    std::int64_t bound = p.v - p.collateral() - p.epsilon;
    auto stale = row.configured.per_strategy.find(4);
    row.fraud_bound_ok =
        row.max_fraud <= bound && (stale == row.configured.per_strategy.end() || stale->second <= bound);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json grid_to_json(const std::vector<GridRow>& rows) {
  nlohmann::json table;
  table["columns"] = {"v",           "f",          "c_a",       "epsilon",   "collateral",
                      "best",        "payoff",     "configured_best", "configured_payoff",
                      "max_fraud",   "fraud_bound", "ok"};
  table["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& p = r.params;
    table["rows"].push_back({p.v, p.f, p.c_a, p.epsilon, p.collateral(), r.exact.best.strategy,
                             r.exact.best.payoff(), r.configured.best.strategy,
                             r.configured.best.payoff(), r.max_fraud,
                             p.v - p.collateral() - p.epsilon, r.dominance_ok && r.fraud_bound_ok});
  }
  return table;
}

// ---------------------------------------------------------------------------

Status SettlementReport::status() const {
  if (mismatches.empty()) return {};
  return Error{Errc::ReconciliationMismatch, mismatches.front()};
}

nlohmann::json SettlementReport::to_json() const {
  return {{"deposits", deposits},
          {"payouts", payouts},
          {"outstanding", outstanding},
          {"update_fees", update_fees},
          {"closing_fee_to_wardens", closing_fee_to_wardens},
          {"closing_fee_refunded", closing_fee_refunded},
          {"closing_fee_to_submitter", closing_fee_to_submitter},
          {"slashed", slashed},
          {"ok", ok()},
          {"mismatches", mismatches}};
}

namespace {

Coins lookup(const std::map<PublicKey, Coins>& m, const PublicKey& k) {
  auto it = m.find(k);
  return it == m.end() ? 0 : it->second;
}

}  // namespace

SettlementReport settlement_audit(const BrickContract& contract, const std::vector<FeeFlow>& fees,
                                  Coins update_fee) {
  SettlementReport r;
  auto complain = [&r](std::string s) { r.mismatches.push_back(std::move(s)); };

  for (const auto& flow : fees) {
    r.update_fees += flow.received;
    if (flow.received > flow.issued) {
      complain(fmt::format("warden {} holds {} but only {} was issued", flow.warden.hex().substr(0, 8),
                           flow.received, flow.issued));
    }
    if (flow.received != flow.paid_updates * update_fee) {
      complain(fmt::format("warden {} holds {} for {} updates", flow.warden.hex().substr(0, 8),
                           flow.received, flow.paid_updates));
    }
  }

  r.deposits = contract.total_deposits();
  r.payouts = contract.total_payouts();
  r.outstanding = contract.total_outstanding();
  const bool terminal = contract.phase() == Phase::Closed || contract.phase() == Phase::Cancelled;
  if (terminal && r.deposits != r.payouts + r.outstanding) {
    complain(fmt::format("deposits {} != payouts {} + outstanding {}", r.deposits, r.payouts,
                         r.outstanding));
  }

  const auto& params = contract.params();
  const auto& pay = contract.payouts();
  const auto& red = contract.redeemable();
  Coins fee = params.closing_fee;
  Coins coll = contract.collateral();
  Phase phase = contract.phase();

  if (phase == Phase::Cancelled) {
    for (const auto& [who, amount] : pay) {
      if (amount != lookup(contract.deposits(), who)) {
        complain(fmt::format("cancelled refund to {} is {}", who.hex().substr(0, 8), amount));
      }
    }
    return r;
  }
  if (phase != Phase::Closed) return r;

  Coins v = contract.v();
  Coins expected_deposits = v + fee + contract.n() * coll;
  if (r.deposits != expected_deposits) {
    complain(fmt::format("deposits {} != v + F + n*coll = {}", r.deposits, expected_deposits));
  }
  Coins party_total = lookup(pay, params.parties.a) + lookup(pay, params.parties.b);
  r.slashed = contract.slashed().size() * coll;

  std::map<PublicKey, Coins> warden_due;
  std::set<PublicKey> wardens;
  for (const auto& [who, amount] : contract.deposits()) {
    if (who != params.parties.a && who != params.parties.b) wardens.insert(who);
  }
  for (const auto& w : wardens) warden_due[w] = contract.slashed().count(w) ? 0 : coll;

  Coins party_expected = 0;
  switch (contract.close_kind()) {
    case CloseKind::Optimistic:
      r.closing_fee_refunded = fee;
      party_expected = v + fee;
      if (lookup(pay, params.parties.a) !=
          contract.optimistic_claim() + fee_share(fee, Role::A)) {
        complain("optimistic payout to A does not match the claim");
      }
      break;
    case CloseKind::FraudMajority:
      party_expected = v + fee + r.slashed;
      break;
    case CloseKind::Pessimistic: {
      Coins share = fee / contract.t();
      std::uint64_t ranked = 0;
      for (const auto& c : contract.claims()) {
        if (contract.slashed().count(c.warden) || ranked == contract.t()) continue;
        warden_due[c.warden] += share;
        ++ranked;
      }
      r.closing_fee_to_wardens = share * ranked;
      r.closing_fee_to_submitter = fee - share * contract.t();
      party_expected = v + r.closing_fee_to_submitter + r.slashed;
      if (ranked != contract.t()) complain(fmt::format("only {} fee-earning claims", ranked));
      break;
    }
    case CloseKind::None:
      complain("closed without a close kind");
      break;
  }
  if (party_total != party_expected) {
    complain(fmt::format("parties received {} but {} was due", party_total, party_expected));
  }
  for (const auto& [w, due] : warden_due) {
    Coins got = lookup(pay, w) + lookup(red, w);
    if (got != due) {
      complain(fmt::format("warden {} settled {} but {} was due", w.hex().substr(0, 8), got, due));
    }
  }
  return r;
}

}  // namespace brick
