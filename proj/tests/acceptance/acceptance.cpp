// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "brick/battery.hpp"
#include "brick/bench.hpp"
#include "brick/incentives.hpp"
#include "brick/world.hpp"

using namespace brick;

namespace {

constexpr std::uint64_t kSeeds = 1000;

int failures = 0;
std::map<int, std::string> lines;

void verdict(int id, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  lines[id] = fmt::format("{} {} {}: {}", ok ? "PASS" : "FAIL", id, name, detail);
}

std::string first_failure(const BatterySummary& s) {
  if (s.failures.empty()) return "";
  const auto& f = s.failures.front();
  return fmt::format("; first failure {} seed {}: {}", f.case_name, f.seed, f.reason);
}

// Slashing facts that must hold for any run in which some warden signed an
// ack above the seq it later claimed.
std::string check_slashing(const ScenarioConfig& cfg, const RunReport& r) {
  std::set<std::string> eq(r.equivocators.begin(), r.equivocators.end());
  std::set<std::string> sl(r.slashed.begin(), r.slashed.end());
  if (eq != sl) return fmt::format("equivocators {} slashed {}", eq, sl);
  if (r.proofs_used != eq.size()) return fmt::format("{} equivocators, {} proofs", eq.size(), r.proofs_used);
  for (const auto& w : sl) {
    if (r.payouts.count(w)) return w + " slashed but paid";
  }
  const Coins v = cfg.v();
  const Coins coll = collateral_for(v, cfg.f());
  const Coins fee = cfg.closing_fee;
  const Coins k = sl.size();
  const Coins a = r.payouts.count("A") ? r.payouts.at("A") : 0;
  const Coins b = r.payouts.count("B") ? r.payouts.at("B") : 0;
  if (r.close_kind == "pessimistic") {
    if (a + b != v + k * coll + fee % cfg.threshold()) {
      return fmt::format("parties received {} + {}, expected v + {}*{} + {}", a, b, k, coll, fee % cfg.threshold());
    }
  } else if (r.close_kind == "fraud-majority") {
    std::multiset<Coins> got{a, b};
    if (got != std::multiset<Coins>{v + fee, k * coll}) {
      return fmt::format("fraud majority paid {} and {}, expected {} and {}", a, b, v + fee, k * coll);
    }
  }
  return {};
}

void safety_and_slashing() {
  auto cases = *battery_cases("safety");
  std::uint64_t runs = 0;
  std::uint64_t pessimistic = 0;
  std::uint64_t with_fraud = 0;
  std::vector<std::string> safety_fail;
  std::vector<std::string> slash_fail;
  for (const auto& c : cases) {
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      auto cfg = c.make(seed);
      auto r = run_scenario(cfg);
      ++runs;
      if (!r) {
        safety_fail.push_back(fmt::format("{} seed {}: {}", c.name, seed, r.error().message()));
        continue;
      }
      std::string why = c.check(*r);
      if (why.empty() && r->close_kind == "pessimistic") {
        ++pessimistic;
        if (r->closing_seq != r->freshest_committed) why = "closing seq differs from freshest committed";
      }
      if (!why.empty()) safety_fail.push_back(fmt::format("{} seed {}: {}", c.name, seed, why));
      if (!r->equivocators.empty()) {
        ++with_fraud;
        if (auto s = check_slashing(cfg, *r); !s.empty()) {
          slash_fail.push_back(fmt::format("{} seed {}: {}", c.name, seed, s));
        }
      }
    }
  }
  verdict(1, "safety-battery", safety_fail.empty(),
          fmt::format("{} runs over {} cases x {} seeds, {} pessimistic closes at the freshest committed seq, "
                      "{} violations{}",
                      runs, cases.size(), kSeeds, pessimistic, safety_fail.size(),
                      safety_fail.empty() ? "" : "; first " + safety_fail.front()));

  // Beyond the fault bound: f+1 bribed wardens force the majority branch.
  std::uint64_t majority_runs = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto cfg = *scenario_preset("byzantine-f", seed);
    cfg.wardens.assign(cfg.f() + 1, "bribed-old-claim:0");
    auto r = run_scenario(cfg);
    if (!r) {
      slash_fail.push_back(fmt::format("majority seed {}: {}", seed, r.error().message()));
      continue;
    }
    ++majority_runs;
    if (r->close_kind != "fraud-majority") {
      slash_fail.push_back(fmt::format("majority seed {}: closed {}", seed, r->close_kind));
    } else if (r->equivocators.size() != cfg.f() + 1) {
      slash_fail.push_back(fmt::format("majority seed {}: {} equivocators", seed, r->equivocators.size()));
    } else if (auto s = check_slashing(cfg, *r); !s.empty()) {
      slash_fail.push_back(fmt::format("majority seed {}: {}", seed, s));
    }
  }
  verdict(7, "slashing-completeness", slash_fail.empty() && with_fraud > 0,
          fmt::format("{} battery runs with fraud signatures, each proven and slashed {} per warden; "
                      "{} runs with f+1 frauds awarding v+F to the counterparty; {} violations{}",
                      with_fraud, collateral_for(12, 3), majority_runs, slash_fail.size(),
                      slash_fail.empty() ? "" : "; first " + slash_fail.front()));
}

void battery_criterion(int id, const std::string& name, const std::string& suite, const std::string& what) {
  auto s = run_battery(suite, kSeeds);
  if (!s) {
    verdict(id, name, false, s.error().message());
    return;
  }
  verdict(id, name, s->ok(),
          fmt::format("{} runs over {} seeds {}, {} failures{}", s->runs, s->seeds, what, s->failures.size(),
                      first_failure(*s)));
}

void incentives() {
  auto rows = scan_grid(dominance_grid());
  std::size_t bad = 0;
  std::size_t at_bound = 0;
  std::string first;
  for (const auto& r : rows) {
    const auto& p = r.params;
    const auto& best = r.exact.best;
    const std::int64_t bound = p.v - p.collateral() - p.epsilon;
    bool ok = best.strategy == 2 && best.integral() && best.payoff() == p.c_a + p.v && r.max_fraud <= bound;
    if (r.max_fraud == bound) ++at_bound;
    if (!ok && ++bad == 1) {
      first = fmt::format("; first v={} f={} c_A={} eps={}: strategy {} payoff {} max fraud {} bound {}", p.v, p.f,
                          p.c_a, p.epsilon, best.strategy, best.payoff(), r.max_fraud, bound);
    }
  }
  verdict(4, "incentive-oracle", bad == 0 && !rows.empty(),
          fmt::format("{} grid points, best response strategy 2 with payoff c_A + v at all; fraudulent close "
                      "within v - ceil(v/f) - eps everywhere ({} at the bound); {} mismatches{}",
                      rows.size(), at_bound, bad, first));
}

void latency() {
  const double rtt = 100;
  const SimTime stagger = calibrate_stagger(151, rtt, reference_latency_ms(151));
  auto rows = bench_table({7, 34, 151}, rtt, stagger);
  bool ok = true;
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    ok = ok && std::abs(r.deviation) <= 0.20;
    if (i > 0) ok = ok && r.commit_ms > rows[i - 1].commit_ms;
    parts.push_back(fmt::format("n={} {:.1f} ms vs {:.1f} ({:+.1f}%)", r.n, r.commit_ms, r.reference_ms,
                                100 * r.deviation));
  }
  verdict(5, "broadcast-latency", ok,
          fmt::format("stagger {} us; {}; monotone in n", stagger, fmt::join(parts, ", ")));
}

// Hand-built channel: seq 2 is both-signed but acknowledged by t-1 wardens,
// and the contract closes at seq 1.
std::string contract_prior_close() {
  const std::uint64_t n = 10;
  const std::uint64_t t = 7;
  KeyPair a = keygen(derive_seed(808, "party", 0));
  KeyPair b = keygen(derive_seed(808, "party", 1));
  std::vector<KeyPair> w;
  for (std::uint64_t i = 0; i < n; ++i) w.push_back(keygen(derive_seed(808, "warden", i)));
  ChannelId ch;
  ch.bytes = hash(derive_seed(808, "channel", 0).view()).bytes;

  ContractParams cp;
  cp.channel = ch;
  cp.parties = {a.public_key(), b.public_key()};
  for (const auto& k : w) cp.warden_hashes.push_back(hash(k.public_key().view()));
  cp.t = t;
  cp.closing_fee = 70;
  auto contract = BrickContract::deploy(cp);
  if (!contract) return "deploy: " + contract.error().message();
  auto& c = **contract;
  if (!c.fund_party(a.public_key(), 6) || !c.fund_party(b.public_key(), 6)) return "funding failed";
  for (const auto& k : w) {
    if (!c.fund_warden(k.public_key(), c.collateral())) return "warden funding failed";
  }
  if (!c.open(a.public_key())) return "open failed";

  std::mt19937_64 rng(808);
  ChannelState s1{1, 6, 6, draw_salt(rng)};
  ChannelState s2{2, 9, 3, draw_salt(rng)};
  auto c1 = make_commitment(ch, s1, 12, 0, a, b);
  auto c2 = make_commitment(ch, s2, 12, 1, a, b);
  if (!c1 || !c2) return "commitment failed";
  auto a1 = make_announcement(*c1, a, b);
  auto a2 = make_announcement(*c2, a, b);
  if (!a1 || !a2) return "announcement failed";

  // Acks for seq 2 from t-1 wardens do not commit it.
  std::set<PublicKey> acked;
  for (std::uint64_t i = n - (t - 1); i < n; ++i) {
    auto ack = make_ack(*a2, w[i]);
    if (verify_ack(ack)) acked.insert(ack.warden);
  }
  if (acked.size() != t - 1) return "expected t-1 valid acks";

  // Wardens that never saw seq 2 hold seq 1; their t claims close there.
  for (std::uint64_t i = 0; i < t; ++i) {
    ClosingClaim cl;
    cl.warden = w[i].public_key();
    cl.seq = 1;
    cl.warden_sig = sign(w[i], close_plaintext(ch, 1, std::nullopt));
    cl.sig_a = a1->sig_a;
    cl.sig_b = a1->sig_b;
    if (auto s = c.record_closing_claim(w[i].public_key(), cl, 10); !s) return "claim: " + s.error().message();
  }
  call::PessimisticClose pc;
  pc.state = s1;
  pc.sig_a = *c1->sig_a;
  pc.sig_b = *c1->sig_b;
  auto out = c.pessimistic_close(a.public_key(), pc);
  if (!out) return "close: " + out.error().message();
  if (out->closing_seq != 1) return fmt::format("closed at {}", out->closing_seq);

  SafetyFacts facts;
  facts.closed = true;
  facts.kind = CloseKind::Pessimistic;
  facts.closing_seq = 1;
  facts.ack_quorum_seq = acked.size() >= t ? 2 : 1;
  facts.payouts_cover_state = c.payouts().at(a.public_key()) >= s1.balance_a &&
                              c.payouts().at(b.public_key()) >= s1.balance_b;
  auto v = judge_safety(facts);
  if (!v.ok) return "judged unsafe: " + v.reason;
  // The same close is unsafe once seq 2 reaches t acks.
  facts.ack_quorum_seq = 2;
  if (judge_safety(facts).ok) return "a close below a t-ack state was judged safe";
  return {};
}

void threshold_boundary() {
  std::vector<std::string> errs;

  // World: four wardens are unreachable while seq 2 is broadcast.
  auto cfg = *scenario_preset("unilateral-close", 1);
  cfg.workload = {2};
  auto created = World::create(cfg);
  if (!created) {
    errs.push_back(created.error().message());
  } else {
    auto& w = **created;
    for (std::uint32_t i = 0; i < 4; ++i) w.network().set_down(2 + i, true);
    w.start();
    w.run_until(from_ms(1500));
    const auto acks = w.party(Role::A).ack_count(2);
    if (acks != cfg.threshold() - 1) errs.push_back(fmt::format("seq 2 gathered {} acks", acks));
    if (w.party(Role::A).committed() != 1 || w.party(Role::B).committed() != 1) {
      errs.push_back("a party treated seq 2 as committed");
    }
    if (w.ack_quorum_seq() != 1) errs.push_back("world counted seq 2 as committed");
    for (std::uint32_t i = 0; i < 4; ++i) w.network().set_down(2 + i, false);
    w.run_until(from_ms(cfg.limit_s * 1000));
    auto r = w.report();
    if (!r.safety_ok || check_safety(r) != "") errs.push_back("resumed run unsafe: " + r.safety_reason);
  }

  if (auto s = contract_prior_close(); !s.empty()) errs.push_back(s);
  verdict(8, "threshold-boundary", errs.empty(),
          errs.empty() ? "t-1 = 6 acks leave seq 2 uncommitted for both parties; contract close at prior seq 1 "
                         "judged safe, and unsafe once seq 2 has t acks"
                       : fmt::format("{}", fmt::join(errs, "; ")));
}

void audit() {
  auto fuzz = audit_fuzz(kSeeds);
  std::vector<std::string> errs;
  std::vector<std::string> kinds;
  for (const auto& [kind, count] : fuzz.mutations) kinds.push_back(fmt::format("{} {}", kind, count));
  if (!fuzz.ok()) errs.push_back(fmt::format("{} misclassified", fuzz.misclassified.size()));

  // End to end: a party that hands the auditor an altered history is named.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (std::string tamper : {"", "a", "b"}) {
      auto cfg = *scenario_preset("audit-flow", seed);
      if (tamper == "a") cfg.party_a = "tamper-history";
      if (tamper == "b") cfg.party_b = "tamper-history";
      auto r = run_scenario(cfg);
      if (!r || r->audit.is_null() || r->audit["verdict"].is_null()) {
        errs.push_back(fmt::format("seed {}: no audit", seed));
        continue;
      }
      const auto& a = r->audit;
      bool ok = tamper.empty() ? a["verdict"] == "consistent"
                               : a["verdict"] == "tampered" && a["culprit"] == (tamper == "a" ? "A" : "B");
      if (!ok) errs.push_back(fmt::format("seed {} tamper '{}': {}", seed, tamper, a.dump()));
    }
  }
  verdict(9, "audit-fuzz", errs.empty(),
          fmt::format("{} trials: {} honest histories verified, {} tampered detected ({}); 60 end-to-end audits{}",
                      fuzz.trials, fuzz.honest_consistent, fuzz.tampered_detected, fmt::join(kinds, ", "),
                      errs.empty() ? "" : "; " + errs.front()));
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  safety_and_slashing();
  battery_criterion(2, "liveness-battery", "liveness", "(all updates commit, every close reaches Closed)");
  battery_criterion(3, "paired-censorship", "paired", "(baseline loses funds, paired channel closes safely)");
  incentives();
  latency();
  battery_criterion(6, "conservation", "conservation", "(every preset reconciles to the base unit)");
  threshold_boundary();
  audit();
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& [id, line] : lines) fmt::print("{}\n", line);
  fmt::print("{} of 9 criteria met in {:.0f} s\n", 9 - failures, secs);
  return failures == 0 ? 0 : 1;
}
