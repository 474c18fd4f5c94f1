#include "brick/battery.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "brick/brick_plus.hpp"
#include "brick/world.hpp"

namespace brick {

namespace {

// Workload and warden placement vary per seed.
std::mt19937_64 seed_rng(std::uint64_t seed, std::string_view label) { return std::mt19937_64(derive_u64(seed, label)); }

void vary_workload(ScenarioConfig& cfg, std::mt19937_64& rng) {
  const auto v = static_cast<std::int64_t>(cfg.v());
  auto a = static_cast<std::int64_t>(cfg.balance_a);
  cfg.workload.clear();
  const std::size_t len = 1 + rng() % 5;
  for (std::size_t i = 0; i < len; ++i) {
    std::int64_t target = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(v + 1));
    if (target == a) target = (a + 1) % (v + 1);
    cfg.workload.push_back(target - a);
    a = target;
  }
}

std::vector<std::uint32_t> pick(std::uint64_t n, std::uint64_t k, std::mt19937_64& rng) {
  std::vector<std::uint32_t> idx(n);
  for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void set_wardens(ScenarioConfig& cfg, const std::vector<std::uint32_t>& which, const std::string& tag) {
  cfg.wardens.resize(cfg.n, "honest");
  for (auto i : which) cfg.wardens[i] = tag;
}

ScenarioConfig base(std::string name, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.scenario = std::move(name);
  cfg.seed = seed;
  cfg.close_mode = CloseMode::Pessimistic;
  auto rng = seed_rng(seed, "battery/workload");
  vary_workload(cfg, rng);
  return cfg;
}

void reorder(ScenarioConfig& cfg, std::mt19937_64& rng) {
  cfg.adversary = Adversary::Reorder;
  cfg.reorder_ms = static_cast<double>(50 + rng() % 950);
}

// Deviant warden strategies exercised f at a time.
ScenarioConfig deviant_wardens(std::string_view tag, std::uint64_t seed) {
  auto cfg = base(fmt::format("safety/{}", tag), seed);
  auto rng = seed_rng(seed, "battery/wardens");
  std::string t(tag);
  if (t == "crash") t = fmt::format("crash:{}", rng() % 8);
  set_wardens(cfg, pick(cfg.n, cfg.f(), rng), t);
  cfg.closer = rng() % 2 ? "a" : "b";
  reorder(cfg, rng);
  return cfg;
}

std::string check_liveness(const RunReport& r) {
  if (auto s = check_safety(r); !s.empty()) return s;
  if (!r.all_updates_committed) {
    return fmt::format("updates stalled at {} of {}", r.ack_quorum_seq, r.final_workload_seq);
  }
  if (!r.liveness_ok || !r.liveness_ms) return "close did not complete";
  return {};
}

std::string check_conservation(const RunReport& r) {
  if (!r.violations.empty()) return r.violations.front();
  if (r.mode != RunMode::Baseline) {
    if (r.final_phase != "Closed" && r.final_phase != "Cancelled") return "run not terminal: " + r.final_phase;
    if (!r.settlement || !r.settlement->ok()) return "settlement did not reconcile";
  }
  return {};
}

std::string check_paired(const RunReport& r) {
  if (r.mode != RunMode::Baseline) return "not a baseline run";
  if (r.safety_ok) return "baseline channel kept the victim's funds";
  if (r.paired.is_null()) return "paired run missing";
  if (!r.paired.value("safety_ok", false)) return "paired brick run unsafe";
  if (r.paired.value("final_phase", std::string()) != "Closed") return "paired brick run not closed";
  return {};
}

}  // namespace

std::string check_safety(const RunReport& r) {
  if (!r.violations.empty()) return "violation: " + r.violations.front();
  if (r.final_phase != "Closed") return "not closed (" + r.final_phase + ")";
  if (!r.safety_ok) return r.safety_reason;
  if (r.close_kind == "pessimistic" && (!r.closing_seq || *r.closing_seq < r.ack_quorum_seq)) {
    return fmt::format("closed below committed seq {}", r.ack_quorum_seq);
  }
  if (r.close_kind == "pessimistic" || r.close_kind == "fraud-majority") {
    std::set<std::string> eq(r.equivocators.begin(), r.equivocators.end());
    std::set<std::string> sl(r.slashed.begin(), r.slashed.end());
    if (eq != sl) {
      return fmt::format("equivocators {{{}}} but slashed {{{}}}", fmt::join(eq, ","), fmt::join(sl, ","));
    }
  }
  return {};
}

const std::vector<std::string>& battery_suites() {
  static const std::vector<std::string> kSuites = {"safety", "liveness", "conservation", "paired", "audit"};
  return kSuites;
}

Result<std::vector<BatteryCase>> battery_cases(std::string_view suite) {
  std::vector<BatteryCase> cases;
  if (suite == "safety") {
    cases.push_back({"bribed-old-claim",
                     [](std::uint64_t seed) {
                       auto cfg = deviant_wardens("bribed-old-claim:0", seed);
                       cfg.party_a = "stale-close-briber:0";
                       cfg.closer = "a";
                       return cfg;
                     },
                     check_safety});
    for (std::string tag : {"unresponsive", "ack-without-store", "sign-after-close", "crash"}) {
      cases.push_back({tag, [tag](std::uint64_t seed) { return deviant_wardens(tag, seed); }, check_safety});
    }
    cases.push_back({"withhold-countersign",
                     [](std::uint64_t seed) {
                       auto cfg = base("safety/withhold-countersign", seed);
                       auto rng = seed_rng(seed, "battery/party");
                       cfg.party_b = "withhold-countersign";
                       cfg.close_mode = rng() % 2 ? CloseMode::Optimistic : CloseMode::Pessimistic;
                       reorder(cfg, rng);
                       return cfg;
                     },
                     check_safety});
    cases.push_back({"targeted-delay",
                     [](std::uint64_t seed) {
                       auto cfg = base("safety/targeted-delay", seed);
                       auto rng = seed_rng(seed, "battery/wardens");
                       auto chosen = pick(cfg.n, 2 * cfg.f(), rng);
                       std::vector<std::uint32_t> bribed(chosen.begin(), chosen.begin() + cfg.f());
                       set_wardens(cfg, bribed, "bribed-old-claim:0");
                       cfg.party_a = "stale-close-briber:0";
                       cfg.adversary = Adversary::TargetedDelay;
                       cfg.hold_target = "close-requests";
                       cfg.hold_wardens.assign(chosen.begin() + cfg.f(), chosen.end());
                       cfg.hold_ms = 600000;
                       return cfg;
                     },
                     check_safety});
  } else if (suite == "liveness") {
    auto jitter = [](ScenarioConfig& cfg, std::uint64_t seed) {
      auto rng = seed_rng(seed, "battery/jitter");
      cfg.jitter_ms = static_cast<double>(rng() % 50);
    };
    cases.push_back({"honest-optimistic",
                     [jitter](std::uint64_t seed) {
                       auto cfg = base("liveness/honest-optimistic", seed);
                       cfg.close_mode = CloseMode::Optimistic;
                       jitter(cfg, seed);
                       return cfg;
                     },
                     check_liveness});
    cases.push_back({"honest-pessimistic",
                     [jitter](std::uint64_t seed) {
                       auto cfg = base("liveness/honest-pessimistic", seed);
                       jitter(cfg, seed);
                       return cfg;
                     },
                     check_liveness});
    cases.push_back({"unresponsive-f",
                     [](std::uint64_t seed) {
                       auto cfg = deviant_wardens("unresponsive", seed);
                       cfg.scenario = "liveness/unresponsive-f";
                       return cfg;
                     },
                     check_liveness});
    cases.push_back({"reorder-optimistic",
                     [](std::uint64_t seed) {
                       auto cfg = base("liveness/reorder-optimistic", seed);
                       auto rng = seed_rng(seed, "battery/reorder");
                       cfg.close_mode = CloseMode::Optimistic;
                       reorder(cfg, rng);
                       return cfg;
                     },
                     check_liveness});
    cases.push_back({"hostage",
                     [](std::uint64_t seed) {
                       auto cfg = base("liveness/hostage", seed);
                       cfg.party_b = "silent";
                       cfg.close_mode = CloseMode::Optimistic;
                       return cfg;
                     },
                     check_liveness});
    cases.push_back({"delayed-announcements",
                     [](std::uint64_t seed) {
                       auto cfg = base("liveness/delayed-announcements", seed);
                       auto rng = seed_rng(seed, "battery/wardens");
                       cfg.adversary = Adversary::TargetedDelay;
                       cfg.hold_target = "announce:2";
                       cfg.hold_wardens = pick(cfg.n, cfg.f(), rng);
                       cfg.hold_ms = 600000;
                       return cfg;
                     },
                     check_liveness});
  } else if (suite == "conservation") {
    for (const auto& name : scenario_names()) {
      cases.push_back({name,
                       [name](std::uint64_t seed) {
                         auto cfg = scenario_preset(name, seed);
                         cfg->paired = false;
                         return *cfg;
                       },
                       check_conservation});
    }
  } else if (suite == "paired") {
    cases.push_back({"baseline-censorship",
                     [](std::uint64_t seed) { return *scenario_preset("baseline-censorship", seed); },
                     check_paired});
  } else {
    return Error{Errc::ConfigInvalid, fmt::format("unknown battery suite '{}'", suite)};
  }
  return cases;
}

Result<BatterySummary> run_battery(std::string_view suite, std::uint64_t seeds, std::uint64_t first_seed,
                                   unsigned threads) {
  BatterySummary sum;
  sum.suite = std::string(suite);
  sum.seeds = seeds;
  if (suite == "audit") {
    auto fuzz = audit_fuzz(seeds, first_seed);
    sum.runs = fuzz.trials * 2;
    sum.runs_per_case = {{"honest", fuzz.trials}, {"tampered", fuzz.trials}};
    sum.failures = fuzz.misclassified;
    return sum;
  }
  auto cases = battery_cases(suite);
  if (!cases) return cases.error();

  const std::size_t jobs = cases->size() * seeds;
  std::vector<std::string> outcome(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const auto& c = (*cases)[j % cases->size()];
      const std::uint64_t seed = first_seed + j / cases->size();
      auto report = run_scenario(c.make(seed));
      outcome[j] = report ? c.check(*report) : "run failed: " + report.error().message();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t j = 0; j < jobs; ++j) {
    const auto& c = (*cases)[j % cases->size()];
    ++sum.runs;
    ++sum.runs_per_case[c.name];
    if (!outcome[j].empty()) sum.failures.push_back({first_seed + j / cases->size(), c.name, outcome[j]});
  }
  return sum;
}

nlohmann::json BatterySummary::to_json() const {
  auto fails = nlohmann::json::array();
  for (const auto& f : failures) fails.push_back({{"seed", f.seed}, {"case", f.case_name}, {"reason", f.reason}});
  return {{"suite", suite},     {"seeds", seeds},  {"runs", runs}, {"runs_per_case", runs_per_case},
          {"failures", fails},  {"ok", ok()}};
}

AuditFuzzResult audit_fuzz(std::uint64_t trials, std::uint64_t first_seed) {
  AuditFuzzResult out;
  out.trials = trials;
  static const char* kMutations[] = {"balance-shift", "balance-inflate", "salt-flip", "seq-change"};
  for (std::uint64_t k = 0; k < trials; ++k) {
    const std::uint64_t seed = first_seed + k;
    auto rng = seed_rng(seed, "audit-fuzz");
    const Coins v = 12;
    const std::size_t len = 2 + rng() % 9;
    StateHistory history;
    for (std::size_t i = 0; i < len; ++i) {
      Coins a = rng() % (v + 1);
      history.push_back(ChannelState{i + 1, a, v - a, draw_salt(rng)});
    }
    ClosingClaim claim;
    claim.seq = len;
    claim.head = replay_chain(history).back();
    const std::vector<ClosingClaim> claims{claim};

    if (verify_history(history, claims).verdict == Verdict::Consistent) {
      ++out.honest_consistent;
    } else {
      out.misclassified.push_back({seed, "honest", "honest history rejected"});
    }

    StateHistory tampered = history;
    auto& st = tampered[rng() % len];
    const char* kind = kMutations[rng() % 4];
    if (std::string_view(kind) == "balance-shift") {
      if (st.balance_a > 0) {
        --st.balance_a;
        ++st.balance_b;
      } else {
        ++st.balance_a;
        --st.balance_b;
      }
    } else if (std::string_view(kind) == "balance-inflate") {
      ++st.balance_a;
    } else if (std::string_view(kind) == "salt-flip") {
      const auto bit = rng() % (st.salt.bytes.size() * 8);
      st.salt.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    } else {
      st.seq += 1 + rng() % 3;
    }
    ++out.mutations[kind];
    auto check = verify_history(tampered, claims);
    if (check.verdict == Verdict::Tampered) {
      ++out.tampered_detected;
    } else {
      out.misclassified.push_back({seed, kind, "tampered history accepted"});
    }
  }
  return out;
}

nlohmann::json AuditFuzzResult::to_json() const {
  auto mis = nlohmann::json::array();
  for (const auto& f : misclassified) mis.push_back({{"seed", f.seed}, {"case", f.case_name}, {"reason", f.reason}});
  return {{"trials", trials},
          {"honest_consistent", honest_consistent},
          {"tampered_detected", tampered_detected},
          {"mutations", mutations},
          {"misclassified", mis},
          {"ok", ok()}};
}

}  // namespace brick
