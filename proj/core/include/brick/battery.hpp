#pragma once

// Seeded property batteries. Each suite expands every seed into one or more
// scenario runs, checks the suite's invariants on each report and lists the
// failures together with the seed that replays them.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brick/report.hpp"
#include "brick/result.hpp"
#include "brick/scenario.hpp"

namespace brick {

struct BatteryFailure {
  std::uint64_t seed = 0;
  std::string case_name;
  std::string reason;
};

struct BatterySummary {
  std::string suite;
  std::uint64_t seeds = 0;
  std::uint64_t runs = 0;
  std::map<std::string, std::uint64_t> runs_per_case;
  std::vector<BatteryFailure> failures;

  bool ok() const { return failures.empty(); }
  nlohmann::json to_json() const;
};

/// One family of runs inside a suite. `make` builds the config for a seed;
/// `check` returns an empty string when the report satisfies the suite.
struct BatteryCase {
  std::string name;
  std::function<ScenarioConfig(std::uint64_t seed)> make;
  std::function<std::string(const RunReport&)> check;
};

/// safety, liveness, conservation, paired, audit.
const std::vector<std::string>& battery_suites();
Result<std::vector<BatteryCase>> battery_cases(std::string_view suite);

/// Seeds first_seed .. first_seed + seeds - 1. `threads` = 0 uses the
/// hardware concurrency.
Result<BatterySummary> run_battery(std::string_view suite, std::uint64_t seeds,
                                   std::uint64_t first_seed = 1, unsigned threads = 0);

/// Mutation fuzzing of Brick+ histories: each trial builds an honest history,
/// checks it verifies, then applies one single-state mutation and checks the
/// audit flags it.
struct AuditFuzzResult {
  std::uint64_t trials = 0;
  std::uint64_t honest_consistent = 0;
  std::uint64_t tampered_detected = 0;
  std::vector<BatteryFailure> misclassified;
  std::map<std::string, std::uint64_t> mutations;

  bool ok() const { return misclassified.empty() && honest_consistent == trials && tampered_detected == trials; }
  nlohmann::json to_json() const;
};

AuditFuzzResult audit_fuzz(std::uint64_t trials, std::uint64_t first_seed = 1);

/// Safety check shared by the suites: closed, judged safe, closing seq not
/// below any ack quorum, every equivocator slashed.
std::string check_safety(const RunReport& r);

}  // namespace brick
