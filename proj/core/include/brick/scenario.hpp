#pragma once

// Scenario configuration: named presets, a flat key=value text format and
// command-line style overrides.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "brick/channel.hpp"
#include "brick/netsim.hpp"
#include "brick/party.hpp"
#include "brick/result.hpp"

namespace brick {

enum class RunMode : std::uint8_t { Brick, BrickPlus, Baseline };
std::string_view to_string(RunMode m);

enum class Adversary : std::uint8_t { Honest, Reorder, TargetedDelay, CensorLedger };
std::string_view to_string(Adversary a);

struct ScenarioConfig {
  std::string scenario = "honest-flow";
  std::uint64_t seed = 1;
  RunMode mode = RunMode::Brick;

  std::uint64_t n = 10;
  /// 0 selects 2f+1.
  std::uint64_t t = 0;
  Coins balance_a = 6;
  Coins balance_b = 6;
  Coins closing_fee = 70;
  Coins update_fee = 1;
  Coins epsilon = 1;
  /// Payments to A per update (negative pays B), seq 2 onward.
  std::vector<std::int64_t> workload{2, 2, -3};

  double rtt_ms = 100;
  double jitter_ms = 0;
  double stagger_us = 2000;

  Adversary adversary = Adversary::Honest;
  /// Reorder: maximum extra hold per message.
  double reorder_ms = 0;
  /// TargetedDelay: hold applied to matching messages.
  double hold_ms = 600000;
  /// TargetedDelay: which messages to hold ("close-requests", "announce:SEQ").
  std::string hold_target = "close-requests";
  /// TargetedDelay: wardens affected (indices); empty means all.
  std::vector<std::uint32_t> hold_wardens;
  /// CensorLedger: blocks every transaction of the victim is held back.
  Height censor_blocks = 7;
  /// CensorLedger: "a" or "b".
  std::string censor_victim = "b";

  std::string party_a = "honest";
  std::string party_b = "honest";
  /// One tag per warden; missing entries are honest.
  std::vector<std::string> wardens;

  std::string closer = "a";
  CloseMode close_mode = CloseMode::Optimistic;
  Seq close_at_seq = 0;

  Height confirm_depth = 6;
  Height liveness_bound = 2;
  Height dispute_window = 6;
  double block_ms = 12000;
  double limit_s = 7200;
  double stall_ms = 20000;
  double optimistic_timeout_ms = 180000;

  /// Brick+: an auditor files an access request after the workload.
  bool audit = false;
  /// Whether the auditor key is on the contract's allow-list.
  bool auditor_authorized = true;
  /// Also run the identical adversary against a Brick channel (baseline mode).
  bool paired = true;
  bool keep_trace = false;

  std::uint64_t f() const { return (n - 1) / 3; }
  std::uint64_t threshold() const { return t ? t : 2 * f() + 1; }
  Coins v() const { return balance_a + balance_b; }
  std::string warden_tag(std::size_t i) const { return i < wardens.size() ? wardens[i] : "honest"; }

  Status validate() const;
};

const std::vector<std::string>& scenario_names();
/// Preset for a named scenario; ConfigInvalid for unknown names.
Result<ScenarioConfig> scenario_preset(std::string_view name, std::uint64_t seed = 1);

/// Applies one key=value setting.
Status apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);
/// Applies a key=value file body. Blank lines and lines starting with '#'
/// are skipped.
Status apply_config_text(ScenarioConfig& cfg, std::string_view text);

nlohmann::json config_to_json(const ScenarioConfig& cfg);

}  // namespace brick
