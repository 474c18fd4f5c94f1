#include "brick/scenario.hpp"

#include <charconv>
#include <functional>

#include <fmt/format.h>

#include "brick/warden.hpp"

namespace brick {

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Brick: return "brick";
    case RunMode::BrickPlus: return "brick+";
    case RunMode::Baseline: return "baseline";
  }
  return "?";
}

std::string_view to_string(Adversary a) {
  switch (a) {
    case Adversary::Honest: return "honest";
    case Adversary::Reorder: return "reorder";
    case Adversary::TargetedDelay: return "targeted-delay";
    case Adversary::CensorLedger: return "censor-ledger";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
Result<T> number(std::string_view key, std::string_view s) {
  T v{};
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    return Error{Errc::ConfigInvalid, fmt::format("{}: not a number: '{}'", key, s)};
  }
  return v;
}

Result<bool> boolean(std::string_view key, std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  return Error{Errc::ConfigInvalid, fmt::format("{}: not a boolean: '{}'", key, s)};
}

using Setter = std::function<Status(ScenarioConfig&, std::string_view key, std::string_view)>;

template <class T, class Member>
Setter num_setter(Member member) {
  return [member](ScenarioConfig& c, std::string_view key, std::string_view v) -> Status {
    auto r = number<T>(key, v);
    if (!r) return r.error();
    c.*member = *r;
    return {};
  };
}

Setter string_setter(std::string ScenarioConfig::*member) {
  return [member](ScenarioConfig& c, std::string_view, std::string_view v) -> Status {
    c.*member = std::string(trim(v));
    return {};
  };
}

Setter bool_setter(bool ScenarioConfig::*member) {
  return [member](ScenarioConfig& c, std::string_view key, std::string_view v) -> Status {
    auto r = boolean(key, v);
    if (!r) return r.error();
    c.*member = *r;
    return {};
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"scenario", string_setter(&ScenarioConfig::scenario)},
      {"seed", num_setter<std::uint64_t>(&ScenarioConfig::seed)},
      {"mode",
       [](ScenarioConfig& c, std::string_view key, std::string_view v) -> Status {
         v = trim(v);
         if (v == "brick") {
           c.mode = RunMode::Brick;
         } else if (v == "brick+" || v == "brick-plus") {
           c.mode = RunMode::BrickPlus;
         } else if (v == "baseline") {
           c.mode = RunMode::Baseline;
         } else {
           return Error{Errc::ConfigInvalid, fmt::format("{}: unknown mode '{}'", key, v)};
         }
         return {};
       }},
      {"n", num_setter<std::uint64_t>(&ScenarioConfig::n)},
      {"t", num_setter<std::uint64_t>(&ScenarioConfig::t)},
      {"balance_a", num_setter<Coins>(&ScenarioConfig::balance_a)},
      {"balance_b", num_setter<Coins>(&ScenarioConfig::balance_b)},
      {"split",
       [](ScenarioConfig& c, std::string_view key, std::string_view v) -> Status {
         auto parts = split(v, ',');
         if (parts.size() != 2) return Error{Errc::ConfigInvalid, fmt::format("{}: expected A,B", key)};
         auto a = number<Coins>(key, parts[0]);
         auto b = number<Coins>(key, parts[1]);
         if (!a) return a.error();
         if (!b) return b.error();
         c.balance_a = *a;
         c.balance_b = *b;
         return {};
       }},
      {"closing_fee", num_setter<Coins>(&ScenarioConfig::closing_fee)},
      {"F", num_setter<Coins>(&ScenarioConfig::closing_fee)},
      {"update_fee", num_setter<Coins>(&ScenarioConfig::update_fee)},
      {"r", num_setter<Coins>(&ScenarioConfig::update_fee)},
      {"epsilon", num_setter<Coins>(&ScenarioConfig::epsilon)},
      {"workload",
       [](ScenarioConfig& c, std::string_view key, std::string_view v) -> Status {
         std::vector<std::int64_t> w;
         for (auto part : split(v, ',')) {
           auto d = number<std::int64_t>(key, part);
           if (!d) return d.error();
           w.push_back(*d);
         }
         c.workload = std::move(w);
         return {};
       }},
      {"rtt_ms", num_setter<double>(&ScenarioConfig::rtt_ms)},
      {"jitter_ms", num_setter<double>(&ScenarioConfig::jitter_ms)},
      {"stagger_us", num_setter<double>(&ScenarioConfig::stagger_us)},
      {"adversary",
       [](ScenarioConfig& c, std::string_view key, std::string_view v) -> Status {
         v = trim(v);
         for (auto a : {Adversary::Honest, Adversary::Reorder, Adversary::TargetedDelay,
                        Adversary::CensorLedger}) {
           if (v == to_string(a)) {
             c.adversary = a;
             return {};
           }
         }
         return Error{Errc::ConfigInvalid, fmt::format("{}: unknown adversary '{}'", key, v)};
       }},
      {"reorder_ms", num_setter<double>(&ScenarioConfig::reorder_ms)},
      {"hold_ms", num_setter<double>(&ScenarioConfig::hold_ms)},
      {"hold_target", string_setter(&ScenarioConfig::hold_target)},
      {"hold_wardens",
       [](ScenarioConfig& c, std::string_view key, std::string_view v) -> Status {
         std::vector<std::uint32_t> w;
         for (auto part : split(v, ',')) {
           auto d = number<std::uint32_t>(key, part);
           if (!d) return d.error();
           w.push_back(*d);
         }
         c.hold_wardens = std::move(w);
         return {};
       }},
      {"censor_blocks", num_setter<Height>(&ScenarioConfig::censor_blocks)},
      {"censor_victim", string_setter(&ScenarioConfig::censor_victim)},
      {"party_a", string_setter(&ScenarioConfig::party_a)},
      {"party_b", string_setter(&ScenarioConfig::party_b)},
      {"wardens",
       [](ScenarioConfig& c, std::string_view, std::string_view v) -> Status {
         c.wardens.clear();
         for (auto part : split(v, ',')) c.wardens.emplace_back(part);
         return {};
       }},
      {"closer", string_setter(&ScenarioConfig::closer)},
      {"close_mode",
       [](ScenarioConfig& c, std::string_view key, std::string_view v) -> Status {
         v = trim(v);
         if (v == "optimistic") {
           c.close_mode = CloseMode::Optimistic;
         } else if (v == "pessimistic") {
           c.close_mode = CloseMode::Pessimistic;
         } else {
           return Error{Errc::ConfigInvalid, fmt::format("{}: unknown close mode '{}'", key, v)};
         }
         return {};
       }},
      {"close_at_seq", num_setter<Seq>(&ScenarioConfig::close_at_seq)},
      {"confirm_depth", num_setter<Height>(&ScenarioConfig::confirm_depth)},
      {"liveness_bound", num_setter<Height>(&ScenarioConfig::liveness_bound)},
      {"dispute_window", num_setter<Height>(&ScenarioConfig::dispute_window)},
      {"block_ms", num_setter<double>(&ScenarioConfig::block_ms)},
      {"limit_s", num_setter<double>(&ScenarioConfig::limit_s)},
      {"stall_ms", num_setter<double>(&ScenarioConfig::stall_ms)},
      {"optimistic_timeout_ms", num_setter<double>(&ScenarioConfig::optimistic_timeout_ms)},
      {"audit", bool_setter(&ScenarioConfig::audit)},
      {"auditor_authorized", bool_setter(&ScenarioConfig::auditor_authorized)},
      {"paired", bool_setter(&ScenarioConfig::paired)},
      {"keep_trace", bool_setter(&ScenarioConfig::keep_trace)},
  };
  return table;
}

}  // namespace

Status apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  if (key.rfind("warden.", 0) == 0) {
    auto idx = number<std::size_t>(key, key.substr(7));
    if (!idx) return idx.error();
    if (cfg.wardens.size() <= *idx) cfg.wardens.resize(*idx + 1, "honest");
    cfg.wardens[*idx] = std::string(trim(value));
    return {};
  }
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) return Error{Errc::ConfigInvalid, fmt::format("unknown key '{}'", key)};
  return it->second(cfg, key, value);
}

Status apply_config_text(ScenarioConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      return Error{Errc::ConfigInvalid, fmt::format("line {}: expected key = value", line_no)};
    }
    if (auto s = apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1)); !s) {
      return Error{Errc::ConfigInvalid, fmt::format("line {}: {}", line_no, s.error().message())};
    }
  }
  return {};
}

Status ScenarioConfig::validate() const {
  if (mode != RunMode::Baseline) {
    if (n <= 7 || n % 3 != 1) {
      return Error{Errc::ConfigInvalid, fmt::format("n={} must be 3f+1 with n > 7", n)};
    }
    if (threshold() != 2 * f() + 1) {
      return Error{Errc::ConfigInvalid, fmt::format("t={} must be 2f+1={}", threshold(), 2 * f() + 1)};
    }
    if (wardens.size() > n) return Error{Errc::ConfigInvalid, "more warden tags than wardens"};
    for (std::size_t i = 0; i < n; ++i) {
      if (auto s = WardenStrategy::parse(warden_tag(i)); !s) return s.error();
    }
  }
  if (v() == 0) return Error{Errc::ConfigInvalid, "channel holds no funds"};
  if (auto s = PartyStrategy::parse(party_a); !s) return s.error();
  if (auto s = PartyStrategy::parse(party_b); !s) return s.error();
  if (closer != "a" && closer != "b" && closer != "none") {
    return Error{Errc::ConfigInvalid, fmt::format("closer must be a, b or none, not '{}'", closer)};
  }
  if (censor_victim != "a" && censor_victim != "b") {
    return Error{Errc::ConfigInvalid, "censor_victim must be a or b"};
  }
  if (hold_target != "close-requests" && hold_target.rfind("announce:", 0) != 0) {
    return Error{Errc::ConfigInvalid, fmt::format("unknown hold_target '{}'", hold_target)};
  }
  if (mode == RunMode::BrickPlus && close_mode == CloseMode::Optimistic && closer != "none") {
    return Error{Errc::ConfigInvalid, "brick+ channels have no optimistic close"};
  }
  if (audit && mode != RunMode::BrickPlus) return Error{Errc::ConfigInvalid, "audits need brick+"};
  if (rtt_ms < 0 || jitter_ms < 0 || stagger_us < 0 || reorder_ms < 0 || hold_ms < 0) {
    return Error{Errc::ConfigInvalid, "negative delay"};
  }
  if (block_ms <= 0 || limit_s <= 0) return Error{Errc::ConfigInvalid, "block_ms and limit_s must be positive"};
  Coins a = balance_a;
  for (auto d : workload) {
    std::int64_t next = static_cast<std::int64_t>(a) + d;
    if (next < 0 || next > static_cast<std::int64_t>(v())) {
      return Error{Errc::ConfigInvalid, "workload overdraws a party"};
    }
    a = static_cast<Coins>(next);
  }
  return {};
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "honest-flow",       "unilateral-close",    "byzantine-f", "bribing-attack",
      "hostage-attempt",   "censorship-attack",   "baseline-censorship",
      "crash-party",       "audit-flow",          "fee-reconciliation"};
  return names;
}

Result<ScenarioConfig> scenario_preset(std::string_view name, std::uint64_t seed) {
  ScenarioConfig c;
  c.scenario = std::string(name);
  c.seed = seed;
  if (name == "honest-flow") {
    // defaults
  } else if (name == "unilateral-close" || name == "fee-reconciliation") {
    c.close_mode = CloseMode::Pessimistic;
  } else if (name == "byzantine-f") {
    c.close_mode = CloseMode::Pessimistic;
    c.party_a = "stale-close-briber:0";
    c.wardens.assign(c.f(), "bribed-old-claim:0");
    c.adversary = Adversary::Reorder;
    c.reorder_ms = 200;
  } else if (name == "bribing-attack") {
    // An offer of exactly the collateral is below what a rational warden asks.
    c.close_mode = CloseMode::Pessimistic;
    c.party_a = fmt::format("stale-close-briber:{}", collateral_for(c.v(), c.f()));
  } else if (name == "hostage-attempt") {
    c.party_b = "silent";
  } else if (name == "censorship-attack") {
    c.close_mode = CloseMode::Pessimistic;
    c.party_a = "stale-close-briber:0";
    c.adversary = Adversary::CensorLedger;
  } else if (name == "baseline-censorship") {
    c.mode = RunMode::Baseline;
    c.party_a = "stale-close-briber:0";
    c.adversary = Adversary::CensorLedger;
  } else if (name == "crash-party") {
    c.close_mode = CloseMode::Pessimistic;
    c.party_a = "crash-after-commit:3";
    c.closer = "b";
  } else if (name == "audit-flow") {
    c.mode = RunMode::BrickPlus;
    c.close_mode = CloseMode::Pessimistic;
    c.closer = "none";
    c.audit = true;
  } else {
    return Error{Errc::ConfigInvalid, fmt::format("unknown scenario '{}'", name)};
  }
  return c;
}

nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  j["mode"] = to_string(c.mode);
  j["n"] = c.n;
  j["f"] = c.f();
  j["t"] = c.threshold();
  j["split"] = {c.balance_a, c.balance_b};
  j["closing_fee"] = c.closing_fee;
  j["update_fee"] = c.update_fee;
  j["epsilon"] = c.epsilon;
  j["workload"] = c.workload;
  j["rtt_ms"] = c.rtt_ms;
  j["jitter_ms"] = c.jitter_ms;
  j["stagger_us"] = c.stagger_us;
  j["adversary"] = to_string(c.adversary);
  if (c.adversary == Adversary::Reorder) j["reorder_ms"] = c.reorder_ms;
  if (c.adversary == Adversary::TargetedDelay) {
    j["hold_ms"] = c.hold_ms;
    j["hold_target"] = c.hold_target;
    j["hold_wardens"] = c.hold_wardens;
  }
  if (c.adversary == Adversary::CensorLedger) {
    j["censor_blocks"] = c.censor_blocks;
    j["censor_victim"] = c.censor_victim;
  }
  j["party_a"] = c.party_a;
  j["party_b"] = c.party_b;
  std::vector<std::string> w;
  for (std::size_t i = 0; i < c.n; ++i) w.push_back(c.warden_tag(i));
  j["wardens"] = w;
  j["closer"] = c.closer;
  j["close_mode"] = c.close_mode == CloseMode::Optimistic ? "optimistic" : "pessimistic";
  j["close_at_seq"] = c.close_at_seq;
  j["confirm_depth"] = c.confirm_depth;
  j["liveness_bound"] = c.liveness_bound;
  if (c.mode == RunMode::Baseline) j["dispute_window"] = c.dispute_window;
  j["block_ms"] = c.block_ms;
  j["audit"] = c.audit;
  return j;
}

}  // namespace brick
