// brick: run scenarios, batteries and the broadcast benchmark.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "brick/battery.hpp"
#include "brick/bench.hpp"
#include "brick/incentives.hpp"
#include "brick/world.hpp"

namespace fs = std::filesystem;
using namespace brick;

namespace {

constexpr int kUsageError = 2;

int fail(const std::string& what) {
  std::cerr << "brick: " << what << "\n";
  return kUsageError;
}

std::vector<std::uint64_t> parse_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  return out;
}

struct RunArgs {
  std::string scenario = "honest-flow";
  std::uint64_t seed = 1;
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  auto cfg = scenario_preset(a.scenario, a.seed);
  if (!cfg) return fail(cfg.error().message());
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) return fail("cannot read " + a.config);
    std::stringstream body;
    body << in.rdbuf();
    if (auto s = apply_config_text(*cfg, body.str()); !s) return fail(s.error().message());
  }
  for (const auto& kv : a.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) return fail("override '" + kv + "' is not key=value");
    if (auto s = apply_setting(*cfg, kv.substr(0, eq), kv.substr(eq + 1)); !s) return fail(s.error().message());
  }
  cfg->seed = a.seed;

  std::ofstream trace;
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    trace.open(fs::path(a.out) / "trace.jsonl");
    if (!trace) return fail("cannot write to " + a.out);
  }
  auto report = run_scenario(*cfg, a.out.empty() ? nullptr : &trace);
  if (!report) return fail(report.error().message());
  const auto json = report->to_json().dump(2);
  std::cout << json << "\n";
  if (!a.out.empty()) std::ofstream(fs::path(a.out) / "report.json") << json << "\n";
  return report->exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brick payment channels in a deterministic adversarial simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and print its report");
  run_cmd->add_option("--scenario", run.scenario, "Scenario name")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Run seed")->capture_default_str();
  run_cmd->add_option("--config", run.config, "key=value file applied over the preset")->check(CLI::ExistingFile);
  run_cmd->add_option("--set", run.overrides, "Override, key=value (repeatable)");
  run_cmd->add_option("--out", run.out, "Directory for report.json and trace.jsonl");

  std::string wardens = "7,34,151";
  double rtt = 100;
  std::int64_t stagger = -1;
  auto* bench_cmd = app.add_subcommand("bench", "Simulated broadcast latency per committee size");
  bench_cmd->add_option("--wardens", wardens, "Comma-separated committee sizes")->capture_default_str();
  bench_cmd->add_option("--rtt", rtt, "Round-trip time in ms")->capture_default_str();
  bench_cmd->add_option("--stagger", stagger,
                        "Per-send stagger in us; calibrated against the n=151 reference when omitted");

  std::string suite = "safety";
  std::uint64_t seeds = 1000;
  std::uint64_t first_seed = 1;
  unsigned threads = 0;
  auto* battery_cmd = app.add_subcommand("battery", "Seeded property battery");
  battery_cmd->add_option("--suite", suite, "safety, liveness, conservation, paired or audit")->capture_default_str();
  battery_cmd->add_option("--seeds", seeds, "Number of seeds")->capture_default_str();
  battery_cmd->add_option("--first-seed", first_seed, "First seed")->capture_default_str();
  battery_cmd->add_option("--threads", threads, "Worker threads, 0 for all cores")->capture_default_str();

  auto* list_cmd = app.add_subcommand("list", "List scenarios and battery suites");
  auto* grid_cmd = app.add_subcommand("grid", "Brute-force incentive scan over the parameter grid");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*bench_cmd) {
      auto ns = parse_list(wardens);
      if (ns.empty()) return fail("no committee sizes");
      SimTime d = stagger >= 0 ? stagger : calibrate_stagger(151, rtt, reference_latency_ms(151));
      auto rows = bench_table(ns, rtt, d);
      std::cout << bench_to_json(rows, rtt, d).dump(2) << "\n";
      return 0;
    }
    if (*battery_cmd) {
      auto sum = run_battery(suite, seeds, first_seed, threads);
      if (!sum) return fail(sum.error().message());
      std::cout << sum->to_json().dump(2) << "\n";
      return sum->ok() ? 0 : 1;
    }
    if (*list_cmd) {
      nlohmann::json j = {{"scenarios", scenario_names()}, {"suites", battery_suites()}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*grid_cmd) {
      auto rows = scan_grid(dominance_grid());
      std::cout << grid_to_json(rows).dump(2) << "\n";
      bool ok = true;
      for (const auto& r : rows) ok = ok && r.dominance_ok && r.fraud_bound_ok;
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return 0;
}
