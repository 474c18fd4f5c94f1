#pragma once

// Simulated broadcast latency: one party sends an announcement to n wardens in
// sequence and waits for their acks.

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "brick/netsim.hpp"

namespace brick {

struct BenchRow {
  std::uint64_t n = 0;
  std::uint64_t t = 0;
  /// Broadcast until every warden acked: rtt + n*stagger.
  double commit_ms = 0;
  /// Broadcast until the t-th ack.
  double quorum_ms = 0;
  /// Reference latency for this committee size, 0 when none.
  double reference_ms = 0;
  double deviation = 0;
};

/// Reference latencies of the testbed (rtt 100 ms) for n = 7, 34 and 151.
double reference_latency_ms(std::uint64_t n);

BenchRow bench_broadcast(std::uint64_t n, double rtt_ms, SimTime stagger_us);
std::vector<BenchRow> bench_table(const std::vector<std::uint64_t>& ns, double rtt_ms, SimTime stagger_us);

/// Stagger, in whole microseconds, that makes a committee of `n` hit
/// `target_ms` under `rtt_ms`.
SimTime calibrate_stagger(std::uint64_t n, double rtt_ms, double target_ms);

nlohmann::json bench_to_json(const std::vector<BenchRow>& rows, double rtt_ms, SimTime stagger_us);

}  // namespace brick
