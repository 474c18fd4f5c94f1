#pragma once

// Deterministic discrete-event network. Time is kept in integer microseconds
// so that per-send stagger below one millisecond can be expressed; reports and
// traces show milliseconds.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "brick/primitives.hpp"

namespace brick {

using SimTime = std::int64_t;

constexpr SimTime from_ms(std::int64_t ms) { return ms * 1000; }
constexpr double to_ms(SimTime t) { return static_cast<double>(t) / 1000.0; }

class Scheduler {
 public:
  using Task = std::function<void()>;

  SimTime now() const { return now_; }
  std::int64_t now_ms() const { return now_ / 1000; }

  void at(SimTime when, Task task);
  void after(SimTime delay, Task task) { at(now_ + delay, std::move(task)); }

  /// Runs the earliest event. Returns false when nothing is scheduled.
  bool step();
  /// Runs events up to `limit` (inclusive) or until `stop` returns true.
  /// Returns the number of events processed.
  std::size_t run(SimTime limit, const std::function<bool()>& stop = {});

  bool empty() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t processed() const { return processed_; }
  std::optional<SimTime> next_time() const;

 private:
  struct Item {
    SimTime when;
    std::uint64_t seq;
    Task task;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      return a.when != b.when ? a.when > b.when : a.seq > b.seq;
    }
  };

  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  std::priority_queue<Item, std::vector<Item>, Later> queue_;
};

struct TraceEvent {
  SimTime time = 0;
  std::string kind;
  std::string from;
  std::string to;
  std::string summary;
};

/// Ordered event log with a running digest. The digest covers every recorded
/// event even when events are not retained.
class Trace {
 public:
  explicit Trace(bool keep_events = true) : keep_(keep_events) {}

  void record(SimTime time, std::string_view kind, std::string_view from, std::string_view to,
              std::string summary);

  const Digest& digest() const { return digest_; }
  std::uint64_t size() const { return count_; }
  const std::vector<TraceEvent>& events() const { return events_; }
  const std::map<std::string, std::uint64_t>& counts() const { return counts_; }
  void write_jsonl(std::ostream& out) const;

 private:
  bool keep_;
  Digest digest_;
  std::uint64_t count_ = 0;
  std::vector<TraceEvent> events_;
  std::map<std::string, std::uint64_t> counts_;
};

std::string trace_line(const TraceEvent& e);

struct NetPolicy {
  SimTime rtt = from_ms(100);
  /// Extra one-way delay drawn uniformly from [0, jitter].
  SimTime jitter = 0;
  /// Spacing between consecutive messages of one broadcast.
  SimTime stagger = from_ms(2);
  /// Reorder adversary: extra hold drawn uniformly from [0, reorder_max_hold].
  SimTime reorder_max_hold = 0;
};

template <class Payload>
class Network {
 public:
  using NodeId = std::uint32_t;
  using Handler = std::function<void(NodeId from, const Payload&)>;
  using Predicate = std::function<bool(NodeId from, NodeId to, const Payload&)>;
  using Summarizer = std::function<std::string(const Payload&)>;

  Network(Scheduler& sched, Trace& trace, NetPolicy policy, std::uint64_t seed,
          Summarizer summarize)
      : sched_(sched), trace_(trace), policy_(policy), rng_(seed),
        summarize_(std::move(summarize)) {}

  NodeId add_node(std::string name, Handler handler = {}) {
    nodes_.push_back(Node{std::move(name), std::move(handler), false, 0});
    return static_cast<NodeId>(nodes_.size() - 1);
  }
  void set_handler(NodeId id, Handler handler) { nodes_.at(id).handler = std::move(handler); }
  const std::string& name(NodeId id) const { return nodes_.at(id).name; }
  std::size_t size() const { return nodes_.size(); }

  /// A down node neither sends nor receives; deliveries to it are dropped.
  void set_down(NodeId id, bool down) { nodes_.at(id).down = down; }
  bool is_down(NodeId id) const { return nodes_.at(id).down; }

  /// Holds matching messages for an extra `hold`. Holds are finite, so
  /// delivery stays eventual.
  void add_targeted_delay(Predicate pred, SimTime hold) {
    targeted_.emplace_back(std::move(pred), hold);
  }

  void send(NodeId from, NodeId to, Payload payload) { dispatch(from, to, std::move(payload), sched_.now()); }

  /// Sequential sends: the k-th message (1-based) leaves k*stagger after the
  /// sender's previous broadcast finished.
  template <class Make>
  void broadcast(NodeId from, const std::vector<NodeId>& to, Make make) {
    auto& node = nodes_.at(from);
    SimTime base = std::max(sched_.now(), node.busy_until);
    SimTime departure = base;
    for (NodeId dst : to) {
      departure += policy_.stagger;
      dispatch(from, dst, make(dst), departure);
    }
    node.busy_until = departure;
  }

  std::uint64_t sent() const { return sent_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t dropped() const { return dropped_; }
  /// Messages between live nodes still waiting for delivery.
  std::uint64_t in_flight() const { return sent_ - delivered_ - dropped_; }

 private:
  struct Node {
    std::string name;
    Handler handler;
    bool down;
    SimTime busy_until;
  };

  void dispatch(NodeId from, NodeId to, Payload payload, SimTime departure) {
    if (nodes_.at(from).down) return;
    ++sent_;
    SimTime delay = policy_.rtt / 2;
    if (policy_.jitter > 0) delay += uniform(policy_.jitter);
    if (policy_.reorder_max_hold > 0) delay += uniform(policy_.reorder_max_hold);
    for (const auto& [pred, hold] : targeted_) {
      if (pred(from, to, payload)) delay += hold;
    }
    SimTime when = departure + delay;
    auto key = std::make_pair(from, to);
    auto& last = last_delivery_[key];
    when = std::max(when, last);
    last = when;
    std::string summary = summarize_ ? summarize_(payload) : std::string();
    trace_.record(sched_.now(), "send", nodes_[from].name, nodes_[to].name, summary);
    sched_.at(when, [this, from, to, p = std::move(payload), s = std::move(summary)]() {
      auto& node = nodes_.at(to);
      if (node.down) {
        ++dropped_;
        trace_.record(sched_.now(), "drop", nodes_[from].name, node.name, s);
        return;
      }
      ++delivered_;
      trace_.record(sched_.now(), "deliver", nodes_[from].name, node.name, s);
      if (node.handler) node.handler(from, p);
    });
  }

  SimTime uniform(SimTime max) {
    std::uniform_int_distribution<SimTime> d(0, max);
    return d(rng_);
  }

  Scheduler& sched_;
  Trace& trace_;
  NetPolicy policy_;
  std::mt19937_64 rng_;
  Summarizer summarize_;
  std::vector<Node> nodes_;
  std::vector<std::pair<Predicate, SimTime>> targeted_;
  std::map<std::pair<NodeId, NodeId>, SimTime> last_delivery_;
  std::uint64_t sent_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
};

}  // namespace brick
