#include "brick/netsim.hpp"

#include <nlohmann/json.hpp>

namespace brick {

void Scheduler::at(SimTime when, Task task) {
  if (when < now_) when = now_;
  queue_.push(Item{when, next_seq_++, std::move(task)});
}

bool Scheduler::step() {
  if (queue_.empty()) return false;
  // priority_queue::top is const; the task is moved out through a copy of the
  // handle before popping.
  Item item = std::move(const_cast<Item&>(queue_.top()));
  queue_.pop();
  now_ = item.when;
  ++processed_;
  item.task();
  return true;
}

std::size_t Scheduler::run(SimTime limit, const std::function<bool()>& stop) {
  std::size_t n = 0;
  while (!queue_.empty() && queue_.top().when <= limit) {
    if (stop && stop()) break;
    step();
    ++n;
  }
  return n;
}

std::optional<SimTime> Scheduler::next_time() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().when;
}

std::string trace_line(const TraceEvent& e) {
  nlohmann::json j;
  j["time_ms"] = to_ms(e.time);
  j["kind"] = e.kind;
  j["from"] = e.from;
  j["to"] = e.to;
  j["summary"] = e.summary;
  return j.dump();
}

void Trace::record(SimTime time, std::string_view kind, std::string_view from, std::string_view to,
                   std::string summary) {
  ByteWriter w;
  w.blob(digest_).u64(static_cast<std::uint64_t>(time));
  auto put = [&](std::string_view s) {
    w.var({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  };
  put(kind);
  put(from);
  put(to);
  put(summary);
  digest_ = hash(w.bytes());
  ++count_;
  ++counts_[std::string(kind)];
  if (keep_) {
    events_.push_back(TraceEvent{time, std::string(kind), std::string(from), std::string(to),
                                 std::move(summary)});
  }
}

void Trace::write_jsonl(std::ostream& out) const {
  for (const auto& e : events_) out << trace_line(e) << '\n';
}

}  // namespace brick
