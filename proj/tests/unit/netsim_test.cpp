#include <sstream>

#include <gtest/gtest.h>

#include "brick/netsim.hpp"

using namespace brick;

TEST(Scheduler, RunsInTimeThenInsertionOrder) {
  Scheduler s;
  std::vector<int> order;
  s.at(30, [&] { order.push_back(3); });
  s.at(10, [&] { order.push_back(1); });
  s.at(10, [&] { order.push_back(2); });
  s.at(50, [&] { order.push_back(5); });
  EXPECT_EQ(s.run(40), 3u);
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(s.now(), 30);
  EXPECT_EQ(s.next_time(), 50);
  s.run(100);
  EXPECT_EQ(order.back(), 5);
  EXPECT_TRUE(s.empty());
}

TEST(Scheduler, PastEventsClampToNowAndStopPredicate) {
  Scheduler s;
  SimTime seen = -1;
  s.at(100, [&] { s.at(5, [&] { seen = s.now(); }); });
  s.run(1000);
  EXPECT_EQ(seen, 100);
  int count = 0;
  for (int i = 0; i < 10; ++i) s.after(1, [&] { ++count; });
  s.run(10000, [&] { return count >= 4; });
  EXPECT_EQ(count, 4);
}

namespace {

struct Rig {
  Scheduler sched;
  Trace trace;
  Network<std::string> net;
  std::vector<std::pair<SimTime, std::string>> got;

  Rig(NetPolicy p, std::uint64_t seed) : net(sched, trace, p, seed, [](const std::string& s) { return s; }) {}
};

std::vector<std::pair<SimTime, std::string>> exchange(NetPolicy p, std::uint64_t seed) {
  Rig r(p, seed);
  auto a = r.net.add_node("a");
  auto b = r.net.add_node("b", [&](std::uint32_t, const std::string& m) { r.got.emplace_back(r.sched.now(), m); });
  for (int i = 0; i < 20; ++i) r.net.send(a, b, "m" + std::to_string(i));
  r.sched.run(from_ms(100000));
  return r.got;
}

}  // namespace

TEST(Network, OneWayDelayIsHalfRtt) {
  NetPolicy p;
  p.rtt = from_ms(100);
  auto got = exchange(p, 1);
  ASSERT_EQ(got.size(), 20u);
  for (const auto& [t, m] : got) EXPECT_EQ(t, from_ms(50));
}

TEST(Network, SameSeedSameDeliveries) {
  NetPolicy p;
  p.jitter = from_ms(30);
  p.reorder_max_hold = from_ms(500);
  EXPECT_EQ(exchange(p, 9), exchange(p, 9));
  EXPECT_NE(exchange(p, 9), exchange(p, 10));
}

TEST(Network, PerLinkFifoUnderJitter) {
  NetPolicy p;
  p.jitter = from_ms(40);
  auto got = exchange(p, 4);
  ASSERT_EQ(got.size(), 20u);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].second, "m" + std::to_string(i));
}

TEST(Network, BroadcastStaggersDepartures) {
  NetPolicy p;
  p.rtt = from_ms(100);
  p.stagger = 224;
  Rig r(p, 1);
  auto src = r.net.add_node("src");
  std::vector<std::uint32_t> dst;
  std::vector<SimTime> at(5, -1);
  for (int i = 0; i < 5; ++i) {
    dst.push_back(r.net.add_node("d", [&, i](std::uint32_t, const std::string&) { at[i] = r.sched.now(); }));
  }
  r.net.broadcast(src, dst, [](std::uint32_t d) { return std::to_string(d); });
  r.sched.run(from_ms(1000));
  for (int i = 0; i < 5; ++i) EXPECT_EQ(at[i], from_ms(50) + 224 * (i + 1)) << i;
}

TEST(Network, TargetedDelayAndDownNodes) {
  NetPolicy p;
  Rig r(p, 1);
  auto a = r.net.add_node("a");
  std::vector<SimTime> at;
  auto b = r.net.add_node("b", [&](std::uint32_t, const std::string&) { at.push_back(r.sched.now()); });
  r.net.add_targeted_delay([](std::uint32_t, std::uint32_t, const std::string& m) { return m == "slow"; },
                           from_ms(1000));
  r.net.send(a, b, "slow");
  r.sched.run(from_ms(10000));
  ASSERT_EQ(at.size(), 1u);
  EXPECT_EQ(at[0], from_ms(1050));

  r.net.set_down(b, true);
  r.net.send(a, b, "lost");
  r.sched.run(from_ms(20000));
  EXPECT_EQ(at.size(), 1u);
  EXPECT_EQ(r.net.dropped(), 1u);
  r.net.set_down(a, true);
  auto sent = r.net.sent();
  r.net.send(a, b, "muted");
  EXPECT_EQ(r.net.sent(), sent);
}

TEST(Trace, DigestCoversEveryEvent) {
  Trace kept(true);
  Trace digest_only(false);
  for (Trace* t : {&kept, &digest_only}) {
    t->record(1, "send", "a", "b", "x");
    t->record(2, "deliver", "a", "b", "x");
  }
  EXPECT_EQ(kept.digest(), digest_only.digest());
  EXPECT_EQ(kept.size(), 2u);
  EXPECT_TRUE(digest_only.events().empty());
  EXPECT_EQ(kept.counts().at("send"), 1u);
  Trace other(false);
  other.record(1, "send", "a", "b", "x");
  other.record(2, "deliver", "a", "b", "y");
  EXPECT_NE(other.digest(), kept.digest());

  std::ostringstream out;
  kept.write_jsonl(out);
  std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_NE(text.find("\"kind\":\"deliver\""), std::string::npos);
}
