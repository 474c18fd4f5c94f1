#include "brick/bench.hpp"

#include <cmath>

#include "brick/channel.hpp"
#include "brick/messages.hpp"
#include "brick/warden.hpp"

namespace brick {

double reference_latency_ms(std::uint64_t n) {
  switch (n) {
    case 7: return 113.8;
    case 34: return 118.0;
    case 151: return 133.8;
    default: return 0;
  }
}

BenchRow bench_broadcast(std::uint64_t n, double rtt_ms, SimTime stagger_us) {
  const std::uint64_t f = (n - 1) / 3;
  BenchRow row;
  row.n = n;
  row.t = 2 * f + 1;

  KeyPair ka = keygen(derive_seed(0, "bench-party", 0));
  KeyPair kb = keygen(derive_seed(0, "bench-party", 1));
  ChannelId channel;
  channel.bytes = hash(derive_seed(0, "bench-channel", 0).view()).bytes;
  std::mt19937_64 rng(derive_u64(0, "bench-salt"));
  ChannelState s1{1, 6, 6, draw_salt(rng)};
  ChannelState s2{2, 8, 4, draw_salt(rng)};
  auto c1 = make_commitment(channel, s1, 12, 0, ka, kb);
  auto c2 = make_commitment(channel, s2, 12, 1, ka, kb);
  auto a1 = make_announcement(*c1, ka, kb);
  auto a2 = make_announcement(*c2, ka, kb);

  Scheduler sched;
  Trace trace(false);
  NetPolicy policy;
  policy.rtt = static_cast<SimTime>(std::llround(rtt_ms * 1000.0));
  policy.stagger = stagger_us;
  Network<Message> net(sched, trace, policy, 0, {});

  const PartyKeys parties{ka.public_key(), kb.public_key()};
  WardenConfig wc{channel, parties, Mode::Brick, 1, 4, 1};
  std::vector<Warden> wardens;
  std::vector<std::uint32_t> nodes;
  std::uint64_t acks = 0;
  SimTime quorum_at = -1;
  SimTime all_at = -1;
  const auto party = net.add_node("A", [&](std::uint32_t, const Message& m) {
    if (!std::holds_alternative<msg::Ack>(m)) return;
    ++acks;
    if (acks == row.t) quorum_at = sched.now();
    if (acks == n) all_at = sched.now();
  });
  for (std::uint64_t i = 0; i < n; ++i) {
    wardens.emplace_back(keygen(derive_seed(0, "bench-warden", i)), wc, WardenStrategy{}, *a1);
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    nodes.push_back(net.add_node("W", [&, i](std::uint32_t from, const Message& m) {
      if (auto* a = std::get_if<msg::Announce>(&m)) {
        if (auto ack = wardens[i].on_announcement(a->ann, a->ticket)) net.send(nodes[i], from, msg::Ack{*ack});
      }
    }));
  }

  net.broadcast(party, nodes, [&](std::uint32_t dst) {
    const auto& w = wardens[dst - nodes.front()];
    FeeTicket ticket{channel, ka.public_key(), w.public_key(), 1, {}};
    ticket.sig = sign(ka, ticket.plaintext());
    return Message{msg::Announce{*a2, ticket}};
  });
  sched.run(from_ms(60000));

  row.commit_ms = to_ms(all_at);
  row.quorum_ms = to_ms(quorum_at);
  row.reference_ms = reference_latency_ms(n);
  if (row.reference_ms > 0) row.deviation = (row.commit_ms - row.reference_ms) / row.reference_ms;
  return row;
}

std::vector<BenchRow> bench_table(const std::vector<std::uint64_t>& ns, double rtt_ms, SimTime stagger_us) {
  std::vector<BenchRow> rows;
  for (auto n : ns) rows.push_back(bench_broadcast(n, rtt_ms, stagger_us));
  return rows;
}

SimTime calibrate_stagger(std::uint64_t n, double rtt_ms, double target_ms) {
  return static_cast<SimTime>(std::llround((target_ms - rtt_ms) * 1000.0 / static_cast<double>(n)));
}

nlohmann::json bench_to_json(const std::vector<BenchRow>& rows, double rtt_ms, SimTime stagger_us) {
  auto arr = nlohmann::json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i > 0 && r.n > rows[i - 1].n && r.commit_ms < rows[i - 1].commit_ms) monotone = false;
    nlohmann::json j = {{"n", r.n}, {"t", r.t}, {"commit_ms", r.commit_ms}, {"quorum_ms", r.quorum_ms}};
    if (r.reference_ms > 0) {
      j["reference_ms"] = r.reference_ms;
      j["deviation"] = r.deviation;
    }
    arr.push_back(j);
  }
  return {{"rtt_ms", rtt_ms}, {"stagger_us", stagger_us}, {"rows", arr}, {"monotone", monotone}};
}

}  // namespace brick
