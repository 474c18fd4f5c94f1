#include "brick/messages.hpp"

#include <fmt/format.h>

namespace brick {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

}  // namespace

std::string summarize(const Message& m) {
  return std::visit(
      overloaded{
          [](const msg::Propose& p) { return fmt::format("propose seq={}", p.state.seq); },
          [](const msg::Countersign& c) { return fmt::format("countersign seq={}", c.seq); },
          [](const msg::AnnSig& a) { return fmt::format("annsig seq={}", a.seq); },
          [](const msg::Announce& a) {
            return fmt::format("announce seq={} fee={}", a.ann.seq, a.ticket.cumulative);
          },
          [](const msg::Ack& a) { return fmt::format("ack seq={}", a.ack.seq); },
          [](const msg::Reject& r) {
            return fmt::format("reject seq={} {}", r.seq, to_string(r.code));
          },
          [](const msg::CloseRequest&) { return std::string("close-request"); },
          [](const msg::OptimisticClose& o) {
            return fmt::format("optimistic-close seq={} a={}", o.seq, o.claimed_a);
          },
          [](const msg::BribeOffer& b) {
            return fmt::format("bribe seq={} amount={}", b.stale.seq, b.amount);
          },
          [](const msg::HistoryRequest&) { return std::string("history-request"); },
          [](const msg::History& h) {
            return fmt::format("history {} states={}", to_string(h.role), h.states.size());
          },
      },
      m);
}

}  // namespace brick
