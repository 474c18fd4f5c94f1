#pragma once

// Off-chain messages exchanged between parties, wardens and the auditor.

#include <string>
#include <variant>
#include <vector>

#include "brick/channel.hpp"

namespace brick {

namespace msg {

/// Proposer -> counterparty: the new state with its salt and a half-signed
/// commitment.
struct Propose {
  StateCommitment commitment;
  ChannelState state;
};

/// Counterparty -> proposer: signatures on the commitment and on the
/// announcement.
struct Countersign {
  Seq seq = 0;
  Signature commit_sig;
  Signature ann_sig;
};

/// Proposer -> counterparty: the proposer's announcement signature, which
/// completes the announcement on both sides.
struct AnnSig {
  Seq seq = 0;
  Signature ann_sig;
};

struct Announce {
  Announcement ann;
  FeeTicket ticket;
};

struct Ack {
  WardenAck ack;
};

struct Reject {
  Seq seq = 0;
  Errc code = Errc::StaleOrGapSeq;
};

struct CloseRequest {};

/// Direct request for a cooperative close at the sender's latest state.
struct OptimisticClose {
  Seq seq = 0;
  Coins claimed_a = 0;
};

/// Party -> warden: an old announcement to publish as closing claim.
struct BribeOffer {
  Announcement stale;
  Coins amount = 0;
};

struct HistoryRequest {};

struct History {
  Role role = Role::A;
  std::vector<ChannelState> states;
};

}  // namespace msg

using Message = std::variant<msg::Propose, msg::Countersign, msg::AnnSig, msg::Announce, msg::Ack,
                             msg::Reject, msg::CloseRequest, msg::OptimisticClose,
                             msg::BribeOffer, msg::HistoryRequest, msg::History>;

std::string summarize(const Message& m);

}  // namespace brick
