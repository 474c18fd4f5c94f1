#include "brick/channel.hpp"

namespace brick {

namespace {

constexpr std::string_view kStateTag = "BRICK/state";
constexpr std::string_view kFeeTag = "BRICK/fee";

std::string_view tag_of(PlaintextKind kind) {
  switch (kind) {
    case PlaintextKind::Commit: return "BRICK/commit";
    case PlaintextKind::Announce: return "BRICK/seq";
    case PlaintextKind::Ack: return "BRICK/ack";
    case PlaintextKind::Close: return "BRICK/close";
    case PlaintextKind::Head: return "BRICK+/head";
    case PlaintextKind::ChainedAck: return "BRICK+/ack";
    case PlaintextKind::ChainedClose: return "BRICK+/close";
  }
  return "";
}

constexpr PlaintextKind kAllKinds[] = {
    PlaintextKind::Commit,     PlaintextKind::Announce,   PlaintextKind::Ack,
    PlaintextKind::Close,      PlaintextKind::Head,       PlaintextKind::ChainedAck,
    PlaintextKind::ChainedClose,
};

}  // namespace

std::string_view to_string(Role r) { return r == Role::A ? "A" : "B"; }

std::string_view to_string(Mode m) { return m == Mode::Brick ? "brick" : "brick+"; }

Bytes encode_state(const ChannelState& state) {
  ByteWriter w;
  w.tag(kStateTag).u64(state.seq).u64(state.balance_a).u64(state.balance_b).blob(state.salt);
  return std::move(w).bytes();
}

std::optional<ChannelState> decode_state(ByteView data) {
  ByteReader r(data);
  r.expect_tag(kStateTag);
  ChannelState s;
  s.seq = r.u64();
  s.balance_a = r.u64();
  s.balance_b = r.u64();
  s.salt = r.blob<SaltTag, 32>();
  if (!r.finish()) return std::nullopt;
  return s;
}

Digest commit_state(const ChannelState& state) { return hash(encode_state(state)); }

bool Plaintext::has_digest() const {
  switch (kind) {
    case PlaintextKind::Commit:
    case PlaintextKind::Head:
    case PlaintextKind::ChainedAck:
    case PlaintextKind::ChainedClose:
      return true;
    default:
      return false;
  }
}

Bytes encode(const Plaintext& p) {
  ByteWriter w;
  w.tag(tag_of(p.kind)).blob(p.channel);
  if (p.has_digest()) w.blob(p.digest);
  w.u64(p.seq);
  return std::move(w).bytes();
}

std::optional<Plaintext> decode_plaintext(ByteView data) {
  for (auto kind : kAllKinds) {
    ByteReader r(data);
    if (!r.expect_tag(tag_of(kind))) continue;
    Plaintext p;
    p.kind = kind;
    p.channel = r.blob<ChannelIdTag, 32>();
    if (p.has_digest()) p.digest = r.blob<DigestTag, 32>();
    p.seq = r.u64();
    if (r.finish()) return p;
  }
  return std::nullopt;
}

Bytes commit_plaintext(const ChannelId& channel, const Digest& commitment, Seq seq) {
  return encode(Plaintext{PlaintextKind::Commit, channel, seq, commitment});
}

Bytes announce_plaintext(const ChannelId& channel, Seq seq, const std::optional<Digest>& head) {
  if (head) return encode(Plaintext{PlaintextKind::Head, channel, seq, *head});
  return encode(Plaintext{PlaintextKind::Announce, channel, seq, {}});
}

Bytes ack_plaintext(const ChannelId& channel, Seq seq, const std::optional<Digest>& head) {
  if (head) return encode(Plaintext{PlaintextKind::ChainedAck, channel, seq, *head});
  return encode(Plaintext{PlaintextKind::Ack, channel, seq, {}});
}

Bytes close_plaintext(const ChannelId& channel, Seq seq, const std::optional<Digest>& head) {
  if (head) return encode(Plaintext{PlaintextKind::ChainedClose, channel, seq, *head});
  return encode(Plaintext{PlaintextKind::Close, channel, seq, {}});
}

Bytes StateCommitment::plaintext() const {
  // In hash-chained mode the parties' agreement is the signature on the head.
  if (head) return announce_plaintext(channel, seq, head);
  return commit_plaintext(channel, commitment, seq);
}

Bytes FeeTicket::plaintext() const {
  ByteWriter w;
  w.tag(kFeeTag).blob(channel).blob(payer).blob(warden).u64(cumulative);
  return std::move(w).bytes();
}

bool verify_fee_ticket(const FeeTicket& ticket) {
  return verify(ticket.payer, ticket.plaintext(), ticket.sig);
}

Result<StateCommitment> propose_commitment(const ChannelId& channel, const ChannelState& state,
                                           Coins total, Seq previous_seq, const KeyPair& proposer,
                                           Role proposer_role) {
  if (state.total() != total) return Errc::ConservationViolation;
  if (state.seq != previous_seq + 1) return Errc::NonMonotoneSeq;
  StateCommitment c;
  c.channel = channel;
  c.commitment = commit_state(state);
  c.seq = state.seq;
  c.sig(proposer_role) = sign_commitment(c, proposer);
  return c;
}

Result<StateCommitment> make_commitment(const ChannelId& channel, const ChannelState& state,
                                        Coins total, Seq previous_seq, const KeyPair& key_a,
                                        const KeyPair& key_b) {
  auto c = propose_commitment(channel, state, total, previous_seq, key_a, Role::A);
  if (!c) return c;
  c->sig_b = sign_commitment(*c, key_b);
  return c;
}

Signature sign_commitment(const StateCommitment& c, const KeyPair& key) {
  return sign(key, c.plaintext());
}

bool verify_commitment_sig(const StateCommitment& c, const PublicKey& pk, const Signature& sig) {
  return verify(pk, c.plaintext(), sig);
}

bool verify_commitment(const StateCommitment& c, const PartyKeys& parties) {
  return c.fully_signed() && verify_commitment_sig(c, parties.a, *c.sig_a) &&
         verify_commitment_sig(c, parties.b, *c.sig_b);
}

Result<Announcement> make_announcement(const StateCommitment& commitment, const KeyPair& key_a,
                                       const KeyPair& key_b) {
  if (!commitment.fully_signed()) return Errc::MissingCounterpartySignature;
  Announcement ann;
  ann.channel = commitment.channel;
  ann.seq = commitment.seq;
  ann.head = commitment.head;
  if (commitment.head) {
    // Hash-chained announcements reuse the signatures on the head.
    ann.sig_a = *commitment.sig_a;
    ann.sig_b = *commitment.sig_b;
  } else {
    ann.sig_a = sign_announcement(ann.channel, ann.seq, ann.head, key_a);
    ann.sig_b = sign_announcement(ann.channel, ann.seq, ann.head, key_b);
  }
  return ann;
}

Signature sign_announcement(const ChannelId& channel, Seq seq, const std::optional<Digest>& head,
                            const KeyPair& key) {
  return sign(key, announce_plaintext(channel, seq, head));
}

bool verify_announcement(const Announcement& ann, const PartyKeys& parties) {
  Bytes pt = ann.plaintext();
  return verify(parties.a, pt, ann.sig_a) && verify(parties.b, pt, ann.sig_b);
}

bool validate_announcement(const Announcement& ann, Seq expected_seq, const PartyKeys& parties) {
  return ann.seq == expected_seq && verify_announcement(ann, parties);
}

WardenAck make_ack(const Announcement& ann, const KeyPair& warden) {
  WardenAck ack;
  ack.channel = ann.channel;
  ack.seq = ann.seq;
  ack.head = ann.head;
  ack.warden = warden.public_key();
  ack.sig = sign(warden, ack.plaintext());
  return ack;
}

bool verify_ack(const WardenAck& ack) { return verify(ack.warden, ack.plaintext(), ack.sig); }

}  // namespace brick
