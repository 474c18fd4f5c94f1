#pragma once

// Pure data model of a channel: states, blinded commitments, announcements and
// warden acknowledgements, plus the construction/validation rules of the
// update protocol. Nothing here touches the network or the chain.

#include <cstdint>
#include <optional>
#include <string_view>

#include "brick/primitives.hpp"
#include "brick/result.hpp"

namespace brick {

using Seq = std::uint64_t;
/// Integer base units; balances, fees and collateral all share this unit.
using Coins = std::uint64_t;

enum class Role : std::uint8_t { A = 0, B = 1 };

constexpr Role other(Role r) { return r == Role::A ? Role::B : Role::A; }
std::string_view to_string(Role r);

enum class Mode : std::uint8_t { Brick, BrickPlus };

std::string_view to_string(Mode m);

struct ChannelState {
  Seq seq = 1;
  Coins balance_a = 0;
  Coins balance_b = 0;
  Salt salt;

  Coins total() const { return balance_a + balance_b; }
  Coins balance(Role r) const { return r == Role::A ? balance_a : balance_b; }
  bool operator==(const ChannelState&) const = default;
};

Bytes encode_state(const ChannelState& state);
std::optional<ChannelState> decode_state(ByteView data);
/// H(s_i, r_i): the blinded commitment to a state and its salt.
Digest commit_state(const ChannelState& state);

template <class Rng>
Salt draw_salt(Rng& rng) {
  Salt s;
  for (std::size_t i = 0; i < s.bytes.size(); i += 8) {
    std::uint64_t word = rng();
    for (std::size_t j = 0; j < 8; ++j) s.bytes[i + j] = static_cast<std::uint8_t>(word >> (8 * j));
  }
  return s;
}

/// Every signed message in the protocol. Kinds carrying a digest: Commit
/// (state commitment) and the three hash-chain kinds (chain head).
enum class PlaintextKind : std::uint8_t {
  Commit,
  Announce,
  Ack,
  Close,
  Head,
  ChainedAck,
  ChainedClose,
};

struct Plaintext {
  PlaintextKind kind = PlaintextKind::Announce;
  ChannelId channel;
  Seq seq = 0;
  Digest digest;  // zero for kinds without a digest

  bool has_digest() const;
  bool operator==(const Plaintext&) const = default;
};

Bytes encode(const Plaintext& p);
std::optional<Plaintext> decode_plaintext(ByteView data);

Bytes commit_plaintext(const ChannelId& channel, const Digest& commitment, Seq seq);
/// Announcement plaintext: the sequence number alone, or the chain head when
/// the channel runs hash-chained updates.
Bytes announce_plaintext(const ChannelId& channel, Seq seq, const std::optional<Digest>& head);
Bytes ack_plaintext(const ChannelId& channel, Seq seq, const std::optional<Digest>& head);
Bytes close_plaintext(const ChannelId& channel, Seq seq, const std::optional<Digest>& head);

struct PartyKeys {
  PublicKey a;
  PublicKey b;
  const PublicKey& of(Role r) const { return r == Role::A ? a : b; }
};

struct StateCommitment {
  ChannelId channel;
  Digest commitment;
  Seq seq = 0;
  /// Set for hash-chained channels; the parties then sign the head instead of
  /// the bare commitment.
  std::optional<Digest> head;
  std::optional<Signature> sig_a;
  std::optional<Signature> sig_b;

  Bytes plaintext() const;
  bool fully_signed() const { return sig_a.has_value() && sig_b.has_value(); }
  std::optional<Signature>& sig(Role r) { return r == Role::A ? sig_a : sig_b; }
  const std::optional<Signature>& sig(Role r) const { return r == Role::A ? sig_a : sig_b; }
};

struct Announcement {
  ChannelId channel;
  Seq seq = 0;
  std::optional<Digest> head;
  Signature sig_a;
  Signature sig_b;

  Bytes plaintext() const { return announce_plaintext(channel, seq, head); }
  bool operator==(const Announcement&) const = default;
};

struct WardenAck {
  ChannelId channel;
  Seq seq = 0;
  std::optional<Digest> head;
  PublicKey warden;
  Signature sig;

  Bytes plaintext() const { return ack_plaintext(channel, seq, head); }
  bool operator==(const WardenAck&) const = default;
};

/// Cumulative one-way payment from a party to a warden.
struct FeeTicket {
  ChannelId channel;
  PublicKey payer;
  PublicKey warden;
  Coins cumulative = 0;
  Signature sig;

  Bytes plaintext() const;
  bool operator==(const FeeTicket&) const = default;
};

bool verify_fee_ticket(const FeeTicket& ticket);

/// Both-party signed commitment for a Brick state. `previous_seq` is the
/// sequence number the new state must extend.
Result<StateCommitment> make_commitment(const ChannelId& channel, const ChannelState& state,
                                        Coins total, Seq previous_seq, const KeyPair& key_a,
                                        const KeyPair& key_b);

/// Proposer-only half of make_commitment.
Result<StateCommitment> propose_commitment(const ChannelId& channel, const ChannelState& state,
                                           Coins total, Seq previous_seq, const KeyPair& proposer,
                                           Role proposer_role);

Signature sign_commitment(const StateCommitment& c, const KeyPair& key);
bool verify_commitment_sig(const StateCommitment& c, const PublicKey& pk, const Signature& sig);
bool verify_commitment(const StateCommitment& c, const PartyKeys& parties);

Result<Announcement> make_announcement(const StateCommitment& commitment, const KeyPair& key_a,
                                       const KeyPair& key_b);
Signature sign_announcement(const ChannelId& channel, Seq seq, const std::optional<Digest>& head,
                            const KeyPair& key);
bool verify_announcement(const Announcement& ann, const PartyKeys& parties);
/// True iff both signatures verify and the announcement carries exactly the
/// expected sequence number.
bool validate_announcement(const Announcement& ann, Seq expected_seq, const PartyKeys& parties);

WardenAck make_ack(const Announcement& ann, const KeyPair& warden);
bool verify_ack(const WardenAck& ack);

}  // namespace brick
