#pragma once

// Hashing, Ed25519 signatures and the canonical byte encoding shared by every
// other module. All signed plaintexts are built with ByteWriter so that the
// contract, parties and wardens recompute identical bytes.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace brick {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

template <class Tag, std::size_t N>
struct Blob {
  static constexpr std::size_t size = N;
  std::array<std::uint8_t, N> bytes{};

  ByteView view() const { return {bytes.data(), bytes.size()}; }
  bool is_zero() const {
    for (auto b : bytes) {
      if (b != 0) return false;
    }
    return true;
  }
  std::string hex() const;
  static std::optional<Blob> from_hex(std::string_view hex);

  auto operator<=>(const Blob&) const = default;
};

struct DigestTag {};
struct PublicKeyTag {};
struct SignatureTag {};
struct SeedTag {};
struct SaltTag {};
struct ChannelIdTag {};

using Digest = Blob<DigestTag, 32>;
using PublicKey = Blob<PublicKeyTag, 32>;
using Signature = Blob<SignatureTag, 64>;
using Seed = Blob<SeedTag, 32>;
using Salt = Blob<SaltTag, 32>;
/// The contract's unique address; included in every signed plaintext.
using ChannelId = Blob<ChannelIdTag, 32>;

std::string to_hex(ByteView data);
std::optional<Bytes> from_hex(std::string_view hex);

template <class Tag, std::size_t N>
std::string Blob<Tag, N>::hex() const {
  return to_hex(view());
}

template <class Tag, std::size_t N>
std::optional<Blob<Tag, N>> Blob<Tag, N>::from_hex(std::string_view hex) {
  auto raw = ::brick::from_hex(hex);
  if (!raw || raw->size() != N) return std::nullopt;
  Blob out;
  for (std::size_t i = 0; i < N; ++i) out.bytes[i] = (*raw)[i];
  return out;
}

class KeyPair {
 public:
  const PublicKey& public_key() const { return public_; }

 private:
  friend KeyPair keygen(const Seed& seed);
  friend Signature sign(const KeyPair& key, ByteView message);

  PublicKey public_;
  std::array<std::uint8_t, 64> secret_{};
};

/// SHA-256.
Digest hash(ByteView data);
/// Deterministic Ed25519 keypair from a 32-byte seed.
KeyPair keygen(const Seed& seed);
Signature sign(const KeyPair& key, ByteView message);
bool verify(const PublicKey& pk, ByteView message, const Signature& sig);

/// Seed derived from a run seed and a label; used to give every actor a
/// reproducible key.
Seed derive_seed(std::uint64_t run_seed, std::string_view label, std::uint64_t index);
/// First eight bytes of derive_seed, big-endian; seeds for the simulation's RNGs.
std::uint64_t derive_u64(std::uint64_t run_seed, std::string_view label, std::uint64_t index = 0);

// Canonical encoding: integers are 8-byte big-endian, fixed-width values are
// raw bytes, every message starts with its ASCII tag.
class ByteWriter {
 public:
  ByteWriter& tag(std::string_view t);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& raw(ByteView data);
  template <class T, std::size_t N>
  ByteWriter& blob(const Blob<T, N>& b) {
    return raw(b.view());
  }
  /// Length-prefixed byte string.
  ByteWriter& var(ByteView data);

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  bool expect_tag(std::string_view t);
  bool peek_tag(std::string_view t) const;
  std::uint64_t u64();
  std::uint8_t u8();
  template <class T, std::size_t N>
  Blob<T, N> blob() {
    Blob<T, N> out;
    if (!take(N)) return out;
    for (std::size_t i = 0; i < N; ++i) out.bytes[i] = data_[pos_ - N + i];
    return out;
  }
  Bytes var();

  bool ok() const { return ok_; }
  void fail() { ok_ = false; }
  /// True when every byte was consumed and no read failed.
  bool finish() const { return ok_ && pos_ == data_.size(); }

 private:
  bool take(std::size_t n);

  ByteView data_;
  std::size_t pos_ = 0;
  bool ok_ = true;
};

}  // namespace brick
