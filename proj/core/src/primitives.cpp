#include "brick/primitives.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>
#include <unordered_set>

#include "brick/result.hpp"

namespace brick {

namespace {

void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
    return true;
  }();
  (void)ready;
}

struct DigestHasher {
  std::size_t operator()(const Digest& d) const {
    std::size_t h;
    std::memcpy(&h, d.bytes.data(), sizeof(h));
    return h;
  }
};

// Successful verifications keyed by H(pk || sig || msg). Verification is a pure
// function, so remembering positive answers never changes a result.
constexpr std::size_t kVerifyCacheLimit = 1u << 15;
thread_local std::unordered_set<Digest, DigestHasher> verified_cache;

Digest verify_key(const PublicKey& pk, ByteView message, const Signature& sig) {
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  crypto_hash_sha256_update(&st, pk.bytes.data(), pk.bytes.size());
  crypto_hash_sha256_update(&st, sig.bytes.data(), sig.bytes.size());
  crypto_hash_sha256_update(&st, message.data(), message.size());
  Digest out;
  crypto_hash_sha256_final(&st, out.bytes.data());
  return out;
}

}  // namespace

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::ConservationViolation: return "conservation-violation";
    case Errc::NonMonotoneSeq: return "non-monotone-seq";
    case Errc::MissingCounterpartySignature: return "missing-counterparty-signature";
    case Errc::BadCommitment: return "bad-commitment";
    case Errc::RejectedByPolicy: return "rejected-by-policy";
    case Errc::UpdateInFlight: return "update-in-flight";
    case Errc::MissingState: return "missing-state";
    case Errc::BadCommitteeSize: return "bad-committee-size";
    case Errc::BadThreshold: return "bad-threshold";
    case Errc::OutOfOrderFunding: return "out-of-order-funding";
    case Errc::DoubleFunding: return "double-funding";
    case Errc::WrongCollateralAmount: return "wrong-collateral-amount";
    case Errc::UnknownWarden: return "unknown-warden";
    case Errc::UnknownActor: return "unknown-actor";
    case Errc::WrongPhase: return "wrong-phase";
    case Errc::AlreadyWithdrawn: return "already-withdrawn";
    case Errc::NotFullyFunded: return "not-fully-funded";
    case Errc::OverClaim: return "over-claim";
    case Errc::WrongCaller: return "wrong-caller";
    case Errc::BadSignature: return "bad-signature";
    case Errc::DuplicateClaim: return "duplicate-claim";
    case Errc::InsufficientClaims: return "insufficient-claims";
    case Errc::WrongState: return "wrong-state";
    case Errc::BadCommitSignature: return "bad-commit-signature";
    case Errc::InvalidProof: return "invalid-proof";
    case Errc::SlashedWarden: return "slashed-warden";
    case Errc::AlreadyRedeemed: return "already-redeemed";
    case Errc::WrongMode: return "wrong-mode";
    case Errc::InvalidRequest: return "invalid-request";
    case Errc::MalformedTransaction: return "malformed-transaction";
    case Errc::UnknownContract: return "unknown-contract";
    case Errc::StaleOrGapSeq: return "stale-or-gap-seq";
    case Errc::BadSignatures: return "bad-signatures";
    case Errc::InsufficientFee: return "insufficient-fee";
    case Errc::IgnoredAfterClose: return "ignored-after-close";
    case Errc::NothingStored: return "nothing-stored";
    case Errc::Unresponsive: return "unresponsive";
    case Errc::LateDispute: return "late-dispute";
    case Errc::NotNewer: return "not-newer";
    case Errc::ConfigInvalid: return "config-invalid";
    case Errc::ReconciliationMismatch: return "reconciliation-mismatch";
  }
  return "unknown-error";
}

std::string Error::message() const {
  std::string out(to_string(code));
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

Digest hash(ByteView data) {
  ensure_sodium();
  Digest out;
  crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
  return out;
}

KeyPair keygen(const Seed& seed) {
  ensure_sodium();
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_.bytes.data(), kp.secret_.data(), seed.bytes.data());
  return kp;
}

Signature sign(const KeyPair& key, ByteView message) {
  ensure_sodium();
  Signature sig;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                       key.secret_.data());
  return sig;
}

bool verify(const PublicKey& pk, ByteView message, const Signature& sig) {
  ensure_sodium();
  Digest key = verify_key(pk, message, sig);
  if (verified_cache.contains(key)) return true;
  bool good = crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                          pk.bytes.data()) == 0;
  if (good) {
    if (verified_cache.size() >= kVerifyCacheLimit) verified_cache.clear();
    verified_cache.insert(key);
  }
  return good;
}

Seed derive_seed(std::uint64_t run_seed, std::string_view label, std::uint64_t index) {
  ByteWriter w;
  w.tag("BRICK/seed").u64(run_seed).var({reinterpret_cast<const std::uint8_t*>(label.data()),
                                         label.size()}).u64(index);
  Digest d = hash(w.bytes());
  Seed s;
  s.bytes = d.bytes;
  return s;
}

std::uint64_t derive_u64(std::uint64_t run_seed, std::string_view label, std::uint64_t index) {
  Seed s = derive_seed(run_seed, label, index);
  std::uint64_t w = 0;
  for (std::size_t i = 0; i < 8; ++i) w = (w << 8) | s.bytes[i];
  return w;
}

ByteWriter& ByteWriter::tag(std::string_view t) {
  out_.insert(out_.end(), t.begin(), t.end());
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  return *this;
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::raw(ByteView data) {
  out_.insert(out_.end(), data.begin(), data.end());
  return *this;
}

ByteWriter& ByteWriter::var(ByteView data) {
  u64(data.size());
  return raw(data);
}

bool ByteReader::take(std::size_t n) {
  if (!ok_ || data_.size() - pos_ < n) {
    ok_ = false;
    return false;
  }
  pos_ += n;
  return true;
}

bool ByteReader::peek_tag(std::string_view t) const {
  if (!ok_ || data_.size() - pos_ < t.size()) return false;
  return std::memcmp(data_.data() + pos_, t.data(), t.size()) == 0;
}

bool ByteReader::expect_tag(std::string_view t) {
  if (!peek_tag(t)) {
    ok_ = false;
    return false;
  }
  pos_ += t.size();
  return true;
}

std::uint64_t ByteReader::u64() {
  if (!take(8)) return 0;
  std::uint64_t v = 0;
  for (std::size_t i = pos_ - 8; i < pos_; ++i) v = (v << 8) | data_[i];
  return v;
}

std::uint8_t ByteReader::u8() {
  if (!take(1)) return 0;
  return data_[pos_ - 1];
}

Bytes ByteReader::var() {
  std::uint64_t n = u64();
  if (!ok_ || n > data_.size() - pos_) {
    ok_ = false;
    return {};
  }
  Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
            data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return out;
}

}  // namespace brick
