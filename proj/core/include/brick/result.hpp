#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace brick {

enum class Errc {
  // channel_core / party
  ConservationViolation,
  NonMonotoneSeq,
  MissingCounterpartySignature,
  BadCommitment,
  RejectedByPolicy,
  UpdateInFlight,
  MissingState,
  // ledger
  BadCommitteeSize,
  BadThreshold,
  OutOfOrderFunding,
  DoubleFunding,
  WrongCollateralAmount,
  UnknownWarden,
  UnknownActor,
  WrongPhase,
  AlreadyWithdrawn,
  NotFullyFunded,
  OverClaim,
  WrongCaller,
  BadSignature,
  DuplicateClaim,
  InsufficientClaims,
  WrongState,
  BadCommitSignature,
  InvalidProof,
  SlashedWarden,
  AlreadyRedeemed,
  WrongMode,
  InvalidRequest,
  MalformedTransaction,
  UnknownContract,
  // warden
  StaleOrGapSeq,
  BadSignatures,
  InsufficientFee,
  IgnoredAfterClose,
  NothingStored,
  Unresponsive,
  // baseline
  LateDispute,
  NotNewer,
  // scenario / incentives
  ConfigInvalid,
  ReconciliationMismatch,
};

std::string_view to_string(Errc code);

struct Error {
  Errc code;
  std::string detail;

  Error(Errc c) : code(c) {}  // NOLINT(google-explicit-constructor)
  Error(Errc c, std::string d) : code(c), detail(std::move(d)) {}

  std::string message() const;
  friend bool operator==(const Error& e, Errc c) { return e.code == c; }
};

// Value-or-error return used for every fallible protocol operation. Protocol
// rejections are expected outcomes here, not exceptional conditions.
template <class T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Result(Error e) : v_(std::move(e)) {}      // NOLINT(google-explicit-constructor)
  Result(Errc c) : v_(Error{c}) {}           // NOLINT(google-explicit-constructor)

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  T& value() & { return std::get<T>(v_); }
  const T& value() const& { return std::get<T>(v_); }
  T&& value() && { return std::get<T>(std::move(v_)); }
  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

  const Error& error() const { return std::get<Error>(v_); }
  Errc code() const { return error().code; }

 private:
  std::variant<T, Error> v_;
};

template <>
class [[nodiscard]] Result<void> {
 public:
  Result() = default;
  Result(Error e) : err_(std::move(e)), failed_(true) {}  // NOLINT(google-explicit-constructor)
  Result(Errc c) : err_(c), failed_(true) {}              // NOLINT(google-explicit-constructor)

  bool ok() const { return !failed_; }
  explicit operator bool() const { return ok(); }
  const Error& error() const { return err_; }
  Errc code() const { return err_.code; }

 private:
  Error err_{Errc::WrongPhase};
  bool failed_ = false;
};

using Status = Result<void>;

}  // namespace brick
