// Copyright 2026 The Airlock Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AIRLOCK_ERRORS_HPP_
#define AIRLOCK_ERRORS_HPP_

#include <cassert>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace airlock {

enum class Err {
  None = 0,
  // tpm / node
  AlreadyPowered,
  NotAwaitingAttestation,
  NotRunning,
  NoSuchStage,
  OutOfRange,
  EmptySelection,
  ActivationFailed,
  // attestation services
  AlreadyEnrolled,
  EnrollmentFailed,
  NoSuchNode,
  NoSuchEntry,
  NoPendingRound,
  KeyRefused,
  // isolation
  NoFreeNodes,
  NoVlansAvailable,
  Forbidden,
  NotAMember,
  AlreadyMember,
  NoSuchNetwork,
  NetworkNotEmpty,
  // provisioning
  NoSuchImage,
  HasClones,
  InUse,
  AlreadyAttached,
  NotAttached,
  FrozenImage,
  ImageLocked,
  UnlockFailed,
  NotEncrypted,
  // orchestration
  InvalidTransition,
  DuplicateId,
  // config / persistence
  ParseError,
  ChecksumMismatch,
  FileExists,
  IoError,
  InvalidConfig,
  Internal,
};

const char* err_name(Err e);

// Minimal expected-or-error carrier used by fallible service operations.
// Contract violations (programming errors) throw instead.
template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : value_(std::move(value)), err_(Err::None) {}
  Result(Err e, std::string msg = "") : err_(e), msg_(std::move(msg)) {
    assert(e != Err::None);
  }

  explicit operator bool() const { return err_ == Err::None; }
  const T& value() const& {
    assert(err_ == Err::None);
    return *value_;
  }
  T& value() & {
    assert(err_ == Err::None);
    return *value_;
  }
  T take() && {
    assert(err_ == Err::None);
    return std::move(*value_);
  }
  Err error() const { return err_; }
  const std::string& message() const { return msg_; }
  std::string describe() const {
    std::string s = err_name(err_);
    if (!msg_.empty()) s += ": " + msg_;
    return s;
  }

 private:
  std::optional<T> value_;
  Err err_;
  std::string msg_;
};

template <>
class [[nodiscard]] Result<void> {
 public:
  Result() : err_(Err::None) {}
  Result(Err e, std::string msg = "") : err_(e), msg_(std::move(msg)) {
    assert(e != Err::None);
  }

  explicit operator bool() const { return err_ == Err::None; }
  Err error() const { return err_; }
  const std::string& message() const { return msg_; }
  std::string describe() const {
    std::string s = err_name(err_);
    if (!msg_.empty()) s += ": " + msg_;
    return s;
  }

 private:
  Err err_;
  std::string msg_;
};

inline Result<void> ok() { return Result<void>(); }

// For service calls whose failure would mean a broken internal invariant,
// not an expected outcome.
template <typename T>
T must(Result<T> r) {
  if (!r) throw std::logic_error(r.describe());
  return std::move(r).take();
}
inline void must(Result<void> r) {
  if (!r) throw std::logic_error(r.describe());
}

}  // namespace airlock

#endif  // AIRLOCK_ERRORS_HPP_
