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

#ifndef AIRLOCK_ATTESTATION_HPP_
#define AIRLOCK_ATTESTATION_HPP_

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crypto.hpp"
#include "errors.hpp"
#include "tpm.hpp"
#include "trace.hpp"

namespace airlock::attest {

using crypto::Digest;

enum class EnrollState { Pending, Enrolled };

// Node-to-TPM mapping. AIKs become visible to verifiers only once the
// credential-activation round trip has proven EK-AIK co-residency.
class Registrar {
 public:
  explicit Registrar(TraceCollector& trace) : trace_(trace) {}

  Result<Bytes> register_node(const std::string& uuid, const Bytes& ek_pub,
                              const Bytes& aik_pub, crypto::Rng& rng);
  Result<void> confirm_enrollment(const std::string& uuid,
                                  std::span<const uint8_t> secret);

  // Enrolled AIK for a uuid; nullopt while Pending or unknown.
  std::optional<Bytes> enrolled_aik(const std::string& uuid) const;
  bool has_entry(const std::string& uuid) const;
  bool is_enrolled(const std::string& uuid) const;

  struct Entry {
    Bytes ek_pub;
    Bytes aik_pub;
    EnrollState state;
  };
  const std::map<std::string, Entry>& entries() const { return entries_; }
  const std::map<std::string, Key32>& pending_challenges() const {
    return pending_;
  }
  // Persistence restore.
  void restore_entry(const std::string& uuid, Entry e);
  void restore_challenge(const std::string& uuid, const Key32& secret);

 private:
  std::map<std::string, Entry> entries_;
  std::map<std::string, Key32> pending_;
  TraceCollector& trace_;
};

// Named golden measurement sequences. Replay folds the expected event list
// through extend semantics, from a reset bank.
class Whitelist {
 public:
  using EventList = std::vector<std::pair<uint8_t, Digest>>;

  void add_entry(const std::string& name, EventList events);
  bool has(const std::string& name) const;
  Result<std::map<uint8_t, Digest>> replay_golden(const std::string& name) const;
  const std::map<std::string, EventList>& entries() const { return entries_; }

  // File format: `entry <name>` followed by `<pcr_index> <64-hex-digest>`
  // lines in measurement order. '#' starts a comment.
  static Result<Whitelist> parse(const std::string& text);
  std::string serialize() const;

 private:
  std::map<std::string, EventList> entries_;
};

enum class FailReason {
  None,
  BadSignature,
  UnknownAik,
  NonceMismatch,
  MeasurementMismatch,
  NotEnrolled,
  NoQuote,
};

const char* fail_reason_name(FailReason r);
std::optional<FailReason> fail_reason_from_name(std::string_view name);

struct AttestationResult {
  bool pass = false;
  FailReason reason = FailReason::None;
  int pcr_index = -1;  // set for MeasurementMismatch

  static AttestationResult passed() { return {true, FailReason::None, -1}; }
  static AttestationResult failed(FailReason r, int pcr = -1) {
    return {false, r, pcr};
  }
  std::string describe() const;
};

// Tenant-operated verifier: whitelist replay, quote checks, key bootstrap,
// periodic polling. One record per node uuid; verdict history is totally
// ordered per uuid.
class Verifier {
 public:
  Verifier(const Whitelist& whitelist, const Registrar& registrar,
           TraceCollector& trace, crypto::Rng& rng)
      : whitelist_(whitelist), registrar_(registrar), trace_(trace), rng_(rng) {}

  void set_policy(const std::string& uuid, const std::string& policy_name);
  // New power cycle: forgets the round state and any unreleased share.
  void begin_cycle(const std::string& uuid);

  // How many simulation ticks between polls (default: every tick).
  uint64_t poll_interval() const { return poll_interval_; }
  void set_poll_interval(uint64_t ticks) {
    poll_interval_ = ticks == 0 ? 1 : ticks;
  }

  tpm::Nonce issue_nonce(const std::string& uuid);
  Result<AttestationResult> attest_once(const std::string& uuid,
                                        const tpm::Quote& q);
  // Verifier share V, released at most once per power cycle, only after Pass.
  Result<Key32> bootstrap_key(const std::string& uuid);
  void invalidate_key(const std::string& uuid);

  using QuoteFn = std::function<std::optional<tpm::Quote>(
      const std::string& uuid, const tpm::Nonce& nonce)>;
  std::vector<std::pair<std::string, AttestationResult>> poll_tick(
      const std::vector<std::string>& uuids, const QuoteFn& fetch_quote);

  struct Record {
    std::string policy;
    std::optional<tpm::Nonce> last_nonce;
    std::optional<AttestationResult> last_result;
    std::optional<Key32> verifier_share;
    bool share_released = false;
    bool key_invalidated = false;
    uint64_t cycle = 0;
  };
  const Record* record(const std::string& uuid) const;
  const std::map<std::string, Record>& records() const { return records_; }
  void restore_record(const std::string& uuid, Record r);  // persistence

 private:
  Record& rec(const std::string& uuid) { return records_[uuid]; }

  const Whitelist& whitelist_;
  const Registrar& registrar_;
  TraceCollector& trace_;
  crypto::Rng& rng_;
  uint64_t poll_interval_ = 1;
  std::map<std::string, Record> records_;
  std::set<Bytes> used_nonces_;
};

}  // namespace airlock::attest

#endif  // AIRLOCK_ATTESTATION_HPP_
