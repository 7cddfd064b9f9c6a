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

#ifndef AIRLOCK_TPM_HPP_
#define AIRLOCK_TPM_HPP_

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "crypto.hpp"
#include "errors.hpp"

namespace airlock::tpm {

using crypto::Digest;

inline constexpr size_t kNumPcrs = 24;

// Fixed PCR allocation map: firmware stages, bootloader stages, downloaded
// payloads. Whitelists and quotes select exactly these three registers.
inline constexpr uint8_t kPcrFirmware = 0;
inline constexpr uint8_t kPcrBootloader = 4;
inline constexpr uint8_t kPcrPayload = 7;
inline const std::set<uint8_t> kQuoteSelection{kPcrFirmware, kPcrBootloader,
                                               kPcrPayload};

using Nonce = std::array<uint8_t, 16>;

// Bank of 24 platform configuration registers. Registers change only through
// extend(); reset() returns every register to the all-zero digest.
class PcrBank {
 public:
  void reset();
  void extend(uint8_t index, const Digest& d);  // throws on index > 23
  const Digest& at(uint8_t index) const;
  const std::array<Digest, kNumPcrs>& registers() const { return regs_; }
  void set(uint8_t index, const Digest& d);  // persistence restore only

  bool operator==(const PcrBank&) const = default;

 private:
  std::array<Digest, kNumPcrs> regs_{};
};

struct Quote {
  Nonce nonce{};
  std::vector<uint8_t> selection;  // ascending PCR indices
  std::vector<Digest> values;      // one per selected index, in index order
  Bytes signature;                 // AIK signature over quote_payload()
};

// Canonical quote serialization (bit-exact, what the signature covers):
// 16-byte nonce || 1-byte count || ascending 1-byte indices || 32-byte
// digests in index order.
Bytes quote_payload(const Nonce& nonce, const std::vector<uint8_t>& selection,
                    const std::vector<Digest>& values);

// Per-node TPM: endorsement keypair (decryption), attestation identity
// keypair (signing). Private halves never leave this class; both keypairs
// are derived from the 32-byte seed, which the owning node persists.
class TpmIdentity {
 public:
  TpmIdentity(std::string uuid, const Key32& seed);

  const std::string& uuid() const { return uuid_; }
  const Bytes& ek_pub() const { return ek_.pk; }
  const Bytes& aik_pub() const { return aik_.pk; }

  Result<Quote> quote(const PcrBank& bank, const Nonce& nonce,
                      const std::set<uint8_t>& selection) const;

  // Decrypts an enrollment challenge sealed to this EK; returns the secret
  // iff the challenge binds this TPM's AIK.
  Result<Bytes> activate_credential(std::span<const uint8_t> ciphertext) const;

 private:
  std::string uuid_;
  crypto::BoxKeypair ek_;
  crypto::SignKeypair aik_;
};

// Registrar-side half of credential activation: seals (secret || H(aik_pub))
// to the EK public key.
Bytes make_credential(const Bytes& ek_pub, const Bytes& aik_pub,
                      const Key32& secret);

// True iff the signature verifies over the canonical payload under aik_pub.
// Malformed quotes (bad sizes, unsorted/duplicate/out-of-range selection)
// return false.
bool verify_quote_signature(const Bytes& aik_pub, const Quote& q);

}  // namespace airlock::tpm

#endif  // AIRLOCK_TPM_HPP_
