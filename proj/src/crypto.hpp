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

#ifndef AIRLOCK_CRYPTO_HPP_
#define AIRLOCK_CRYPTO_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "common.hpp"

namespace airlock::crypto {

// 32-byte measurement hash value (SHA-256 output). Bytewise equality.
struct Digest {
  std::array<uint8_t, 32> v{};

  auto operator<=>(const Digest&) const = default;
  bool is_zero() const {
    for (uint8_t b : v)
      if (b != 0) return false;
    return true;
  }
  std::string hex() const;
  static std::optional<Digest> from_hex(std::string_view hex);
};

Digest sha256(std::span<const uint8_t> data);
Digest sha256(std::string_view data);

// Deterministic counter-mode SHA-256 generator. The (seed, counter) pair is
// the full state, so persisted runs resume the stream exactly.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), counter_(0) {}

  uint64_t next_u64();
  size_t pick(size_t n);  // uniform in [0, n), n > 0
  Bytes bytes(size_t n);
  Key32 key32();
  std::array<uint8_t, 16> nonce16();

  uint64_t seed() const { return seed_; }
  uint64_t counter() const { return counter_; }
  void restore(uint64_t seed, uint64_t counter) {
    seed_ = seed;
    counter_ = counter;
  }

 private:
  Digest block();
  uint64_t seed_;
  uint64_t counter_;
};

// Ed25519 signing (attestation identity keys).
struct SignKeypair {
  Bytes pk;  // 32 bytes
  Bytes sk;  // 64 bytes
};
SignKeypair sign_keypair(const Key32& seed);
Bytes sign_detached(const Bytes& sk, std::span<const uint8_t> msg);
bool sign_verify(const Bytes& pk, std::span<const uint8_t> msg,
                 std::span<const uint8_t> sig);

// X25519 sealed boxes (hybrid public-key encryption for endorsement keys).
struct BoxKeypair {
  Bytes pk;  // 32 bytes
  Bytes sk;  // 32 bytes
};
BoxKeypair box_keypair(const Key32& seed);
Bytes sealed_box(const Bytes& pk, std::span<const uint8_t> msg);
std::optional<Bytes> sealed_open(const BoxKeypair& kp,
                                 std::span<const uint8_t> ct);

// Authenticated symmetric wrap (XSalsa20-Poly1305); output is nonce || box.
Bytes secretbox_wrap(const Key32& key, std::span<const uint8_t> msg, Rng& rng);
std::optional<Bytes> secretbox_unwrap(const Key32& key,
                                      std::span<const uint8_t> ct);

}  // namespace airlock::crypto

#endif  // AIRLOCK_CRYPTO_HPP_
