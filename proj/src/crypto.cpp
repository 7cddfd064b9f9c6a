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

#include "crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace airlock {

std::string to_hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
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
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<uint8_t>((hi << 4) | lo));
  }
  return out;
}

}  // namespace airlock

namespace airlock::crypto {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("sodium_init failed");
}

}  // namespace

std::string Digest::hex() const { return to_hex(v); }

std::optional<Digest> Digest::from_hex(std::string_view hex) {
  auto raw = airlock::from_hex(hex);
  if (!raw || raw->size() != 32) return std::nullopt;
  Digest d;
  std::memcpy(d.v.data(), raw->data(), 32);
  return d;
}

Digest sha256(std::span<const uint8_t> data) {
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.v.data(), data.data(), data.size());
  return d;
}

Digest sha256(std::string_view data) {
  return sha256(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

Digest Rng::block() {
  uint8_t buf[16];
  for (int i = 0; i < 8; ++i) {
    buf[i] = static_cast<uint8_t>(seed_ >> (8 * i));
    buf[8 + i] = static_cast<uint8_t>(counter_ >> (8 * i));
  }
  ++counter_;
  return sha256(std::span<const uint8_t>(buf, sizeof(buf)));
}

uint64_t Rng::next_u64() {
  Digest d = block();
  uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(d.v[i]) << (8 * i);
  return x;
}

size_t Rng::pick(size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::pick(0)");
  return static_cast<size_t>(next_u64() % n);
}

Bytes Rng::bytes(size_t n) {
  Bytes out;
  out.reserve(n);
  while (out.size() < n) {
    Digest d = block();
    size_t take = std::min<size_t>(32, n - out.size());
    out.insert(out.end(), d.v.begin(), d.v.begin() + take);
  }
  return out;
}

Key32 Rng::key32() {
  Key32 k;
  Digest d = block();
  std::memcpy(k.data(), d.v.data(), 32);
  return k;
}

std::array<uint8_t, 16> Rng::nonce16() {
  std::array<uint8_t, 16> n;
  Digest d = block();
  std::memcpy(n.data(), d.v.data(), 16);
  return n;
}

SignKeypair sign_keypair(const Key32& seed) {
  ensure_sodium();
  SignKeypair kp;
  kp.pk.resize(crypto_sign_PUBLICKEYBYTES);
  kp.sk.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), seed.data());
  return kp;
}

Bytes sign_detached(const Bytes& sk, std::span<const uint8_t> msg) {
  ensure_sodium();
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk.data());
  return sig;
}

bool sign_verify(const Bytes& pk, std::span<const uint8_t> msg,
                 std::span<const uint8_t> sig) {
  ensure_sodium();
  if (pk.size() != crypto_sign_PUBLICKEYBYTES || sig.size() != crypto_sign_BYTES)
    return false;
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(),
                                     pk.data()) == 0;
}

BoxKeypair box_keypair(const Key32& seed) {
  ensure_sodium();
  BoxKeypair kp;
  kp.pk.resize(crypto_box_PUBLICKEYBYTES);
  kp.sk.resize(crypto_box_SECRETKEYBYTES);
  crypto_box_seed_keypair(kp.pk.data(), kp.sk.data(), seed.data());
  return kp;
}

Bytes sealed_box(const Bytes& pk, std::span<const uint8_t> msg) {
  ensure_sodium();
  if (pk.size() != crypto_box_PUBLICKEYBYTES)
    throw std::invalid_argument("sealed_box: bad public key size");
  Bytes ct(msg.size() + crypto_box_SEALBYTES);
  crypto_box_seal(ct.data(), msg.data(), msg.size(), pk.data());
  return ct;
}

std::optional<Bytes> sealed_open(const BoxKeypair& kp,
                                 std::span<const uint8_t> ct) {
  ensure_sodium();
  if (ct.size() < crypto_box_SEALBYTES) return std::nullopt;
  Bytes msg(ct.size() - crypto_box_SEALBYTES);
  if (crypto_box_seal_open(msg.data(), ct.data(), ct.size(), kp.pk.data(),
                           kp.sk.data()) != 0)
    return std::nullopt;
  return msg;
}

Bytes secretbox_wrap(const Key32& key, std::span<const uint8_t> msg, Rng& rng) {
  ensure_sodium();
  Bytes nonce = rng.bytes(crypto_secretbox_NONCEBYTES);
  Bytes out(crypto_secretbox_NONCEBYTES + msg.size() + crypto_secretbox_MACBYTES);
  std::memcpy(out.data(), nonce.data(), nonce.size());
  crypto_secretbox_easy(out.data() + nonce.size(), msg.data(), msg.size(),
                        nonce.data(), key.data());
  return out;
}

std::optional<Bytes> secretbox_unwrap(const Key32& key,
                                      std::span<const uint8_t> ct) {
  ensure_sodium();
  if (ct.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES)
    return std::nullopt;
  const uint8_t* nonce = ct.data();
  const uint8_t* box = ct.data() + crypto_secretbox_NONCEBYTES;
  size_t box_len = ct.size() - crypto_secretbox_NONCEBYTES;
  Bytes msg(box_len - crypto_secretbox_MACBYTES);
  if (crypto_secretbox_open_easy(msg.data(), box, box_len, nonce, key.data()) !=
      0)
    return std::nullopt;
  return msg;
}

}  // namespace airlock::crypto
