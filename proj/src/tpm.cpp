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

#include "tpm.hpp"

#include <cstring>
#include <stdexcept>

namespace airlock::tpm {

void PcrBank::reset() { regs_.fill(Digest{}); }

void PcrBank::extend(uint8_t index, const Digest& d) {
  if (index >= kNumPcrs) throw std::out_of_range("PCR index out of range");
  uint8_t buf[64];
  std::memcpy(buf, regs_[index].v.data(), 32);
  std::memcpy(buf + 32, d.v.data(), 32);
  regs_[index] = crypto::sha256(std::span<const uint8_t>(buf, 64));
}

const Digest& PcrBank::at(uint8_t index) const {
  if (index >= kNumPcrs) throw std::out_of_range("PCR index out of range");
  return regs_[index];
}

void PcrBank::set(uint8_t index, const Digest& d) {
  if (index >= kNumPcrs) throw std::out_of_range("PCR index out of range");
  regs_[index] = d;
}

Bytes quote_payload(const Nonce& nonce, const std::vector<uint8_t>& selection,
                    const std::vector<Digest>& values) {
  Bytes out;
  out.reserve(16 + 1 + selection.size() + 32 * values.size());
  out.insert(out.end(), nonce.begin(), nonce.end());
  out.push_back(static_cast<uint8_t>(selection.size()));
  out.insert(out.end(), selection.begin(), selection.end());
  for (const Digest& d : values) out.insert(out.end(), d.v.begin(), d.v.end());
  return out;
}

namespace {

Key32 derive_subseed(const Key32& seed, std::string_view label) {
  Bytes buf(seed.begin(), seed.end());
  buf.insert(buf.end(), label.begin(), label.end());
  Key32 out;
  std::memcpy(out.data(), crypto::sha256(buf).v.data(), 32);
  return out;
}

}  // namespace

TpmIdentity::TpmIdentity(std::string uuid, const Key32& seed)
    : uuid_(std::move(uuid)),
      ek_(crypto::box_keypair(derive_subseed(seed, "ek"))),
      aik_(crypto::sign_keypair(derive_subseed(seed, "aik"))) {}

Result<Quote> TpmIdentity::quote(const PcrBank& bank, const Nonce& nonce,
                                 const std::set<uint8_t>& selection) const {
  if (selection.empty()) return {Err::EmptySelection};
  Quote q;
  q.nonce = nonce;
  for (uint8_t idx : selection) {
    q.selection.push_back(idx);
    q.values.push_back(bank.at(idx));  // throws if out of range
  }
  Bytes payload = quote_payload(q.nonce, q.selection, q.values);
  q.signature = crypto::sign_detached(aik_.sk, payload);
  return q;
}

Result<Bytes> TpmIdentity::activate_credential(
    std::span<const uint8_t> ciphertext) const {
  auto plain = crypto::sealed_open(ek_, ciphertext);
  if (!plain || plain->size() != 64) return {Err::ActivationFailed};
  Digest bound;
  std::memcpy(bound.v.data(), plain->data() + 32, 32);
  if (bound != crypto::sha256(aik_.pk)) return {Err::ActivationFailed};
  return Bytes(plain->begin(), plain->begin() + 32);
}

Bytes make_credential(const Bytes& ek_pub, const Bytes& aik_pub,
                      const Key32& secret) {
  Bytes plain(secret.begin(), secret.end());
  Digest aik_digest = crypto::sha256(aik_pub);
  plain.insert(plain.end(), aik_digest.v.begin(), aik_digest.v.end());
  return crypto::sealed_box(ek_pub, plain);
}

bool verify_quote_signature(const Bytes& aik_pub, const Quote& q) {
  if (q.selection.empty() || q.selection.size() != q.values.size()) return false;
  if (q.selection.size() > kNumPcrs) return false;
  for (size_t i = 0; i < q.selection.size(); ++i) {
    if (q.selection[i] >= kNumPcrs) return false;
    if (i > 0 && q.selection[i] <= q.selection[i - 1]) return false;
  }
  Bytes payload = quote_payload(q.nonce, q.selection, q.values);
  return crypto::sign_verify(aik_pub, payload, q.signature);
}

}  // namespace airlock::tpm
