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

#include "attestation.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

namespace airlock::attest {

Result<Bytes> Registrar::register_node(const std::string& uuid,
                                       const Bytes& ek_pub,
                                       const Bytes& aik_pub, crypto::Rng& rng) {
  auto it = entries_.find(uuid);
  if (it != entries_.end() && it->second.state == EnrollState::Enrolled)
    return {Err::AlreadyEnrolled, uuid};
  // Re-registering a Pending uuid replaces the challenge.
  entries_[uuid] = Entry{ek_pub, aik_pub, EnrollState::Pending};
  Key32 secret = rng.key32();
  pending_[uuid] = secret;
  return tpm::make_credential(ek_pub, aik_pub, secret);
}

Result<void> Registrar::confirm_enrollment(const std::string& uuid,
                                           std::span<const uint8_t> secret) {
  auto it = entries_.find(uuid);
  if (it == entries_.end()) return {Err::NoSuchNode, uuid};
  auto ch = pending_.find(uuid);
  if (ch == pending_.end()) return {Err::EnrollmentFailed, uuid};
  if (secret.size() != ch->second.size() ||
      !std::equal(secret.begin(), secret.end(), ch->second.begin()))
    return {Err::EnrollmentFailed, uuid};
  it->second.state = EnrollState::Enrolled;
  pending_.erase(ch);
  trace_.emit(uuid, "-", EventKind::Enroll, "aik:" + to_hex(it->second.aik_pub));
  return ok();
}

std::optional<Bytes> Registrar::enrolled_aik(const std::string& uuid) const {
  auto it = entries_.find(uuid);
  if (it == entries_.end() || it->second.state != EnrollState::Enrolled)
    return std::nullopt;
  return it->second.aik_pub;
}

bool Registrar::has_entry(const std::string& uuid) const {
  return entries_.count(uuid) > 0;
}

bool Registrar::is_enrolled(const std::string& uuid) const {
  auto it = entries_.find(uuid);
  return it != entries_.end() && it->second.state == EnrollState::Enrolled;
}

void Registrar::restore_entry(const std::string& uuid, Entry e) {
  entries_[uuid] = std::move(e);
}

void Registrar::restore_challenge(const std::string& uuid, const Key32& secret) {
  pending_[uuid] = secret;
}

void Whitelist::add_entry(const std::string& name, EventList events) {
  entries_[name] = std::move(events);
}

bool Whitelist::has(const std::string& name) const {
  return entries_.count(name) > 0;
}

Result<std::map<uint8_t, Digest>> Whitelist::replay_golden(
    const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) return {Err::NoSuchEntry, name};
  tpm::PcrBank bank;
  std::map<uint8_t, Digest> out;
  for (const auto& [idx, d] : it->second) {
    bank.extend(idx, d);
    out[idx] = bank.at(idx);
  }
  return out;
}

Result<Whitelist> Whitelist::parse(const std::string& text) {
  Whitelist w;
  std::istringstream is(text);
  std::string line;
  std::string current;
  EventList events;
  int lineno = 0;
  auto flush = [&] {
    if (!current.empty()) w.add_entry(current, std::move(events));
    events = {};
  };
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "entry") {
      std::string name;
      if (!(ls >> name))
        return {Err::ParseError,
                "line " + std::to_string(lineno) + ": entry needs a name"};
      flush();
      current = name;
      continue;
    }
    if (current.empty())
      return {Err::ParseError, "line " + std::to_string(lineno) +
                                   ": measurement before any entry"};
    int idx;
    std::string hex;
    try {
      idx = std::stoi(first);
    } catch (...) {
      return {Err::ParseError,
              "line " + std::to_string(lineno) + ": bad pcr index"};
    }
    if (idx < 0 || idx >= static_cast<int>(tpm::kNumPcrs))
      return {Err::ParseError,
              "line " + std::to_string(lineno) + ": pcr index out of range"};
    if (!(ls >> hex))
      return {Err::ParseError,
              "line " + std::to_string(lineno) + ": missing digest"};
    auto d = Digest::from_hex(hex);
    if (!d)
      return {Err::ParseError,
              "line " + std::to_string(lineno) + ": digest must be 64 hex chars"};
    events.emplace_back(static_cast<uint8_t>(idx), *d);
  }
  flush();
  return w;
}

std::string Whitelist::serialize() const {
  std::ostringstream os;
  for (const auto& [name, events] : entries_) {
    os << "entry " << name << "\n";
    for (const auto& [idx, d] : events)
      os << int(idx) << " " << d.hex() << "\n";
  }
  return os.str();
}

const char* fail_reason_name(FailReason r) {
  switch (r) {
    case FailReason::None: return "none";
    case FailReason::BadSignature: return "bad-signature";
    case FailReason::UnknownAik: return "unknown-aik";
    case FailReason::NonceMismatch: return "nonce-mismatch";
    case FailReason::MeasurementMismatch: return "measurement-mismatch";
    case FailReason::NotEnrolled: return "not-enrolled";
    case FailReason::NoQuote: return "no-quote";
  }
  return "?";
}

std::optional<FailReason> fail_reason_from_name(std::string_view name) {
  for (FailReason r :
       {FailReason::None, FailReason::BadSignature, FailReason::UnknownAik,
        FailReason::NonceMismatch, FailReason::MeasurementMismatch,
        FailReason::NotEnrolled, FailReason::NoQuote})
    if (name == fail_reason_name(r)) return r;
  return std::nullopt;
}

std::string AttestationResult::describe() const {
  if (pass) return "pass";
  std::string s = std::string("fail:") + fail_reason_name(reason);
  if (reason == FailReason::MeasurementMismatch)
    s += ":pcr" + std::to_string(pcr_index);
  return s;
}

void Verifier::set_policy(const std::string& uuid, const std::string& policy) {
  rec(uuid).policy = policy;
}

void Verifier::begin_cycle(const std::string& uuid) {
  Record& r = rec(uuid);
  r.last_nonce.reset();
  r.last_result.reset();
  r.verifier_share.reset();
  r.share_released = false;
  r.key_invalidated = false;
  ++r.cycle;
}

tpm::Nonce Verifier::issue_nonce(const std::string& uuid) {
  tpm::Nonce n = rng_.nonce16();
  // Freshness contract: a nonce value is never reused within a run.
  while (!used_nonces_.insert(Bytes(n.begin(), n.end())).second)
    n = rng_.nonce16();
  rec(uuid).last_nonce = n;
  trace_.emit(uuid, "-", EventKind::NonceIssued, "nonce:" + to_hex(n));
  return n;
}

Result<AttestationResult> Verifier::attest_once(const std::string& uuid,
                                                const tpm::Quote& q) {
  Record& r = rec(uuid);
  if (!r.last_nonce) return {Err::NoPendingRound, uuid};

  AttestationResult result = AttestationResult::passed();
  // (a) the registrar must hold an Enrolled AIK for this uuid
  std::optional<Bytes> aik = registrar_.enrolled_aik(uuid);
  if (!aik) {
    result = AttestationResult::failed(registrar_.has_entry(uuid)
                                           ? FailReason::NotEnrolled
                                           : FailReason::UnknownAik);
  } else if (!tpm::verify_quote_signature(*aik, q)) {
    // (b) the signature must bind nonce, selection and values
    result = AttestationResult::failed(FailReason::BadSignature);
  } else if (q.nonce != *r.last_nonce) {
    // (c) the quote must answer this round's nonce
    result = AttestationResult::failed(FailReason::NonceMismatch);
  } else {
    // (d) quoted values must equal the whitelist replay
    auto golden = whitelist_.replay_golden(r.policy);
    if (!golden) {
      result = AttestationResult::failed(FailReason::MeasurementMismatch, -1);
    } else {
      for (size_t i = 0; i < q.selection.size(); ++i) {
        uint8_t idx = q.selection[i];
        auto it = golden.value().find(idx);
        Digest expect = (it != golden.value().end()) ? it->second : Digest{};
        if (q.values[i] != expect) {
          result = AttestationResult::failed(FailReason::MeasurementMismatch, idx);
          break;
        }
      }
    }
  }

  r.last_result = result;
  if (result.pass) {
    if (!r.verifier_share) r.verifier_share = rng_.key32();
    trace_.emit(uuid, "-", EventKind::AttestPass, "policy:" + r.policy);
  } else {
    trace_.emit(uuid, "-", EventKind::AttestFail, "reason:" + result.describe());
  }
  return result;
}

Result<Key32> Verifier::bootstrap_key(const std::string& uuid) {
  Record& r = rec(uuid);
  if (!r.last_result || !r.last_result->pass || !r.verifier_share)
    return {Err::KeyRefused, uuid + ": no pass recorded this cycle"};
  if (r.share_released)
    return {Err::KeyRefused, uuid + ": share already released this cycle"};
  r.share_released = true;
  trace_.emit(uuid, "-", EventKind::ShareRelease,
              "cycle:" + std::to_string(r.cycle));
  return *r.verifier_share;
}

void Verifier::invalidate_key(const std::string& uuid) {
  rec(uuid).key_invalidated = true;
}

std::vector<std::pair<std::string, AttestationResult>> Verifier::poll_tick(
    const std::vector<std::string>& uuids, const QuoteFn& fetch_quote) {
  std::vector<std::pair<std::string, AttestationResult>> out;
  for (const std::string& uuid : uuids) {
    tpm::Nonce n = issue_nonce(uuid);
    std::optional<tpm::Quote> q = fetch_quote(uuid, n);
    if (!q) {
      // Fail closed: an unresponsive node is treated as compromised.
      AttestationResult r = AttestationResult::failed(FailReason::NoQuote);
      rec(uuid).last_result = r;
      trace_.emit(uuid, "-", EventKind::AttestFail, "reason:" + r.describe());
      out.emplace_back(uuid, r);
      continue;
    }
    auto r = attest_once(uuid, *q);
    out.emplace_back(uuid, r ? r.value()
                             : AttestationResult::failed(FailReason::NoQuote));
  }
  return out;
}

const Verifier::Record* Verifier::record(const std::string& uuid) const {
  auto it = records_.find(uuid);
  return it == records_.end() ? nullptr : &it->second;
}

void Verifier::restore_record(const std::string& uuid, Record r) {
  records_[uuid] = std::move(r);
}

}  // namespace airlock::attest
