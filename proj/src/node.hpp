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

#ifndef AIRLOCK_NODE_HPP_
#define AIRLOCK_NODE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "tpm.hpp"
#include "trace.hpp"

namespace airlock::nodesim {

enum class FirmwareKind { StockUefi, HeadsFlashed };
enum class StageOrigin { Flashed, Downloaded };
enum class BootPhase { Off, Measuring, AwaitingAttestation, KeyReceived, TenantOs };

const char* firmware_name(FirmwareKind k);
std::optional<FirmwareKind> firmware_from_name(std::string_view name);
const char* phase_name(BootPhase p);
const char* origin_name(StageOrigin o);
std::optional<StageOrigin> origin_from_name(std::string_view name);

// One measured boot component: the payload is the opaque code image whose
// hash gets extended into pcr_index before the stage runs.
struct Stage {
  std::string name;
  Bytes payload;
  uint8_t pcr_index;
  StageOrigin origin;
};

// Canonical boot chains for the two firmware paths. Flashed-Heads measures
// ACM / boot block / RAM stage into PCR 0 and the Heads kernel+initramfs into
// PCR 4; the stock-UEFI path network-boots and lands the three downloaded
// payloads in PCR 7.
std::vector<Stage> default_stages(FirmwareKind kind);
Bytes default_stage_payload(const std::string& stage_name);

struct EnclaveKey {
  Key32 bytes{};
};

class NodeSim {
 public:
  static constexpr size_t kDefaultMemoryBytes = 64 * 1024;

  NodeSim(std::string uuid, FirmwareKind kind, const Key32& tpm_seed,
          std::vector<Stage> stages, size_t memory_bytes,
          TraceCollector& trace);

  // Measured boot: resets the PCR bank, scrubs memory, then measures and
  // executes each stage in chain order. Ends in AwaitingAttestation.
  Result<void> power_on();
  void power_off();
  void scrub_memory();

  Result<tpm::Quote> send_attestation_quote(const tpm::Nonce& nonce);
  // Continuous-attestation path: re-quotes the same selection while the
  // tenant OS runs.
  Result<tpm::Quote> runtime_quote(const tpm::Nonce& nonce);

  Result<void> receive_key_and_boot_os(const Key32& tenant_share,
                                       const Key32& verifier_share,
                                       const Stage& os_kernel);
  // Unattested profile path: no key material, straight to the tenant OS.
  Result<void> boot_os(const Stage& os_kernel);

  // Mutates one payload byte. On a powered node the integrity monitor
  // re-measures the stage, so the next quote diverges from golden. Writing
  // the identical byte is a no-op.
  Result<void> tamper(const std::string& stage_name, size_t offset,
                      uint8_t value);

  void write_memory(size_t offset, std::span<const uint8_t> data);
  Bytes read_memory(size_t offset, size_t len) const;
  bool memory_is_zero() const;

  void replace_stages(std::vector<Stage> stages);  // provider clean/restore

  const std::string& uuid() const { return uuid_; }
  FirmwareKind firmware() const { return firmware_; }
  BootPhase phase() const { return phase_; }
  const tpm::TpmIdentity& tpm_identity() const { return tpm_; }
  const tpm::PcrBank& bank() const { return bank_; }
  tpm::PcrBank& bank_mut() { return bank_; }  // persistence restore
  const std::vector<Stage>& stages() const { return stages_; }
  const std::vector<std::string>& nics() const { return nics_; }
  const std::optional<EnclaveKey>& key() const { return key_; }
  const Key32& tpm_seed() const { return tpm_seed_; }
  uint64_t power_cycle() const { return power_cycle_; }
  size_t memory_size() const { return memory_.size(); }
  const Bytes& memory() const { return memory_; }

  // Persistence restore hooks.
  void restore_phase(BootPhase p) { phase_ = p; }
  void restore_key(const std::optional<EnclaveKey>& k) { key_ = k; }
  void restore_cycle(uint64_t c) { power_cycle_ = c; }
  void restore_memory(Bytes m) { memory_ = std::move(m); }

 private:
  void emit(EventKind kind, const std::string& detail);
  Result<void> launch_os(const Stage& os_kernel);

  std::string uuid_;
  FirmwareKind firmware_;
  Key32 tpm_seed_;
  tpm::TpmIdentity tpm_;
  tpm::PcrBank bank_;
  std::vector<Stage> stages_;
  Bytes memory_;
  std::vector<std::string> nics_;
  BootPhase phase_ = BootPhase::Off;
  std::optional<EnclaveKey> key_;
  uint64_t power_cycle_ = 0;
  TraceCollector& trace_;
};

}  // namespace airlock::nodesim

#endif  // AIRLOCK_NODE_HPP_
