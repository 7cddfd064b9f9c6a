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

#include "node.hpp"

#include <algorithm>
#include <stdexcept>

namespace airlock::nodesim {

const char* firmware_name(FirmwareKind k) {
  switch (k) {
    case FirmwareKind::StockUefi: return "stock-uefi";
    case FirmwareKind::HeadsFlashed: return "heads-flashed";
  }
  return "?";
}

std::optional<FirmwareKind> firmware_from_name(std::string_view name) {
  if (name == "stock-uefi") return FirmwareKind::StockUefi;
  if (name == "heads-flashed") return FirmwareKind::HeadsFlashed;
  return std::nullopt;
}

const char* phase_name(BootPhase p) {
  switch (p) {
    case BootPhase::Off: return "Off";
    case BootPhase::Measuring: return "Measuring";
    case BootPhase::AwaitingAttestation: return "AwaitingAttestation";
    case BootPhase::KeyReceived: return "KeyReceived";
    case BootPhase::TenantOs: return "TenantOs";
  }
  return "?";
}

const char* origin_name(StageOrigin o) {
  return o == StageOrigin::Flashed ? "flashed" : "downloaded";
}

std::optional<StageOrigin> origin_from_name(std::string_view name) {
  if (name == "flashed") return StageOrigin::Flashed;
  if (name == "downloaded") return StageOrigin::Downloaded;
  return std::nullopt;
}

Bytes default_stage_payload(const std::string& stage_name) {
  return to_bytes("stage-payload:" + stage_name + "\n");
}

std::vector<Stage> default_stages(FirmwareKind kind) {
  auto mk = [](const char* name, uint8_t pcr, StageOrigin origin) {
    return Stage{name, default_stage_payload(name), pcr, origin};
  };
  if (kind == FirmwareKind::HeadsFlashed) {
    return {
        mk("acm", tpm::kPcrFirmware, StageOrigin::Flashed),
        mk("boot-block", tpm::kPcrFirmware, StageOrigin::Flashed),
        mk("nerf-ram-stage", tpm::kPcrFirmware, StageOrigin::Flashed),
        mk("heads-kernel", tpm::kPcrBootloader, StageOrigin::Flashed),
        mk("heads-initramfs", tpm::kPcrBootloader, StageOrigin::Flashed),
        mk("attestation-client", tpm::kPcrPayload, StageOrigin::Downloaded),
    };
  }
  return {
      mk("uefi", tpm::kPcrFirmware, StageOrigin::Flashed),
      mk("ipxe", tpm::kPcrBootloader, StageOrigin::Flashed),
      mk("heads-kernel", tpm::kPcrPayload, StageOrigin::Downloaded),
      mk("heads-initramfs", tpm::kPcrPayload, StageOrigin::Downloaded),
      mk("attestation-client", tpm::kPcrPayload, StageOrigin::Downloaded),
  };
}

NodeSim::NodeSim(std::string uuid, FirmwareKind kind, const Key32& tpm_seed,
                 std::vector<Stage> stages, size_t memory_bytes,
                 TraceCollector& trace)
    : uuid_(std::move(uuid)),
      firmware_(kind),
      tpm_seed_(tpm_seed),
      tpm_(uuid_, tpm_seed),
      stages_(std::move(stages)),
      memory_(memory_bytes, 0),
      nics_{"nic0"},
      trace_(trace) {
  if (stages_.empty())
    throw std::invalid_argument("node " + uuid_ + ": empty stage list");
  for (const Stage& s : stages_) {
    if (s.payload.empty())
      throw std::invalid_argument("node " + uuid_ + ": stage " + s.name +
                                  " has empty payload");
    if (s.pcr_index != tpm::kPcrFirmware && s.pcr_index != tpm::kPcrBootloader &&
        s.pcr_index != tpm::kPcrPayload)
      throw std::invalid_argument("node " + uuid_ + ": stage " + s.name +
                                  " outside the PCR allocation map");
  }
}

void NodeSim::emit(EventKind kind, const std::string& detail) {
  trace_.emit(uuid_, phase_name(phase_), kind, detail);
}

Result<void> NodeSim::power_on() {
  if (phase_ != BootPhase::Off) return {Err::AlreadyPowered, uuid_};
  ++power_cycle_;
  bank_.reset();
  phase_ = BootPhase::Measuring;
  emit(EventKind::PowerOn, "cycle:" + std::to_string(power_cycle_));
  scrub_memory();
  for (const Stage& s : stages_) {
    crypto::Digest d = crypto::sha256(s.payload);
    bank_.extend(s.pcr_index, d);
    emit(EventKind::Measure, "stage:" + s.name +
                                 "/pcr:" + std::to_string(s.pcr_index) +
                                 "/digest:" + d.hex());
    emit(EventKind::Execute, "stage:" + s.name);
  }
  phase_ = BootPhase::AwaitingAttestation;
  return ok();
}

void NodeSim::power_off() {
  if (phase_ == BootPhase::Off) return;
  if (key_) {
    key_.reset();
    emit(EventKind::KeyErase, "reason:power-off");
  }
  emit(EventKind::PowerOff, "");
  phase_ = BootPhase::Off;
}

void NodeSim::scrub_memory() {
  std::fill(memory_.begin(), memory_.end(), 0);
  emit(EventKind::Scrub, "bytes:" + std::to_string(memory_.size()));
}

Result<tpm::Quote> NodeSim::send_attestation_quote(const tpm::Nonce& nonce) {
  if (phase_ != BootPhase::AwaitingAttestation)
    return {Err::NotAwaitingAttestation, uuid_};
  return tpm_.quote(bank_, nonce, tpm::kQuoteSelection);
}

Result<tpm::Quote> NodeSim::runtime_quote(const tpm::Nonce& nonce) {
  if (phase_ != BootPhase::TenantOs) return {Err::NotRunning, uuid_};
  return tpm_.quote(bank_, nonce, tpm::kQuoteSelection);
}

Result<void> NodeSim::launch_os(const Stage& os_kernel) {
  crypto::Digest d = crypto::sha256(os_kernel.payload);
  bank_.extend(os_kernel.pcr_index, d);
  emit(EventKind::Measure, "stage:" + os_kernel.name +
                               "/pcr:" + std::to_string(os_kernel.pcr_index) +
                               "/digest:" + d.hex());
  emit(EventKind::Kexec, "kernel:" + os_kernel.name);
  phase_ = BootPhase::TenantOs;
  return ok();
}

Result<void> NodeSim::receive_key_and_boot_os(const Key32& tenant_share,
                                              const Key32& verifier_share,
                                              const Stage& os_kernel) {
  if (phase_ != BootPhase::AwaitingAttestation)
    return {Err::NotAwaitingAttestation, uuid_};
  key_ = EnclaveKey{xor_keys(tenant_share, verifier_share)};
  phase_ = BootPhase::KeyReceived;
  emit(EventKind::KeyCombine, "cycle:" + std::to_string(power_cycle_));
  return launch_os(os_kernel);
}

Result<void> NodeSim::boot_os(const Stage& os_kernel) {
  if (phase_ != BootPhase::AwaitingAttestation)
    return {Err::NotAwaitingAttestation, uuid_};
  return launch_os(os_kernel);
}

Result<void> NodeSim::tamper(const std::string& stage_name, size_t offset,
                             uint8_t value) {
  auto it = std::find_if(stages_.begin(), stages_.end(),
                         [&](const Stage& s) { return s.name == stage_name; });
  if (it == stages_.end()) return {Err::NoSuchStage, stage_name};
  if (offset >= it->payload.size()) return {Err::OutOfRange, stage_name};
  if (it->payload[offset] == value) return ok();  // no-op mutation
  it->payload[offset] = value;
  emit(EventKind::Tamper, "stage:" + stage_name +
                              "/offset:" + std::to_string(offset) +
                              "/value:" + to_hex({&value, 1}));
  if (phase_ != BootPhase::Off) {
    // Runtime change: the integrity monitor measures the mutated stage, so
    // the divergence lands in the PCR before the next poll.
    crypto::Digest d = crypto::sha256(it->payload);
    bank_.extend(it->pcr_index, d);
    emit(EventKind::Measure, "stage:" + it->name +
                                 "/pcr:" + std::to_string(it->pcr_index) +
                                 "/digest:" + d.hex() + "/runtime:1");
  }
  return ok();
}

void NodeSim::write_memory(size_t offset, std::span<const uint8_t> data) {
  if (offset + data.size() > memory_.size())
    throw std::out_of_range("memory write past end");
  std::copy(data.begin(), data.end(), memory_.begin() + offset);
}

Bytes NodeSim::read_memory(size_t offset, size_t len) const {
  if (offset + len > memory_.size())
    throw std::out_of_range("memory read past end");
  return Bytes(memory_.begin() + offset, memory_.begin() + offset + len);
}

bool NodeSim::memory_is_zero() const {
  return std::all_of(memory_.begin(), memory_.end(),
                     [](uint8_t b) { return b == 0; });
}

void NodeSim::replace_stages(std::vector<Stage> stages) {
  if (stages.empty()) throw std::invalid_argument("empty stage list");
  stages_ = std::move(stages);
}

}  // namespace airlock::nodesim
