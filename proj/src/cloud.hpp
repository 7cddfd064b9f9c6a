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

#ifndef AIRLOCK_CLOUD_HPP_
#define AIRLOCK_CLOUD_HPP_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "orchestrator.hpp"

namespace airlock::cloud {

struct NodeSpec {
  std::string uuid;
  nodesim::FirmwareKind firmware = nodesim::FirmwareKind::HeadsFlashed;
  size_t memory_bytes = nodesim::NodeSim::kDefaultMemoryBytes;
  std::map<std::string, Bytes> stage_overrides;  // stage name -> payload
};

struct ImageSpec {
  std::string id;
  Bytes content;
};

struct CloudSpec {
  std::vector<NodeSpec> nodes;
  std::vector<ImageSpec> images;  // empty -> a 16 KiB zero "base" image
  std::string default_image;      // empty -> first image
  uint16_t vlan_lo = 100;
  uint16_t vlan_hi = 199;
  bool whitelist_auto = true;     // derive golden entries from default chains
  std::string whitelist_text;     // extra/explicit entries (whitelist format)
  Bytes os_kernel_payload;        // empty -> default payload
  uint64_t seed = 1;
};

// Everything one simulated cloud owns: trace, seeded randomness, the three
// services, the fleet, and the tenant-side orchestrator.
class Cloud {
 public:
  static Result<std::unique_ptr<Cloud>> create(const CloudSpec& spec);

  TraceCollector& trace() { return trace_; }
  crypto::Rng& rng() { return rng_; }
  isolation::IsolationService& isolation() { return *isolation_; }
  provision::ImageCatalog& images() { return *images_; }
  attest::Registrar& registrar() { return *registrar_; }
  attest::Whitelist& whitelist() { return whitelist_; }
  attest::Verifier& verifier() { return *verifier_; }
  orch::Orchestrator& orchestrator() { return *orchestrator_; }
  orch::Fleet& fleet() { return fleet_; }
  nodesim::NodeSim& node(const std::string& uuid) {
    return fleet_.at(uuid).sim;
  }

  uint64_t seed() const { return seed_; }
  const std::string& default_image() const { return default_image_; }
  void reseed(uint64_t seed);

  std::string status_text() const;

 private:
  Cloud() : rng_(1) {}

  TraceCollector trace_;
  crypto::Rng rng_;
  uint64_t seed_ = 1;
  std::unique_ptr<isolation::IsolationService> isolation_;
  std::unique_ptr<provision::ImageCatalog> images_;
  std::unique_ptr<attest::Registrar> registrar_;
  attest::Whitelist whitelist_;
  std::unique_ptr<attest::Verifier> verifier_;
  orch::Fleet fleet_;
  std::unique_ptr<orch::Orchestrator> orchestrator_;
  std::string default_image_;

  friend struct CloudAccess;
};

// Builds the pristine stage list for a node spec (defaults + overrides).
std::vector<nodesim::Stage> stages_for(const NodeSpec& spec);

}  // namespace airlock::cloud

#endif  // AIRLOCK_CLOUD_HPP_
