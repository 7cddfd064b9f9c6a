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

#ifndef AIRLOCK_ORCHESTRATOR_HPP_
#define AIRLOCK_ORCHESTRATOR_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "attestation.hpp"
#include "isolation.hpp"
#include "node.hpp"
#include "provisioning.hpp"

namespace airlock::orch {

enum class NodeState { Free, Airlock, Allocated, Rejected };
const char* state_name(NodeState s);
std::optional<NodeState> state_from_name(std::string_view name);

// A tenant's point on the cost/security spectrum.
struct TrustProfile {
  std::string name;
  bool attested = true;
  bool encrypt_storage = true;
  bool encrypt_network = true;
};

// Built-ins: full, attested, unattested.
std::optional<TrustProfile> profile_by_name(std::string_view name);

struct NodeRecord {
  std::string uuid;
  NodeState state = NodeState::Free;
  std::optional<std::string> project;
  std::optional<std::string> airlock_net;
  std::vector<uint64_t> history;  // event seq refs
  std::string profile;            // profile of the current/last admission
  std::optional<std::string> attached_clone;
};

struct FleetNode {
  nodesim::NodeSim sim;
  std::vector<nodesim::Stage> pristine;  // provider-pristine payloads
};
using Fleet = std::map<std::string, FleetNode>;

struct AdmitOutcome {
  std::string uuid;  // empty when no node could be allocated
  NodeState final_state = NodeState::Free;
  Err error = Err::None;
  std::string detail;
};

struct OrchestratorOptions {
  std::string base_image;
  Bytes os_kernel_payload;
  std::string attestation_endpoint = "svc-attestation";
  std::string provisioning_endpoint = "svc-provisioning";
};

class AdmissionWorkflow;

// Tenant-side engine: drives nodes through Free -> Airlock -> Allocated /
// Rejected, releases and cleans them, and reacts to failed polls. Plays the
// tenant role in key bootstrap (holds the tenant share U).
class Orchestrator {
 public:
  Orchestrator(Fleet& fleet, isolation::IsolationService& isolation,
               provision::ImageCatalog& images, attest::Registrar& registrar,
               attest::Verifier& verifier, attest::Whitelist& whitelist,
               TraceCollector& trace, crypto::Rng& rng,
               OrchestratorOptions options);

  AdmitOutcome admit_node(const std::string& tenant, const TrustProfile& profile);
  // Runs `count` admission workflows concurrently (seeded interleaving of
  // workflow steps; every cross-service effect stays serialized).
  std::vector<AdmitOutcome> admit_many(const std::string& tenant, size_t count,
                                       const TrustProfile& profile);
  std::vector<AdmitOutcome> run_admissions(
      const std::vector<std::pair<std::string, TrustProfile>>& requests);

  Result<void> release_node(const std::string& uuid);
  void handle_revocation(const std::string& uuid,
                         const attest::AttestationResult& result);
  Result<void> clean_node(const std::string& uuid);
  // One continuous-attestation poll over all attested Allocated nodes; failed
  // nodes are ousted immediately.
  std::vector<std::pair<std::string, attest::AttestationResult>> poll_once();
  // Advances simulation time by one tick; polls when the verifier's
  // poll_interval divides the tick count.
  std::vector<std::pair<std::string, attest::AttestationResult>> tick();
  uint64_t tick_counter() const { return tick_counter_; }
  void restore_tick_counter(uint64_t t) { tick_counter_ = t; }

  void set_tenant_networks(const std::string& tenant,
                           std::vector<std::string> networks);
  const std::map<std::string, std::vector<std::string>>& tenant_network_map()
      const {
    return tenant_networks_;
  }

  const std::map<std::string, NodeRecord>& records() const { return records_; }
  const NodeRecord* record(const std::string& uuid) const;
  void restore_record(NodeRecord rec);  // persistence
  const OrchestratorOptions& options() const { return options_; }

  static std::string boot_policy_for(nodesim::FirmwareKind kind);

 private:
  friend class AdmissionWorkflow;

  Result<void> set_state(const std::string& uuid, NodeState to,
                         const std::string& extra_detail = "");
  void detach_everywhere(const std::string& uuid);
  std::string runtime_policy_for(const std::string& boot_policy);
  std::vector<std::string>& tenant_networks(const std::string& tenant);

  Fleet& fleet_;
  isolation::IsolationService& isolation_;
  provision::ImageCatalog& images_;
  attest::Registrar& registrar_;
  attest::Verifier& verifier_;
  attest::Whitelist& whitelist_;
  TraceCollector& trace_;
  crypto::Rng& rng_;
  OrchestratorOptions options_;
  uint64_t tick_counter_ = 0;
  std::map<std::string, NodeRecord> records_;
  std::map<std::string, std::vector<std::string>> tenant_networks_;
};

// Admission as an explicit step machine so many nodes can be admitted
// concurrently with a deterministic, seed-driven interleaving.
class AdmissionWorkflow {
 public:
  AdmissionWorkflow(Orchestrator& orch, std::string tenant, TrustProfile profile)
      : orch_(orch), tenant_(std::move(tenant)), profile_(std::move(profile)) {}

  bool done() const { return state_ == St::Done; }
  void step();  // runs one atomic workflow step
  const AdmitOutcome& outcome() const { return outcome_; }

 private:
  enum class St { EnterAirlock, PowerOn, Enroll, Attest, Provision, Adopt, Reject, Done };

  void fail_to_reject(Err err, const std::string& detail);

  Orchestrator& orch_;
  std::string tenant_;
  TrustProfile profile_;
  St state_ = St::EnterAirlock;
  std::string uuid_;
  AdmitOutcome outcome_;
  std::string reject_reason_;
};

}  // namespace airlock::orch

#endif  // AIRLOCK_ORCHESTRATOR_HPP_
