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

#ifndef AIRLOCK_INVARIANTS_HPP_
#define AIRLOCK_INVARIANTS_HPP_

#include <map>
#include <string>
#include <vector>

#include "trace.hpp"

namespace airlock::invariants {

struct Violation {
  uint64_t seq;
  std::string rule;
  std::string message;
};

struct CheckerConfig {
  std::string attestation_endpoint = "svc-attestation";
  std::string provisioning_endpoint = "svc-provisioning";
};

// Replays a linearized event trace and checks the cross-cutting guarantees:
//
//   state-legality        every StateChange follows the legal transition set
//   admission-safety      no tenant-enclave Connect before the node's
//                         attestation Pass (attested profiles)
//   airlock-confinement   at every queue-quiescent point, an Airlock node
//                         reaches exactly the two service endpoints
//   free-isolation        Free nodes own no switch ports
//   rejection-isolation   Rejected nodes own no switch ports until cleaned
//   cross-project         nodes of different projects never share a vlan
//                         unless it belongs to a Public network
//   vlan-uniqueness       live networks never share a tag
//   key-lifecycle         keys appear only after a Pass in the same power
//                         cycle and never survive into the next occupancy
//   share-gating          verifier shares are released after Pass, once per
//                         power cycle
//   measure-order         boot-chain Measure/Execute events alternate in
//                         chain order
//
// Reachability rules are evaluated at DrainEvents (the spec's reachable()
// is defined on a drained queue); ordering rules are evaluated per event.
std::vector<Violation> check_trace(const std::vector<Event>& events,
                                   const CheckerConfig& config = {});

std::map<std::string, std::string> parse_detail(const std::string& detail);

std::string describe(const std::vector<Violation>& violations);

}  // namespace airlock::invariants

#endif  // AIRLOCK_INVARIANTS_HPP_
