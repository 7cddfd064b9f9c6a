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

#ifndef AIRLOCK_ISOLATION_HPP_
#define AIRLOCK_ISOLATION_HPP_

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crypto.hpp"
#include "errors.hpp"
#include "trace.hpp"

namespace airlock::isolation {

enum class Visibility { Private, Public };

struct NetworkDef {
  std::string id;
  uint16_t vlan = 0;
  Visibility visibility = Visibility::Private;
  std::string project;  // owning project for Private networks
  bool airlock = false;
  bool encrypted = false;
  std::set<std::pair<std::string, std::string>> members;  // (uuid, nic)
};

// Ground truth for reachability: the simulated switch's port -> VLAN map.
// Mirrors logical membership once the operation queue drains.
struct SwitchConfig {
  std::map<std::pair<std::string, std::string>, std::set<uint16_t>> port_map;
  std::set<uint16_t> vlans;
};

enum class OpKind { Connect, Detach, CreateNet, DeleteNet };

struct NetOperation {
  OpKind kind;
  uint64_t ticket;
  std::string net;
  uint16_t vlan;
  std::string uuid;  // Connect/Detach
  std::string nic;
  std::string net_kind;  // airlock/enclave/public, for the trace
  std::string project;
};

// Provider-side isolation service: node pool, projects, VLAN-tagged
// networks, and the single-consumer operation engine that applies switch
// mutations in strict ticket order. The only component that may mutate
// SwitchConfig.
class IsolationService {
 public:
  IsolationService(uint16_t vlan_lo, uint16_t vlan_hi, TraceCollector& trace);

  // Fleet + service-endpoint registration (init time).
  void add_node(const std::string& uuid, std::vector<std::string> nics);
  void register_endpoint(const std::string& uuid, const std::string& nic);

  Result<std::string> allocate_node(const std::string& project,
                                    crypto::Rng& rng);
  void release_to_pool(const std::string& uuid);
  std::optional<std::string> project_of(const std::string& uuid) const;

  Result<std::string> create_network(const std::string& project,
                                     Visibility visibility, bool airlock,
                                     bool encrypted,
                                     const std::string& id_hint = "");
  Result<uint64_t> delete_network(const std::string& net);
  Result<uint64_t> connect(const std::string& uuid, const std::string& nic,
                           const std::string& net);
  Result<uint64_t> detach(const std::string& uuid, const std::string& nic,
                          const std::string& net);

  // Applies every queued operation in ticket order; returns the count.
  size_t drain_operations();
  bool queue_empty() const;

  bool reachable(const std::string& a, const std::string& b) const;
  std::set<std::string> reachable_set(const std::string& uuid) const;
  std::set<uint16_t> port_vlans(const std::string& uuid) const;

  const std::map<std::string, NetworkDef>& networks() const { return nets_; }
  const SwitchConfig& switch_config() const { return switch_; }
  std::vector<std::string> free_pool() const;
  const std::set<std::string>& endpoints() const { return endpoint_ids_; }
  std::vector<std::string> node_nics(const std::string& uuid) const;
  uint16_t vlan_lo() const { return vlan_lo_; }
  uint16_t vlan_hi() const { return vlan_hi_; }

  // Persistence restore.
  void restore_network(NetworkDef def);
  void restore_assignment(const std::string& uuid, const std::string& project);
  void restore_switch(SwitchConfig sw) { switch_ = std::move(sw); }
  void restore_net_counter(uint64_t c) { net_counter_ = c; }
  uint64_t net_counter() const { return net_counter_; }
  void rebuild_vlan_pool();

 private:
  struct NodeInfo {
    std::vector<std::string> nics;
    std::optional<std::string> project;
  };

  Result<void> check_membership_allowed(const NetworkDef& net,
                                        const std::string& uuid) const;
  uint64_t enqueue(NetOperation op);
  const char* net_kind_of(const NetworkDef& net) const;

  uint16_t vlan_lo_, vlan_hi_;
  std::set<uint16_t> free_vlans_;
  std::map<std::string, NodeInfo> nodes_;
  std::set<std::string> endpoint_ids_;
  std::map<std::string, NetworkDef> nets_;
  std::deque<NetOperation> queue_;
  uint64_t next_ticket_ = 1;
  uint64_t net_counter_ = 1;
  SwitchConfig switch_;
  mutable std::mutex mu_;
  TraceCollector& trace_;
};

}  // namespace airlock::isolation

#endif  // AIRLOCK_ISOLATION_HPP_
