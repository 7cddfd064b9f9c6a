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

#include "isolation.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace airlock::isolation {

IsolationService::IsolationService(uint16_t vlan_lo, uint16_t vlan_hi,
                                   TraceCollector& trace)
    : vlan_lo_(vlan_lo), vlan_hi_(vlan_hi), trace_(trace) {
  if (vlan_lo > vlan_hi) throw std::invalid_argument("empty VLAN range");
  for (uint32_t v = vlan_lo; v <= vlan_hi; ++v)
    free_vlans_.insert(static_cast<uint16_t>(v));
}

void IsolationService::add_node(const std::string& uuid,
                                std::vector<std::string> nics) {
  std::lock_guard<std::mutex> lk(mu_);
  if (nodes_.count(uuid)) throw std::invalid_argument("duplicate node " + uuid);
  nodes_[uuid] = NodeInfo{std::move(nics), std::nullopt};
}

void IsolationService::register_endpoint(const std::string& uuid,
                                         const std::string& nic) {
  std::lock_guard<std::mutex> lk(mu_);
  nodes_[uuid] = NodeInfo{{nic}, std::nullopt};
  endpoint_ids_.insert(uuid);
}

Result<std::string> IsolationService::allocate_node(const std::string& project,
                                                    crypto::Rng& rng) {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<std::string> pool;
  for (const auto& [uuid, info] : nodes_)
    if (!info.project && !endpoint_ids_.count(uuid)) pool.push_back(uuid);
  if (pool.empty()) return {Err::NoFreeNodes, project};
  const std::string& uuid = pool[rng.pick(pool.size())];
  nodes_[uuid].project = project;
  return uuid;
}

void IsolationService::release_to_pool(const std::string& uuid) {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = nodes_.find(uuid);
  if (it != nodes_.end()) it->second.project.reset();
}

std::optional<std::string> IsolationService::project_of(
    const std::string& uuid) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = nodes_.find(uuid);
  if (it == nodes_.end()) return std::nullopt;
  return it->second.project;
}

const char* IsolationService::net_kind_of(const NetworkDef& net) const {
  if (net.airlock) return "airlock";
  return net.visibility == Visibility::Public ? "public" : "enclave";
}

Result<std::string> IsolationService::create_network(
    const std::string& project, Visibility visibility, bool airlock,
    bool encrypted, const std::string& id_hint) {
  std::lock_guard<std::mutex> lk(mu_);
  if (free_vlans_.empty()) return {Err::NoVlansAvailable};
  std::string id = id_hint;
  if (id.empty()) id = "net-" + std::to_string(net_counter_++);
  if (nets_.count(id)) return {Err::DuplicateId, id};
  uint16_t vlan = *free_vlans_.begin();
  free_vlans_.erase(free_vlans_.begin());
  NetworkDef def;
  def.id = id;
  def.vlan = vlan;
  def.visibility = visibility;
  def.project = visibility == Visibility::Private ? project : "";
  def.airlock = airlock;
  def.encrypted = encrypted;
  nets_[id] = def;
  NetOperation op{OpKind::CreateNet, 0, id, vlan, "", "", net_kind_of(def),
                  def.project};
  enqueue(std::move(op));
  return id;
}

Result<void> IsolationService::check_membership_allowed(
    const NetworkDef& net, const std::string& uuid) const {
  if (net.visibility == Visibility::Public) return ok();
  if (net.airlock && endpoint_ids_.count(uuid)) return ok();
  auto it = nodes_.find(uuid);
  if (it == nodes_.end() || !it->second.project ||
      *it->second.project != net.project)
    return {Err::Forbidden,
            uuid + " is not in project " + net.project};
  return ok();
}

Result<uint64_t> IsolationService::connect(const std::string& uuid,
                                           const std::string& nic,
                                           const std::string& net) {
  std::lock_guard<std::mutex> lk(mu_);
  auto nit = nets_.find(net);
  if (nit == nets_.end()) return {Err::NoSuchNetwork, net};
  auto node = nodes_.find(uuid);
  if (node == nodes_.end()) return {Err::NoSuchNode, uuid};
  if (std::find(node->second.nics.begin(), node->second.nics.end(), nic) ==
      node->second.nics.end())
    return {Err::NoSuchNode, uuid + " has no nic " + nic};
  if (auto allowed = check_membership_allowed(nit->second, uuid); !allowed)
    return {allowed.error(), allowed.message()};
  if (nit->second.members.count({uuid, nic}))
    return {Err::AlreadyMember, uuid + " on " + net};
  nit->second.members.insert({uuid, nic});
  NetOperation op{OpKind::Connect, 0,    net,
                  nit->second.vlan, uuid, nic,
                  net_kind_of(nit->second), nit->second.project};
  return enqueue(std::move(op));
}

Result<uint64_t> IsolationService::detach(const std::string& uuid,
                                          const std::string& nic,
                                          const std::string& net) {
  std::lock_guard<std::mutex> lk(mu_);
  auto nit = nets_.find(net);
  if (nit == nets_.end()) return {Err::NoSuchNetwork, net};
  if (!nit->second.members.count({uuid, nic}))
    return {Err::NotAMember, uuid + " on " + net};
  nit->second.members.erase({uuid, nic});
  NetOperation op{OpKind::Detach, 0,    net,
                  nit->second.vlan, uuid, nic,
                  net_kind_of(nit->second), nit->second.project};
  return enqueue(std::move(op));
}

Result<uint64_t> IsolationService::delete_network(const std::string& net) {
  std::lock_guard<std::mutex> lk(mu_);
  auto nit = nets_.find(net);
  if (nit == nets_.end()) return {Err::NoSuchNetwork, net};
  if (!nit->second.members.empty())
    return {Err::NetworkNotEmpty, net + " still has members"};
  NetOperation op{OpKind::DeleteNet, 0, net, nit->second.vlan, "", "",
                  net_kind_of(nit->second), nit->second.project};
  nets_.erase(nit);  // VLAN returns to the pool when the op applies
  return enqueue(std::move(op));
}

uint64_t IsolationService::enqueue(NetOperation op) {
  op.ticket = next_ticket_++;
  queue_.push_back(std::move(op));
  return queue_.back().ticket;
}

size_t IsolationService::drain_operations() {
  std::lock_guard<std::mutex> lk(mu_);
  size_t applied = 0;
  while (!queue_.empty()) {
    NetOperation op = std::move(queue_.front());
    queue_.pop_front();
    std::string net_detail = "net:" + op.net + "/vlan:" + std::to_string(op.vlan) +
                             "/kind:" + op.net_kind;
    switch (op.kind) {
      case OpKind::CreateNet:
        switch_.vlans.insert(op.vlan);
        trace_.emit("-", "-", EventKind::NetCreate,
                    net_detail + "/project:" + op.project);
        break;
      case OpKind::DeleteNet:
        switch_.vlans.erase(op.vlan);
        free_vlans_.insert(op.vlan);
        trace_.emit("-", "-", EventKind::NetDelete, net_detail);
        break;
      case OpKind::Connect:
        switch_.port_map[{op.uuid, op.nic}].insert(op.vlan);
        trace_.emit(op.uuid, "-", EventKind::Connect,
                    net_detail + "/nic:" + op.nic);
        break;
      case OpKind::Detach: {
        auto it = switch_.port_map.find({op.uuid, op.nic});
        if (it != switch_.port_map.end()) {
          it->second.erase(op.vlan);
          if (it->second.empty()) switch_.port_map.erase(it);
        }
        trace_.emit(op.uuid, "-", EventKind::Detach,
                    net_detail + "/nic:" + op.nic);
        break;
      }
    }
    ++applied;
  }
  trace_.emit("-", "-", EventKind::Drain, "applied:" + std::to_string(applied));

  // Mirror invariant: once drained, the switch state equals the union of all
  // logical memberships.
  std::map<std::pair<std::string, std::string>, std::set<uint16_t>> want;
  for (const auto& [id, net] : nets_)
    for (const auto& member : net.members) want[member].insert(net.vlan);
  if (want != switch_.port_map)
    throw std::logic_error("switch state diverged from logical membership");

  return applied;
}

bool IsolationService::queue_empty() const {
  std::lock_guard<std::mutex> lk(mu_);
  return queue_.empty();
}

std::set<uint16_t> IsolationService::port_vlans(const std::string& uuid) const {
  std::lock_guard<std::mutex> lk(mu_);
  std::set<uint16_t> out;
  for (const auto& [port, vlans] : switch_.port_map)
    if (port.first == uuid) out.insert(vlans.begin(), vlans.end());
  return out;
}

bool IsolationService::reachable(const std::string& a,
                                 const std::string& b) const {
  if (a == b) return true;
  std::set<uint16_t> va = port_vlans(a);
  std::set<uint16_t> vb = port_vlans(b);
  for (uint16_t v : va)
    if (vb.count(v)) return true;
  return false;
}

std::set<std::string> IsolationService::reachable_set(
    const std::string& uuid) const {
  std::set<uint16_t> mine = port_vlans(uuid);
  std::lock_guard<std::mutex> lk(mu_);
  std::set<std::string> out;
  for (const auto& [port, vlans] : switch_.port_map) {
    if (port.first == uuid) continue;
    for (uint16_t v : vlans)
      if (mine.count(v)) {
        out.insert(port.first);
        break;
      }
  }
  return out;
}

std::vector<std::string> IsolationService::free_pool() const {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<std::string> pool;
  for (const auto& [uuid, info] : nodes_)
    if (!info.project && !endpoint_ids_.count(uuid)) pool.push_back(uuid);
  return pool;
}

std::vector<std::string> IsolationService::node_nics(
    const std::string& uuid) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = nodes_.find(uuid);
  return it == nodes_.end() ? std::vector<std::string>{} : it->second.nics;
}

void IsolationService::restore_network(NetworkDef def) {
  std::lock_guard<std::mutex> lk(mu_);
  nets_[def.id] = std::move(def);
}

void IsolationService::restore_assignment(const std::string& uuid,
                                          const std::string& project) {
  std::lock_guard<std::mutex> lk(mu_);
  nodes_[uuid].project = project;
}

void IsolationService::rebuild_vlan_pool() {
  std::lock_guard<std::mutex> lk(mu_);
  free_vlans_.clear();
  for (uint32_t v = vlan_lo_; v <= vlan_hi_; ++v) {
    uint16_t tag = static_cast<uint16_t>(v);
    bool live = false;
    for (const auto& [id, net] : nets_)
      if (net.vlan == tag) live = true;
    if (!live) free_vlans_.insert(tag);
  }
}

}  // namespace airlock::isolation
