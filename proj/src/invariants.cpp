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

#include "invariants.hpp"

#include <optional>
#include <set>
#include <sstream>

namespace airlock::invariants {

std::map<std::string, std::string> parse_detail(const std::string& detail) {
  std::map<std::string, std::string> out;
  size_t pos = 0;
  while (pos < detail.size()) {
    size_t end = detail.find('/', pos);
    if (end == std::string::npos) end = detail.size();
    std::string field = detail.substr(pos, end - pos);
    size_t colon = field.find(':');
    if (colon != std::string::npos)
      out[field.substr(0, colon)] = field.substr(colon + 1);
    pos = end + 1;
  }
  return out;
}

namespace {

struct NodeTrack {
  std::string state = "Free";
  std::string profile;
  std::string project;
  uint64_t cycle = 0;
  bool pass_in_cycle = false;
  int shares_this_cycle = 0;
  bool has_key = false;
  // measure/execute pairing within the boot chain
  std::optional<std::string> pending_stage;
};

bool legal(const std::string& from, const std::string& to) {
  if (from == "Free") return to == "Airlock";
  if (from == "Airlock") return to == "Allocated" || to == "Rejected";
  if (from == "Allocated") return to == "Rejected" || to == "Free";
  if (from == "Rejected") return to == "Free";
  return false;
}

}  // namespace

std::vector<Violation> check_trace(const std::vector<Event>& events,
                                   const CheckerConfig& config) {
  std::vector<Violation> out;
  auto flag = [&](uint64_t seq, const std::string& rule, const std::string& msg) {
    out.push_back({seq, rule, msg});
  };

  const std::set<std::string> endpoints{config.attestation_endpoint,
                                        config.provisioning_endpoint};

  std::map<std::string, NodeTrack> nodes;
  std::map<std::pair<std::string, std::string>, std::set<uint16_t>> ports;
  std::map<uint16_t, std::string> live_vlan_kind;
  std::set<uint16_t> public_vlans;

  auto port_vlans = [&](const std::string& uuid) {
    std::set<uint16_t> vlans;
    for (const auto& [port, tags] : ports)
      if (port.first == uuid) vlans.insert(tags.begin(), tags.end());
    return vlans;
  };
  auto reachable_set = [&](const std::string& uuid) {
    std::set<uint16_t> mine = port_vlans(uuid);
    std::set<std::string> peers;
    for (const auto& [port, tags] : ports) {
      if (port.first == uuid) continue;
      for (uint16_t v : tags)
        if (mine.count(v)) {
          peers.insert(port.first);
          break;
        }
    }
    return peers;
  };

  auto check_quiescent = [&](uint64_t seq) {
    for (const auto& [uuid, track] : nodes) {
      if (endpoints.count(uuid)) continue;
      std::set<uint16_t> vlans = port_vlans(uuid);
      if (track.state == "Free" && !vlans.empty())
        flag(seq, "free-isolation", uuid + " is Free but holds ports");
      if (track.state == "Rejected" && !vlans.empty())
        flag(seq, "rejection-isolation", uuid + " is Rejected but holds ports");
      if (track.state == "Airlock") {
        std::set<std::string> peers = reachable_set(uuid);
        if (peers != endpoints)
          flag(seq, "airlock-confinement",
               uuid + " reaches " + std::to_string(peers.size()) +
                   " peers instead of exactly the two service endpoints");
      }
    }
    // Cross-project isolation over non-public vlans.
    for (auto a = nodes.begin(); a != nodes.end(); ++a) {
      if (endpoints.count(a->first) || a->second.project.empty()) continue;
      for (auto b = std::next(a); b != nodes.end(); ++b) {
        if (endpoints.count(b->first) || b->second.project.empty()) continue;
        if (a->second.project == b->second.project) continue;
        std::set<uint16_t> va = port_vlans(a->first);
        for (uint16_t v : port_vlans(b->first))
          if (va.count(v) && !public_vlans.count(v))
            flag(seq, "cross-project",
                 a->first + " (" + a->second.project + ") shares vlan " +
                     std::to_string(v) + " with " + b->first + " (" +
                     b->second.project + ")");
      }
    }
  };

  for (const Event& e : events) {
    auto detail = parse_detail(e.detail);
    NodeTrack* track = nullptr;
    if (e.node != "-" && !endpoints.count(e.node)) track = &nodes[e.node];

    switch (e.kind) {
      case EventKind::StateChange: {
        if (!track) break;
        const std::string& from = detail["from"];
        const std::string& to = detail["to"];
        if (from != track->state)
          flag(e.seq, "state-legality",
               e.node + " claims transition from " + from + " but is " +
                   track->state);
        if (!legal(from, to))
          flag(e.seq, "state-legality",
               e.node + " illegal transition " + from + " -> " + to);
        track->state = to;
        if (to == "Airlock") {
          if (detail.count("profile")) track->profile = detail["profile"];
          if (detail.count("project")) track->project = detail["project"];
        }
        if (to == "Free") {
          track->project.clear();
          if (track->has_key)
            flag(e.seq, "key-lifecycle",
                 e.node + " returned to Free; key erase must be part of the "
                          "same release");
        }
        break;
      }
      case EventKind::PowerOn: {
        if (!track) break;
        ++track->cycle;
        track->pass_in_cycle = false;
        track->shares_this_cycle = 0;
        track->pending_stage.reset();
        if (track->has_key)
          flag(e.seq, "key-lifecycle",
               e.node + " began a power cycle still holding a key");
        break;
      }
      case EventKind::Measure: {
        if (!track) break;
        if (e.phase == "Measuring") {
          if (track->pending_stage)
            flag(e.seq, "measure-order",
                 e.node + " measured " + detail["stage"] + " before executing " +
                     *track->pending_stage);
          track->pending_stage = detail["stage"];
        }
        break;
      }
      case EventKind::Execute: {
        if (!track) break;
        if (e.phase == "Measuring") {
          if (!track->pending_stage || *track->pending_stage != detail["stage"])
            flag(e.seq, "measure-order",
                 e.node + " executed " + detail["stage"] +
                     " without measuring it first");
          track->pending_stage.reset();
        }
        break;
      }
      case EventKind::AttestPass:
        if (track) track->pass_in_cycle = true;
        break;
      case EventKind::ShareRelease: {
        if (!track) break;
        if (!track->pass_in_cycle)
          flag(e.seq, "share-gating",
               e.node + " received a verifier share without a pass this cycle");
        if (++track->shares_this_cycle > 1)
          flag(e.seq, "share-gating",
               e.node + " received more than one share this cycle");
        break;
      }
      case EventKind::KeyCombine: {
        if (!track) break;
        if (!track->pass_in_cycle)
          flag(e.seq, "key-lifecycle",
               e.node + " combined a key without a pass this cycle");
        track->has_key = true;
        break;
      }
      case EventKind::KeyErase:
        if (track) track->has_key = false;
        break;
      case EventKind::NetCreate: {
        uint16_t vlan = static_cast<uint16_t>(std::stoul(detail["vlan"]));
        if (live_vlan_kind.count(vlan))
          flag(e.seq, "vlan-uniqueness",
               "vlan " + detail["vlan"] + " created twice (" + detail["net"] +
                   " vs live " + live_vlan_kind[vlan] + ")");
        live_vlan_kind[vlan] = detail["net"];
        if (detail["kind"] == "public") public_vlans.insert(vlan);
        break;
      }
      case EventKind::NetDelete: {
        uint16_t vlan = static_cast<uint16_t>(std::stoul(detail["vlan"]));
        live_vlan_kind.erase(vlan);
        public_vlans.erase(vlan);
        break;
      }
      case EventKind::Connect: {
        uint16_t vlan = static_cast<uint16_t>(std::stoul(detail["vlan"]));
        ports[{e.node, detail["nic"]}].insert(vlan);
        if (track && detail["kind"] == "enclave") {
          auto profile = track->profile;
          bool attested = profile == "full" || profile == "attested";
          if (attested && !track->pass_in_cycle)
            flag(e.seq, "admission-safety",
                 e.node + " connected to enclave network " + detail["net"] +
                     " before attestation pass");
        }
        break;
      }
      case EventKind::Detach: {
        uint16_t vlan = static_cast<uint16_t>(std::stoul(detail["vlan"]));
        auto it = ports.find({e.node, detail["nic"]});
        if (it != ports.end()) {
          it->second.erase(vlan);
          if (it->second.empty()) ports.erase(it);
        }
        break;
      }
      case EventKind::Drain:
        check_quiescent(e.seq);
        break;
      default:
        break;
    }
  }
  if (!events.empty()) check_quiescent(events.back().seq);
  return out;
}

std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (const Violation& v : violations)
    os << "seq=" << v.seq << " rule=" << v.rule << " " << v.message << "\n";
  return os.str();
}

}  // namespace airlock::invariants
