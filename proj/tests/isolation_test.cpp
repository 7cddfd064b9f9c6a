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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <thread>

#include "doctest.h"
#include "isolation.hpp"

using namespace airlock;
using namespace airlock::isolation;

namespace {

struct Rig {
  TraceCollector trace;
  crypto::Rng rng{42};
  IsolationService svc{100, 199, trace};

  Rig() {
    svc.add_node("node-a", {"nic0"});
    svc.add_node("node-b", {"nic0"});
    svc.add_node("node-c", {"nic0"});
    svc.register_endpoint("svc-attestation", "svc0");
    svc.register_endpoint("svc-provisioning", "svc0");
  }
};

}  // namespace

TEST_CASE("allocation draws from the free pool atomically") {
  Rig rig;
  CHECK(rig.svc.free_pool().size() == 3);
  auto n1 = rig.svc.allocate_node("alice", rig.rng);
  REQUIRE(n1);
  CHECK(rig.svc.free_pool().size() == 2);
  CHECK(rig.svc.project_of(n1.value()).value() == "alice");

  // Freshly allocated: member of zero networks, unreachable from anything.
  CHECK(rig.svc.port_vlans(n1.value()).empty());
  CHECK(rig.svc.reachable_set(n1.value()).empty());

  REQUIRE(rig.svc.allocate_node("alice", rig.rng));
  REQUIRE(rig.svc.allocate_node("bob", rig.rng));
  auto none = rig.svc.allocate_node("carol", rig.rng);
  CHECK_FALSE(none);
  CHECK(none.error() == Err::NoFreeNodes);
}

TEST_CASE("networks get unique vlans until the pool runs dry") {
  TraceCollector trace;
  IsolationService svc(100, 102, trace);
  auto a = svc.create_network("alice", Visibility::Private, false, false);
  auto b = svc.create_network("alice", Visibility::Private, false, false);
  auto c = svc.create_network("bob", Visibility::Public, false, false);
  REQUIRE(a);
  REQUIRE(b);
  REQUIRE(c);
  std::set<uint16_t> vlans{svc.networks().at(a.value()).vlan,
                           svc.networks().at(b.value()).vlan,
                           svc.networks().at(c.value()).vlan};
  CHECK(vlans.size() == 3);
  auto d = svc.create_network("alice", Visibility::Private, false, false);
  CHECK_FALSE(d);
  CHECK(d.error() == Err::NoVlansAvailable);

  // Deleting a network frees its tag once the queue applies it.
  svc.drain_operations();
  REQUIRE(svc.delete_network(a.value()));
  svc.drain_operations();
  auto e = svc.create_network("alice", Visibility::Private, false, false);
  CHECK(e);
}

TEST_CASE("connect takes effect at drain; membership rules enforced") {
  Rig rig;
  auto node = rig.svc.allocate_node("alice", rig.rng);
  REQUIRE(node);
  auto net = rig.svc.create_network("alice", Visibility::Private, false, false,
                                    "net-alice");
  REQUIRE(net);
  REQUIRE(rig.svc.connect(node.value(), "nic0", "net-alice"));
  // Switch state lags until the engine runs.
  CHECK(rig.svc.port_vlans(node.value()).empty());
  rig.svc.drain_operations();
  CHECK(rig.svc.port_vlans(node.value()).size() == 1);

  // Second member makes the two reachable.
  auto peer = rig.svc.allocate_node("alice", rig.rng);
  REQUIRE(peer);
  REQUIRE(rig.svc.connect(peer.value(), "nic0", "net-alice"));
  rig.svc.drain_operations();
  CHECK(rig.svc.reachable(node.value(), peer.value()));

  // Cross-project connect to a Private network is forbidden.
  auto outsider = rig.svc.allocate_node("bob", rig.rng);
  REQUIRE(outsider);
  auto denied = rig.svc.connect(outsider.value(), "nic0", "net-alice");
  CHECK_FALSE(denied);
  CHECK(denied.error() == Err::Forbidden);

  // Detach of a non-member is refused.
  auto not_member = rig.svc.detach(outsider.value(), "nic0", "net-alice");
  CHECK_FALSE(not_member);
  CHECK(not_member.error() == Err::NotAMember);

  // Duplicate connect is refused.
  auto dup = rig.svc.connect(node.value(), "nic0", "net-alice");
  CHECK_FALSE(dup);
  CHECK(dup.error() == Err::AlreadyMember);

  // Unknown network / node / nic.
  CHECK(rig.svc.connect(node.value(), "nic0", "ghost").error() ==
        Err::NoSuchNetwork);
  CHECK(rig.svc.connect("ghost", "nic0", "net-alice").error() == Err::NoSuchNode);
  CHECK(rig.svc.connect(node.value(), "nic9", "net-alice").error() ==
        Err::NoSuchNode);
}

TEST_CASE("endpoints may join airlock networks but not plain private ones") {
  Rig rig;
  auto node = rig.svc.allocate_node("alice", rig.rng);
  REQUIRE(node);
  auto alk = rig.svc.create_network("alice", Visibility::Private, true, false,
                                    "alk-1");
  REQUIRE(alk);
  REQUIRE(rig.svc.connect("svc-attestation", "svc0", "alk-1"));
  REQUIRE(rig.svc.connect("svc-provisioning", "svc0", "alk-1"));
  REQUIRE(rig.svc.connect(node.value(), "nic0", "alk-1"));
  rig.svc.drain_operations();
  CHECK(rig.svc.reachable_set(node.value()) ==
        std::set<std::string>{"svc-attestation", "svc-provisioning"});

  auto plain = rig.svc.create_network("alice", Visibility::Private, false,
                                      false, "net-alice");
  REQUIRE(plain);
  auto denied = rig.svc.connect("svc-attestation", "svc0", "net-alice");
  CHECK_FALSE(denied);
  CHECK(denied.error() == Err::Forbidden);
}

TEST_CASE("airlock and enclave networks are mutually unreachable") {
  Rig rig;
  auto a = rig.svc.allocate_node("alice", rig.rng);
  auto b = rig.svc.allocate_node("alice", rig.rng);
  REQUIRE(a);
  REQUIRE(b);
  REQUIRE(rig.svc.create_network("alice", Visibility::Private, true, false,
                                 "alk-a"));
  REQUIRE(rig.svc.create_network("alice", Visibility::Private, false, false,
                                 "net-alice"));
  REQUIRE(rig.svc.connect(a.value(), "nic0", "alk-a"));
  REQUIRE(rig.svc.connect(b.value(), "nic0", "net-alice"));
  rig.svc.drain_operations();
  CHECK_FALSE(rig.svc.reachable(a.value(), b.value()));
}

TEST_CASE("deleting a network with members is refused") {
  Rig rig;
  auto node = rig.svc.allocate_node("alice", rig.rng);
  REQUIRE(node);
  REQUIRE(rig.svc.create_network("alice", Visibility::Private, false, false,
                                 "net-alice"));
  REQUIRE(rig.svc.connect(node.value(), "nic0", "net-alice"));
  auto refused = rig.svc.delete_network("net-alice");
  CHECK_FALSE(refused);
  CHECK(refused.error() == Err::NetworkNotEmpty);
  REQUIRE(rig.svc.detach(node.value(), "nic0", "net-alice"));
  REQUIRE(rig.svc.delete_network("net-alice"));
  rig.svc.drain_operations();
  CHECK(rig.svc.networks().count("net-alice") == 0);
}

TEST_CASE("drain applies nothing on an empty queue") {
  Rig rig;
  CHECK(rig.svc.drain_operations() == 0);
}

TEST_CASE("conflicting operations settle in ticket order") {
  Rig rig;
  auto node = rig.svc.allocate_node("alice", rig.rng);
  REQUIRE(node);
  REQUIRE(rig.svc.create_network("alice", Visibility::Private, false, false,
                                 "net-alice"));
  auto t1 = rig.svc.connect(node.value(), "nic0", "net-alice");
  auto t2 = rig.svc.detach(node.value(), "nic0", "net-alice");
  REQUIRE(t1);
  REQUIRE(t2);
  CHECK(t1.value() < t2.value());
  rig.svc.drain_operations();
  CHECK(rig.svc.port_vlans(node.value()).empty());
}

// Straight-line oracle: applies the recorded intents sequentially.
namespace {
struct OracleOp {
  bool connect;
  std::string uuid, nic;
  uint16_t vlan;
};
using PortMap = std::map<std::pair<std::string, std::string>, std::set<uint16_t>>;

PortMap oracle_apply(const std::vector<OracleOp>& ops) {
  PortMap pm;
  for (const auto& op : ops) {
    if (op.connect) {
      pm[{op.uuid, op.nic}].insert(op.vlan);
    } else {
      auto it = pm.find({op.uuid, op.nic});
      if (it != pm.end()) {
        it->second.erase(op.vlan);
        if (it->second.empty()) pm.erase(it);
      }
    }
  }
  return pm;
}
}  // namespace

TEST_CASE("interleaved enqueues equal ticket-order sequential application") {
  crypto::Rng seeds(2718);
  for (int trial = 0; trial < 20; ++trial) {
    TraceCollector trace;
    crypto::Rng rng(seeds.next_u64());
    IsolationService svc(100, 199, trace);
    // Two tenants with three nodes and two networks each.
    std::vector<std::pair<std::string, std::vector<std::string>>> tenants;
    for (std::string t : {"alice", "bob"}) {
      std::vector<std::string> members;
      for (int i = 0; i < 3; ++i) {
        std::string uuid = t + "-n" + std::to_string(i);
        svc.add_node(uuid, {"nic0"});
        auto got = svc.allocate_node(t, rng);
        REQUIRE(got);
        members.push_back(got.value());
      }
      REQUIRE(svc.create_network(t, Visibility::Private, false, false, t + "-x"));
      REQUIRE(svc.create_network(t, Visibility::Private, false, false, t + "-y"));
      tenants.emplace_back(t, members);
    }
    svc.drain_operations();

    // Interleave 40 membership flips across the tenants, tracking intents.
    std::vector<OracleOp> intents;
    std::map<std::pair<std::string, std::string>, bool> member_now;
    for (int i = 0; i < 40; ++i) {
      const auto& [t, members] = tenants[rng.pick(tenants.size())];
      const std::string& uuid = members[rng.pick(members.size())];
      std::string net = t + (rng.pick(2) ? "-x" : "-y");
      uint16_t vlan = svc.networks().at(net).vlan;
      bool is_member = member_now[{uuid, net}];
      if (is_member) {
        REQUIRE(svc.detach(uuid, "nic0", net));
        intents.push_back({false, uuid, "nic0", vlan});
      } else {
        REQUIRE(svc.connect(uuid, "nic0", net));
        intents.push_back({true, uuid, "nic0", vlan});
      }
      member_now[{uuid, net}] = !is_member;
    }
    size_t applied = svc.drain_operations();
    CHECK(applied == 40);
    CHECK(svc.switch_config().port_map == oracle_apply(intents));
  }
}

TEST_CASE("enqueue is safe from concurrent threads") {
  TraceCollector trace;
  crypto::Rng rng(1);
  IsolationService svc(100, 199, trace);
  constexpr int kThreads = 4;
  constexpr int kOpsPerThread = 50;
  for (int t = 0; t < kThreads; ++t) {
    std::string uuid = "thr-" + std::to_string(t);
    svc.add_node(uuid, {"nic0"});
    auto got = svc.allocate_node("proj-" + std::to_string(t), rng);
    REQUIRE(got);
    REQUIRE(svc.create_network("proj-" + std::to_string(t), Visibility::Private,
                               false, false, "net-" + std::to_string(t)));
  }
  svc.drain_operations();

  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&svc, t] {
      std::string uuid = "thr-" + std::to_string(t);
      std::string net = "net-" + std::to_string(t);
      for (int i = 0; i < kOpsPerThread; ++i) {
        REQUIRE(svc.connect(uuid, "nic0", net));
        REQUIRE(svc.detach(uuid, "nic0", net));
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(svc.drain_operations() == kThreads * kOpsPerThread * 2);
  // Every thread ended detached; the mirror check inside drain also ran.
  CHECK(svc.switch_config().port_map.empty());
}
