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

#include "orchestrator.hpp"

#include <algorithm>
#include <stdexcept>

namespace airlock::orch {

const char* state_name(NodeState s) {
  switch (s) {
    case NodeState::Free: return "Free";
    case NodeState::Airlock: return "Airlock";
    case NodeState::Allocated: return "Allocated";
    case NodeState::Rejected: return "Rejected";
  }
  return "?";
}

std::optional<NodeState> state_from_name(std::string_view name) {
  for (NodeState s : {NodeState::Free, NodeState::Airlock, NodeState::Allocated,
                      NodeState::Rejected})
    if (name == state_name(s)) return s;
  return std::nullopt;
}

std::optional<TrustProfile> profile_by_name(std::string_view name) {
  if (name == "full") return TrustProfile{"full", true, true, true};
  if (name == "attested") return TrustProfile{"attested", true, false, false};
  if (name == "unattested")
    return TrustProfile{"unattested", false, false, false};
  return std::nullopt;
}

namespace {

bool legal_transition(NodeState from, NodeState to) {
  switch (from) {
    case NodeState::Free: return to == NodeState::Airlock;
    case NodeState::Airlock:
      return to == NodeState::Allocated || to == NodeState::Rejected;
    case NodeState::Allocated:
      return to == NodeState::Rejected || to == NodeState::Free;
    case NodeState::Rejected: return to == NodeState::Free;
  }
  return false;
}

}  // namespace

Orchestrator::Orchestrator(Fleet& fleet, isolation::IsolationService& isolation,
                           provision::ImageCatalog& images,
                           attest::Registrar& registrar,
                           attest::Verifier& verifier,
                           attest::Whitelist& whitelist, TraceCollector& trace,
                           crypto::Rng& rng, OrchestratorOptions options)
    : fleet_(fleet),
      isolation_(isolation),
      images_(images),
      registrar_(registrar),
      verifier_(verifier),
      whitelist_(whitelist),
      trace_(trace),
      rng_(rng),
      options_(std::move(options)) {
  for (const auto& [uuid, fn] : fleet_) {
    NodeRecord rec;
    rec.uuid = uuid;
    records_[uuid] = rec;
  }
}

std::string Orchestrator::boot_policy_for(nodesim::FirmwareKind kind) {
  return kind == nodesim::FirmwareKind::HeadsFlashed ? "heads-default"
                                                     : "uefi-default";
}

const NodeRecord* Orchestrator::record(const std::string& uuid) const {
  auto it = records_.find(uuid);
  return it == records_.end() ? nullptr : &it->second;
}

void Orchestrator::restore_record(NodeRecord rec) {
  records_[rec.uuid] = std::move(rec);
}

void Orchestrator::set_tenant_networks(const std::string& tenant,
                                       std::vector<std::string> networks) {
  std::vector<std::string> unique;
  for (auto& net : networks)
    if (std::find(unique.begin(), unique.end(), net) == unique.end())
      unique.push_back(std::move(net));
  tenant_networks_[tenant] = std::move(unique);
}

std::vector<std::string>& Orchestrator::tenant_networks(
    const std::string& tenant) {
  auto it = tenant_networks_.find(tenant);
  if (it == tenant_networks_.end())
    it = tenant_networks_.emplace(tenant, std::vector<std::string>{"net-" + tenant})
             .first;
  return it->second;
}

Result<void> Orchestrator::set_state(const std::string& uuid, NodeState to,
                                     const std::string& extra_detail) {
  auto it = records_.find(uuid);
  if (it == records_.end()) return {Err::NoSuchNode, uuid};
  NodeRecord& rec = it->second;
  if (!legal_transition(rec.state, to))
    return {Err::InvalidTransition, uuid + ": " + state_name(rec.state) +
                                        " -> " + state_name(to)};
  std::string detail = std::string("from:") + state_name(rec.state) +
                       "/to:" + state_name(to);
  if (!extra_detail.empty()) detail += "/" + extra_detail;
  const auto& node = fleet_.at(uuid).sim;
  uint64_t seq =
      trace_.emit(uuid, nodesim::phase_name(node.phase()), EventKind::StateChange,
                  detail);
  rec.history.push_back(seq);
  rec.state = to;
  return ok();
}

void Orchestrator::detach_everywhere(const std::string& uuid) {
  // Enqueue a detach for every membership the node still holds.
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> drops;
  for (const auto& [id, net] : isolation_.networks())
    for (const auto& member : net.members)
      if (member.first == uuid) drops.push_back({id, member});
  for (const auto& [id, member] : drops)
    must(isolation_.detach(member.first, member.second, id));
}

std::string Orchestrator::runtime_policy_for(const std::string& boot_policy) {
  crypto::Digest kd = crypto::sha256(options_.os_kernel_payload);
  std::string name = boot_policy + "+os-" + kd.hex().substr(0, 8);
  if (!whitelist_.has(name)) {
    auto events = whitelist_.entries().at(boot_policy);
    events.emplace_back(tpm::kPcrPayload, kd);
    whitelist_.add_entry(name, events);
  }
  return name;
}

void AdmissionWorkflow::fail_to_reject(Err err, const std::string& detail) {
  outcome_.error = err;
  reject_reason_ = detail.empty() ? err_name(err) : detail;
  state_ = St::Reject;
}

void AdmissionWorkflow::step() {
  Orchestrator& o = orch_;
  switch (state_) {
    case St::EnterAirlock: {
      auto got = o.isolation_.allocate_node(tenant_, o.rng_);
      if (!got) {
        outcome_ = AdmitOutcome{"", NodeState::Free, got.error(), got.message()};
        state_ = St::Done;
        return;
      }
      uuid_ = got.value();
      outcome_.uuid = uuid_;
      NodeRecord& rec = o.records_.at(uuid_);
      rec.project = tenant_;
      rec.profile = profile_.name;
      rec.attached_clone.reset();
      // State change first, then the wiring batch, then one drain: at every
      // queue-quiescent point the node is either Free+unwired or
      // Airlock+exactly-two-endpoints.
      auto sc = o.set_state(uuid_, NodeState::Airlock,
                            "project:" + tenant_ + "/profile:" + profile_.name);
      if (!sc) throw std::logic_error(sc.describe());
      auto net = o.isolation_.create_network(tenant_, isolation::Visibility::Private,
                                             /*airlock=*/true, /*encrypted=*/false,
                                             "alk-" + uuid_);
      if (!net) {
        fail_to_reject(net.error(), net.message());
        return;
      }
      rec.airlock_net = net.value();
      must(o.isolation_.connect(o.options_.attestation_endpoint, "svc0", net.value()));
      must(o.isolation_.connect(o.options_.provisioning_endpoint, "svc0", net.value()));
      must(o.isolation_.connect(uuid_, "nic0", net.value()));
      o.isolation_.drain_operations();
      o.verifier_.set_policy(
          uuid_, Orchestrator::boot_policy_for(o.fleet_.at(uuid_).sim.firmware()));
      state_ = St::PowerOn;
      return;
    }
    case St::PowerOn: {
      auto up = o.fleet_.at(uuid_).sim.power_on();
      if (!up) {
        fail_to_reject(up.error(), up.message());
        return;
      }
      o.verifier_.begin_cycle(uuid_);
      state_ = profile_.attested ? St::Enroll : St::Provision;
      return;
    }
    case St::Enroll: {
      if (o.registrar_.is_enrolled(uuid_)) {
        state_ = St::Attest;
        return;
      }
      auto& node = o.fleet_.at(uuid_).sim;
      auto ct = o.registrar_.register_node(uuid_, node.tpm_identity().ek_pub(),
                                           node.tpm_identity().aik_pub(), o.rng_);
      if (!ct) {
        fail_to_reject(ct.error(), ct.message());
        return;
      }
      auto secret = node.tpm_identity().activate_credential(ct.value());
      if (!secret) {
        fail_to_reject(secret.error(), "credential activation failed");
        return;
      }
      auto confirmed = o.registrar_.confirm_enrollment(uuid_, secret.value());
      if (!confirmed) {
        fail_to_reject(confirmed.error(), confirmed.message());
        return;
      }
      state_ = St::Attest;
      return;
    }
    case St::Attest: {
      auto& node = o.fleet_.at(uuid_).sim;
      tpm::Nonce nonce = o.verifier_.issue_nonce(uuid_);
      auto q = node.send_attestation_quote(nonce);
      if (!q) {
        fail_to_reject(q.error(), q.message());
        return;
      }
      auto r = o.verifier_.attest_once(uuid_, q.value());
      if (!r) {
        fail_to_reject(r.error(), r.message());
        return;
      }
      if (!r.value().pass) {
        fail_to_reject(Err::None, "attestation " + r.value().describe());
        return;
      }
      state_ = St::Provision;
      return;
    }
    case St::Provision: {
      auto& node = o.fleet_.at(uuid_).sim;
      NodeRecord& rec = o.records_.at(uuid_);
      auto clone = o.images_.clone_image(o.options_.base_image);
      if (!clone) {
        fail_to_reject(clone.error(), clone.message());
        return;
      }
      nodesim::Stage kernel{"os-kernel", o.options_.os_kernel_payload,
                            tpm::kPcrPayload, nodesim::StageOrigin::Downloaded};
      if (profile_.attested) {
        Key32 tenant_share = o.rng_.key32();
        auto verifier_share = o.verifier_.bootstrap_key(uuid_);
        if (!verifier_share) {
          fail_to_reject(verifier_share.error(), verifier_share.message());
          return;
        }
        if (profile_.encrypt_storage) {
          Key32 k = xor_keys(tenant_share, verifier_share.value());
          must(o.images_.wrap_image(clone.value(), k, o.rng_));
          auto unlocked = o.images_.unlock_image(clone.value(), k);
          if (!unlocked) {
            fail_to_reject(unlocked.error(), unlocked.message());
            return;
          }
        }
        must(o.images_.attach_boot_target(uuid_, clone.value()));
        auto booted =
            node.receive_key_and_boot_os(tenant_share, verifier_share.value(), kernel);
        if (!booted) {
          fail_to_reject(booted.error(), booted.message());
          return;
        }
        // Future polls must expect the kernel measurement too.
        std::string boot_policy = Orchestrator::boot_policy_for(node.firmware());
        o.verifier_.set_policy(uuid_, o.runtime_policy_for(boot_policy));
      } else {
        must(o.images_.attach_boot_target(uuid_, clone.value()));
        auto booted = node.boot_os(kernel);
        if (!booted) {
          fail_to_reject(booted.error(), booted.message());
          return;
        }
      }
      rec.attached_clone = clone.value();
      state_ = St::Adopt;
      return;
    }
    case St::Adopt: {
      NodeRecord& rec = o.records_.at(uuid_);
      auto sc = o.set_state(uuid_, NodeState::Allocated, "project:" + tenant_);
      if (!sc) throw std::logic_error(sc.describe());
      for (const std::string& net : o.tenant_networks(tenant_)) {
        if (!o.isolation_.networks().count(net))
          must(o.isolation_.create_network(tenant_, isolation::Visibility::Private,
                                           /*airlock=*/false,
                                           profile_.encrypt_network, net));
        must(o.isolation_.connect(uuid_, "nic0", net));
      }
      if (rec.airlock_net) {
        must(o.isolation_.detach(uuid_, "nic0", *rec.airlock_net));
        must(o.isolation_.detach(o.options_.attestation_endpoint, "svc0",
                                 *rec.airlock_net));
        must(o.isolation_.detach(o.options_.provisioning_endpoint, "svc0",
                                 *rec.airlock_net));
        must(o.isolation_.delete_network(*rec.airlock_net));
        rec.airlock_net.reset();
      }
      o.isolation_.drain_operations();
      outcome_.final_state = NodeState::Allocated;
      state_ = St::Done;
      return;
    }
    case St::Reject: {
      NodeRecord& rec = o.records_.at(uuid_);
      auto sc = o.set_state(uuid_, NodeState::Rejected, "reason:" + reject_reason_);
      if (!sc) throw std::logic_error(sc.describe());
      must(o.images_.detach_boot_target(uuid_));
      o.detach_everywhere(uuid_);
      if (rec.airlock_net) {
        must(o.isolation_.detach(o.options_.attestation_endpoint, "svc0",
                                 *rec.airlock_net));
        must(o.isolation_.detach(o.options_.provisioning_endpoint, "svc0",
                                 *rec.airlock_net));
        must(o.isolation_.delete_network(*rec.airlock_net));
        rec.airlock_net.reset();
      }
      o.isolation_.drain_operations();
      o.fleet_.at(uuid_).sim.power_off();
      outcome_.final_state = NodeState::Rejected;
      outcome_.detail = reject_reason_;
      state_ = St::Done;
      return;
    }
    case St::Done:
      return;
  }
}

std::vector<AdmitOutcome> Orchestrator::run_admissions(
    const std::vector<std::pair<std::string, TrustProfile>>& requests) {
  std::vector<std::unique_ptr<AdmissionWorkflow>> flows;
  flows.reserve(requests.size());
  for (const auto& [tenant, profile] : requests)
    flows.push_back(std::make_unique<AdmissionWorkflow>(*this, tenant, profile));

  while (true) {
    std::vector<size_t> runnable;
    for (size_t i = 0; i < flows.size(); ++i)
      if (!flows[i]->done()) runnable.push_back(i);
    if (runnable.empty()) break;
    flows[runnable[rng_.pick(runnable.size())]]->step();
  }

  std::vector<AdmitOutcome> out;
  out.reserve(flows.size());
  for (const auto& f : flows) out.push_back(f->outcome());
  return out;
}

AdmitOutcome Orchestrator::admit_node(const std::string& tenant,
                                      const TrustProfile& profile) {
  return run_admissions({{tenant, profile}}).front();
}

std::vector<AdmitOutcome> Orchestrator::admit_many(const std::string& tenant,
                                                   size_t count,
                                                   const TrustProfile& profile) {
  std::vector<std::pair<std::string, TrustProfile>> reqs(count,
                                                         {tenant, profile});
  return run_admissions(reqs);
}

Result<void> Orchestrator::release_node(const std::string& uuid) {
  auto it = records_.find(uuid);
  if (it == records_.end()) return {Err::NoSuchNode, uuid};
  NodeRecord& rec = it->second;
  if (rec.state != NodeState::Allocated)
    return {Err::InvalidTransition,
            uuid + ": release from " + state_name(rec.state)};
  auto& node = fleet_.at(uuid).sim;
  node.scrub_memory();
  must(images_.detach_boot_target(uuid));
  node.power_off();  // erases the key before the node leaves Allocated
  auto sc = set_state(uuid, NodeState::Free, "reason:release");
  if (!sc) return sc;
  detach_everywhere(uuid);
  isolation_.drain_operations();
  isolation_.release_to_pool(uuid);
  rec.project.reset();
  rec.airlock_net.reset();
  // The clone layer stays in the catalog (tenant data); admission always
  // provisions successors from a fresh clone of the base.
  rec.attached_clone.reset();
  return ok();
}

void Orchestrator::handle_revocation(const std::string& uuid,
                                     const attest::AttestationResult& result) {
  if (result.pass) return;
  auto it = records_.find(uuid);
  if (it == records_.end()) return;
  NodeRecord& rec = it->second;
  if (rec.state != NodeState::Allocated) return;  // idempotent
  trace_.emit(uuid, nodesim::phase_name(fleet_.at(uuid).sim.phase()),
              EventKind::Revoke, "reason:" + result.describe());
  auto sc = set_state(uuid, NodeState::Rejected, "reason:" + result.describe());
  if (!sc) throw std::logic_error(sc.describe());
  must(images_.detach_boot_target(uuid));
  detach_everywhere(uuid);
  isolation_.drain_operations();
  verifier_.invalidate_key(uuid);
  fleet_.at(uuid).sim.power_off();
}

Result<void> Orchestrator::clean_node(const std::string& uuid) {
  auto it = records_.find(uuid);
  if (it == records_.end()) return {Err::NoSuchNode, uuid};
  NodeRecord& rec = it->second;
  if (rec.state != NodeState::Rejected)
    return {Err::InvalidTransition,
            uuid + ": clean from " + state_name(rec.state)};
  FleetNode& fn = fleet_.at(uuid);
  fn.sim.replace_stages(fn.pristine);
  fn.sim.scrub_memory();
  trace_.emit(uuid, nodesim::phase_name(fn.sim.phase()), EventKind::Clean, "");
  auto sc = set_state(uuid, NodeState::Free, "reason:cleaned");
  if (!sc) return sc;
  isolation_.release_to_pool(uuid);
  rec.project.reset();
  rec.airlock_net.reset();
  return ok();
}

std::vector<std::pair<std::string, attest::AttestationResult>>
Orchestrator::poll_once() {
  std::vector<std::string> targets;
  for (const auto& [uuid, rec] : records_) {
    if (rec.state != NodeState::Allocated) continue;
    auto profile = profile_by_name(rec.profile);
    if (profile && profile->attested) targets.push_back(uuid);
  }
  auto results = verifier_.poll_tick(
      targets, [this](const std::string& uuid,
                      const tpm::Nonce& nonce) -> std::optional<tpm::Quote> {
        auto q = fleet_.at(uuid).sim.runtime_quote(nonce);
        if (!q) return std::nullopt;
        return q.value();
      });
  for (const auto& [uuid, result] : results)
    if (!result.pass) handle_revocation(uuid, result);
  return results;
}

std::vector<std::pair<std::string, attest::AttestationResult>>
Orchestrator::tick() {
  ++tick_counter_;
  if (tick_counter_ % verifier_.poll_interval() != 0) return {};
  return poll_once();
}

}  // namespace airlock::orch
