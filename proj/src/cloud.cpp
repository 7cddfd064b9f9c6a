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

#include "cloud.hpp"

#include <set>
#include <sstream>

namespace airlock::cloud {

std::vector<nodesim::Stage> stages_for(const NodeSpec& spec) {
  std::vector<nodesim::Stage> stages = nodesim::default_stages(spec.firmware);
  for (auto& stage : stages) {
    auto it = spec.stage_overrides.find(stage.name);
    if (it != spec.stage_overrides.end()) stage.payload = it->second;
  }
  return stages;
}

Result<std::unique_ptr<Cloud>> Cloud::create(const CloudSpec& spec) {
  auto cloud = std::unique_ptr<Cloud>(new Cloud());
  cloud->seed_ = spec.seed;
  cloud->rng_ = crypto::Rng(spec.seed);
  cloud->isolation_ = std::make_unique<isolation::IsolationService>(
      spec.vlan_lo, spec.vlan_hi, cloud->trace_);
  cloud->images_ = std::make_unique<provision::ImageCatalog>(cloud->trace_);
  cloud->registrar_ = std::make_unique<attest::Registrar>(cloud->trace_);

  orch::OrchestratorOptions options;
  options.os_kernel_payload = spec.os_kernel_payload.empty()
                                  ? nodesim::default_stage_payload("os-kernel")
                                  : spec.os_kernel_payload;

  cloud->isolation_->register_endpoint(options.attestation_endpoint, "svc0");
  cloud->isolation_->register_endpoint(options.provisioning_endpoint, "svc0");

  std::set<std::string> seen;
  for (const NodeSpec& ns : spec.nodes) {
    if (!seen.insert(ns.uuid).second)
      return {Err::InvalidConfig, "duplicate uuid " + ns.uuid};
    std::vector<nodesim::Stage> stages = stages_for(ns);
    Key32 tpm_seed = cloud->rng_.key32();
    try {
      cloud->fleet_.emplace(
          ns.uuid, orch::FleetNode{nodesim::NodeSim(ns.uuid, ns.firmware,
                                                    tpm_seed, stages,
                                                    ns.memory_bytes,
                                                    cloud->trace_),
                                   stages});
    } catch (const std::invalid_argument& e) {
      return {Err::InvalidConfig, e.what()};
    }
    cloud->isolation_->add_node(ns.uuid, {"nic0"});
  }

  std::vector<ImageSpec> images = spec.images;
  if (images.empty()) images.push_back({"base", Bytes(16 * 1024, 0)});
  for (const ImageSpec& is : images) {
    auto created = cloud->images_->create_image(is.content, is.id);
    if (!created) return {created.error(), created.message()};
  }
  cloud->default_image_ =
      spec.default_image.empty() ? images.front().id : spec.default_image;
  if (!cloud->images_->has_image(cloud->default_image_))
    return {Err::InvalidConfig, "unknown default image " + cloud->default_image_};
  options.base_image = cloud->default_image_;

  if (spec.whitelist_auto) {
    for (nodesim::FirmwareKind kind :
         {nodesim::FirmwareKind::HeadsFlashed, nodesim::FirmwareKind::StockUefi}) {
      attest::Whitelist::EventList events;
      for (const nodesim::Stage& s : nodesim::default_stages(kind))
        events.emplace_back(s.pcr_index, crypto::sha256(s.payload));
      cloud->whitelist_.add_entry(orch::Orchestrator::boot_policy_for(kind),
                                  std::move(events));
    }
  }
  if (!spec.whitelist_text.empty()) {
    auto parsed = attest::Whitelist::parse(spec.whitelist_text);
    if (!parsed) return {parsed.error(), parsed.message()};
    for (const auto& [name, events] : parsed.value().entries())
      cloud->whitelist_.add_entry(name, events);
  }

  cloud->verifier_ = std::make_unique<attest::Verifier>(
      cloud->whitelist_, *cloud->registrar_, cloud->trace_, cloud->rng_);
  cloud->orchestrator_ = std::make_unique<orch::Orchestrator>(
      cloud->fleet_, *cloud->isolation_, *cloud->images_, *cloud->registrar_,
      *cloud->verifier_, cloud->whitelist_, cloud->trace_, cloud->rng_, options);
  return cloud;
}

void Cloud::reseed(uint64_t seed) {
  seed_ = seed;
  rng_ = crypto::Rng(seed);
}

std::string Cloud::status_text() const {
  std::ostringstream os;
  os << "nodes:\n";
  for (const auto& [uuid, rec] : orchestrator_->records()) {
    const auto& sim = fleet_.at(uuid).sim;
    os << "  " << uuid << " firmware=" << nodesim::firmware_name(sim.firmware())
       << " state=" << orch::state_name(rec.state)
       << " phase=" << nodesim::phase_name(sim.phase())
       << " project=" << (rec.project ? *rec.project : "-")
       << " clone=" << (rec.attached_clone ? *rec.attached_clone : "-") << "\n";
  }
  os << "networks:\n";
  for (const auto& [id, net] : isolation_->networks()) {
    os << "  " << id << " vlan=" << net.vlan << " kind="
       << (net.airlock ? "airlock"
                       : (net.visibility == isolation::Visibility::Public
                              ? "public"
                              : "enclave"))
       << " project=" << (net.project.empty() ? "-" : net.project)
       << " members=" << net.members.size() << "\n";
  }
  os << "images:\n";
  for (const auto& [id, img] : images_->images()) {
    os << "  " << id << " length=" << img.length
       << " origin=" << (img.origin ? *img.origin : "-")
       << (img.frozen ? " frozen" : "")
       << (img.enc.wrapped ? (img.enc.unlocked ? " unlocked" : " locked") : "")
       << "\n";
  }
  os << "free-pool: " << isolation_->free_pool().size() << "\n";
  return os.str();
}

}  // namespace airlock::cloud
