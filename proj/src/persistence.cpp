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

#include "persistence.hpp"

#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

namespace airlock::cloud {

// Private-member access for the restore path; persistence rebuilds a Cloud
// from parts instead of going through CloudSpec.
struct CloudAccess {
  static std::unique_ptr<Cloud> blank() {
    return std::unique_ptr<Cloud>(new Cloud());
  }
  static Cloud& c(Cloud& cloud) { return cloud; }
  static void set_seed(Cloud& cloud, uint64_t seed, uint64_t counter) {
    cloud.seed_ = seed;
    cloud.rng_.restore(seed, counter);
  }
  static void set_default_image(Cloud& cloud, std::string id) {
    cloud.default_image_ = std::move(id);
  }
  static TraceCollector& trace(Cloud& cloud) { return cloud.trace_; }
  static void build_services(Cloud& cloud, uint16_t vlan_lo, uint16_t vlan_hi,
                             uint64_t block_size) {
    cloud.isolation_ = std::make_unique<isolation::IsolationService>(
        vlan_lo, vlan_hi, cloud.trace_);
    cloud.images_ =
        std::make_unique<provision::ImageCatalog>(cloud.trace_, block_size);
    cloud.registrar_ = std::make_unique<attest::Registrar>(cloud.trace_);
  }
  static void build_verifier_and_orchestrator(Cloud& cloud,
                                              orch::OrchestratorOptions options) {
    cloud.verifier_ = std::make_unique<attest::Verifier>(
        cloud.whitelist_, *cloud.registrar_, cloud.trace_, cloud.rng_);
    cloud.orchestrator_ = std::make_unique<orch::Orchestrator>(
        cloud.fleet_, *cloud.isolation_, *cloud.images_, *cloud.registrar_,
        *cloud.verifier_, cloud.whitelist_, cloud.trace_, cloud.rng_,
        std::move(options));
  }
  static orch::Fleet& fleet(Cloud& cloud) { return cloud.fleet_; }
  static attest::Whitelist& whitelist(Cloud& cloud) { return cloud.whitelist_; }
};

namespace {

constexpr const char* kHeader = "airlock-state v1";

std::string opt_str(const std::optional<std::string>& s) {
  return s ? *s : "-";
}

std::optional<std::string> str_opt(const std::string& s) {
  if (s == "-") return std::nullopt;
  return s;
}

std::string result_str(const std::optional<attest::AttestationResult>& r) {
  if (!r) return "-";
  return r->describe();
}

Result<std::optional<attest::AttestationResult>> parse_result(
    const std::string& s) {
  using attest::AttestationResult;
  if (s == "-") return std::optional<AttestationResult>{};
  if (s == "pass") return std::optional{AttestationResult::passed()};
  if (s.rfind("fail:", 0) == 0) {
    std::string rest = s.substr(5);
    int pcr = -1;
    size_t colon = rest.find(':');
    if (colon != std::string::npos) {
      std::string pcr_part = rest.substr(colon + 1);
      if (pcr_part.rfind("pcr", 0) == 0)
        pcr = std::stoi(pcr_part.substr(3));
      rest = rest.substr(0, colon);
    }
    auto reason = attest::fail_reason_from_name(rest);
    if (!reason) return {Err::ParseError, "bad fail reason " + rest};
    return std::optional{AttestationResult::failed(*reason, pcr)};
  }
  return {Err::ParseError, "bad attestation result " + s};
}

std::string join_csv(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out.empty() ? "-" : out;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  if (s == "-") return out;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    if (comma > pos) out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

std::string save_state(Cloud& cloud) {
  std::ostringstream os;
  os << kHeader << "\n";
  os << "seed " << cloud.seed() << "\n";
  os << "rng-counter " << cloud.rng().counter() << "\n";
  os << "default-image " << cloud.default_image() << "\n";
  const auto& options = cloud.orchestrator().options();
  os << "kernel " << to_hex(options.os_kernel_payload) << "\n";

  os << "poll-interval " << cloud.verifier().poll_interval() << "\n";
  os << "tick-counter " << cloud.orchestrator().tick_counter() << "\n";

  for (const auto& [tenant, nets] : cloud.orchestrator().tenant_network_map())
    os << "tenant-nets " << tenant << " " << join_csv(nets) << "\n";

  os << "section nodes\n";
  for (const auto& [uuid, fn] : cloud.fleet()) {
    const auto& sim = fn.sim;
    const orch::NodeRecord* rec = cloud.orchestrator().record(uuid);
    os << "node " << uuid << " firmware " << nodesim::firmware_name(sim.firmware())
       << " state " << orch::state_name(rec->state) << " phase "
       << nodesim::phase_name(sim.phase()) << " project "
       << opt_str(rec->project) << " profile "
       << (rec->profile.empty() ? "-" : rec->profile) << " airlock-net "
       << opt_str(rec->airlock_net) << " clone " << opt_str(rec->attached_clone)
       << " cycle " << sim.power_cycle() << " memory-size " << sim.memory_size()
       << "\n";
    os << "tpmseed " << uuid << " " << to_hex(sim.tpm_seed()) << "\n";
    if (sim.key())
      os << "key " << uuid << " " << to_hex(sim.key()->bytes) << "\n";
    if (!sim.memory_is_zero())
      os << "memory " << uuid << " " << to_hex(sim.memory()) << "\n";
    for (size_t i = 0; i < tpm::kNumPcrs; ++i)
      if (!sim.bank().registers()[i].is_zero())
        os << "pcr " << uuid << " " << i << " "
           << sim.bank().registers()[i].hex() << "\n";
    for (size_t i = 0; i < sim.stages().size(); ++i) {
      const auto& s = sim.stages()[i];
      os << "stage " << uuid << " " << i << " " << s.name << " "
         << int(s.pcr_index) << " " << nodesim::origin_name(s.origin) << " "
         << to_hex(s.payload) << "\n";
    }
    for (size_t i = 0; i < fn.pristine.size(); ++i) {
      const auto& s = fn.pristine[i];
      os << "pristine " << uuid << " " << i << " " << s.name << " "
         << int(s.pcr_index) << " " << nodesim::origin_name(s.origin) << " "
         << to_hex(s.payload) << "\n";
    }
  }

  os << "section registrar\n";
  for (const auto& [uuid, entry] : cloud.registrar().entries()) {
    os << "registrar-entry " << uuid << " "
       << (entry.state == attest::EnrollState::Enrolled ? "enrolled" : "pending")
       << " ek " << to_hex(entry.ek_pub) << " aik " << to_hex(entry.aik_pub)
       << "\n";
  }
  for (const auto& [uuid, secret] : cloud.registrar().pending_challenges())
    os << "registrar-challenge " << uuid << " " << to_hex(secret) << "\n";

  os << "section verifier\n";
  for (const auto& [uuid, rec] : cloud.verifier().records()) {
    os << "verifier-record " << uuid << " policy "
       << (rec.policy.empty() ? "-" : rec.policy) << " nonce "
       << (rec.last_nonce ? to_hex(*rec.last_nonce) : "-") << " result "
       << result_str(rec.last_result) << " share "
       << (rec.verifier_share ? to_hex(*rec.verifier_share) : "-")
       << " released " << (rec.share_released ? 1 : 0) << " invalidated "
       << (rec.key_invalidated ? 1 : 0) << " cycle " << rec.cycle << "\n";
  }

  os << "section whitelist\n";
  for (const auto& [name, events] : cloud.whitelist().entries()) {
    os << "wl-entry " << name << " " << events.size() << "\n";
    for (const auto& [idx, d] : events)
      os << "wl-event " << int(idx) << " " << d.hex() << "\n";
  }

  os << "section isolation\n";
  auto& iso = cloud.isolation();
  os << "vlan-pool " << iso.vlan_lo() << " " << iso.vlan_hi() << "\n";
  os << "net-counter " << iso.net_counter() << "\n";
  {
    // Project and free-pool listing, derived from the records; readers can
    // diff membership without replaying node lines.
    std::map<std::string, std::vector<std::string>> projects;
    std::vector<std::string> free_nodes;
    for (const auto& [uuid, rec] : cloud.orchestrator().records()) {
      if (rec.project)
        projects[*rec.project].push_back(uuid);
      else
        free_nodes.push_back(uuid);
    }
    for (const auto& [name, members] : projects)
      os << "project " << name << " " << join_csv(members) << "\n";
    os << "free " << join_csv(free_nodes) << "\n";
  }
  for (const auto& [id, net] : iso.networks()) {
    os << "network " << id << " vlan " << net.vlan << " visibility "
       << (net.visibility == isolation::Visibility::Public ? "public" : "private")
       << " project " << (net.project.empty() ? "-" : net.project) << " airlock "
       << (net.airlock ? 1 : 0) << " encrypted " << (net.encrypted ? 1 : 0)
       << "\n";
    for (const auto& [uuid, nic] : net.members)
      os << "member " << id << " " << uuid << " " << nic << "\n";
  }
  for (const auto& [port, vlans] : iso.switch_config().port_map) {
    os << "port " << port.first << " " << port.second;
    for (uint16_t v : vlans) os << " " << v;
    os << "\n";
  }

  os << "section provisioning\n";
  auto& cat = cloud.images();
  os << "block-size " << cat.block_size() << "\n";
  os << "image-counter " << cat.image_counter() << " layer-counter "
     << cat.layer_counter() << "\n";
  for (const auto& [id, img] : cat.images()) {
    os << "image " << id << " length " << img.length << " frozen "
       << (img.frozen ? 1 : 0) << " origin " << opt_str(img.origin) << " top "
       << img.top_layer << " enc ";
    if (img.enc.wrapped)
      os << "wrapped " << to_hex(img.enc.wrapped_content_key) << " "
         << (img.enc.unlocked ? 1 : 0);
    else
      os << "none";
    os << "\n";
  }
  for (const auto& [lid, layer] : cat.layers()) {
    os << "layer " << lid << " parent "
       << (layer.parent ? std::to_string(*layer.parent) : "-") << "\n";
    for (const auto& [index, block] : layer.blocks)
      os << "block " << lid << " " << index << " " << to_hex(block) << "\n";
  }
  for (const auto& [node, image] : cat.targets())
    os << "target " << node << " " << image << "\n";

  std::string body = os.str();
  return body + "checksum " + crypto::sha256(body).hex() + "\n";
}

Result<void> save_state_file(Cloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return {Err::IoError, "cannot write " + path};
  out << save_state(cloud);
  return out ? ok() : Result<void>{Err::IoError, "write failed: " + path};
}

Result<std::unique_ptr<Cloud>> load_state(const std::string& text) {
  // Verify the checksum over everything before the checksum line.
  size_t marker = text.rfind("checksum ");
  if (marker == std::string::npos || (marker != 0 && text[marker - 1] != '\n'))
    return {Err::ParseError, "missing checksum line"};
  std::string body = text.substr(0, marker);
  std::string check_line = text.substr(marker);
  std::string want = "checksum " + crypto::sha256(body).hex() + "\n";
  if (check_line != want) return {Err::ChecksumMismatch, "state file corrupted"};

  std::istringstream is(body);
  std::string line;
  if (!std::getline(is, line) || line != kHeader)
    return {Err::ParseError, "not an airlock state file"};

  auto cloud = CloudAccess::blank();
  uint64_t seed = 1, counter = 0;
  uint16_t vlan_lo = 100, vlan_hi = 199;
  uint64_t net_counter = 1;
  uint64_t block_size = provision::ImageCatalog::kDefaultBlockSize;
  uint64_t image_counter = 1, layer_counter = 1;
  uint64_t poll_interval = 1, tick_counter = 0;
  std::string default_image;
  orch::OrchestratorOptions options;

  struct NodeData {
    nodesim::FirmwareKind firmware;
    std::string state, phase, project, profile, airlock_net, clone;
    uint64_t cycle = 0;
    size_t memory_size = nodesim::NodeSim::kDefaultMemoryBytes;
    Key32 tpm_seed{};
    std::optional<Key32> key;
    Bytes memory;
    std::map<int, crypto::Digest> pcrs;
    std::map<int, nodesim::Stage> stages;
    std::map<int, nodesim::Stage> pristine;
  };
  std::map<std::string, NodeData> node_data;
  std::map<std::string, std::vector<std::string>> tenant_nets;
  std::vector<std::function<void(Cloud&)>> registrar_ops, verifier_ops;
  std::vector<isolation::NetworkDef> networks;
  isolation::SwitchConfig switch_config;
  std::map<std::string, attest::Whitelist::EventList> wl;
  std::string current_wl;
  struct ImgData {
    provision::ImageCatalog::Image img;
  };
  std::vector<provision::ImageCatalog::Image> images;
  std::map<uint64_t, provision::ImageCatalog::Layer> layers;
  std::map<std::string, std::string> targets;

  int lineno = 1;
  auto parse_err = [&](const std::string& msg) -> Result<std::unique_ptr<Cloud>> {
    return {Err::ParseError, "line " + std::to_string(lineno) + ": " + msg};
  };
  auto need_key32 = [](const std::string& hex) -> std::optional<Key32> {
    auto raw = from_hex(hex);
    if (!raw || raw->size() != 32) return std::nullopt;
    Key32 k;
    std::memcpy(k.data(), raw->data(), 32);
    return k;
  };

  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    try {
      if (kw == "seed") {
        ls >> seed;
      } else if (kw == "section" || kw == "project" || kw == "free") {
        // structural/derived lines; content is rebuilt from the node records
      } else if (kw == "poll-interval") {
        ls >> poll_interval;
      } else if (kw == "tick-counter") {
        ls >> tick_counter;
      } else if (kw == "rng-counter") {
        ls >> counter;
      } else if (kw == "default-image") {
        ls >> default_image;
      } else if (kw == "kernel") {
        std::string hex;
        ls >> hex;
        auto raw = from_hex(hex);
        if (!raw) return parse_err("bad kernel payload");
        options.os_kernel_payload = *raw;
      } else if (kw == "vlan-pool") {
        ls >> vlan_lo >> vlan_hi;
      } else if (kw == "net-counter") {
        ls >> net_counter;
      } else if (kw == "tenant-nets") {
        std::string tenant, csv;
        ls >> tenant >> csv;
        tenant_nets[tenant] = split_csv(csv);
      } else if (kw == "node") {
        std::string uuid, skip, fw;
        ls >> uuid;
        NodeData nd;
        std::string field, value;
        while (ls >> field) {
          if (field == "firmware") {
            ls >> fw;
            auto kind = nodesim::firmware_from_name(fw);
            if (!kind) return parse_err("bad firmware " + fw);
            nd.firmware = *kind;
          } else if (field == "state") {
            ls >> nd.state;
          } else if (field == "phase") {
            ls >> nd.phase;
          } else if (field == "project") {
            ls >> nd.project;
          } else if (field == "profile") {
            ls >> nd.profile;
          } else if (field == "airlock-net") {
            ls >> nd.airlock_net;
          } else if (field == "clone") {
            ls >> nd.clone;
          } else if (field == "cycle") {
            ls >> nd.cycle;
          } else if (field == "memory-size") {
            ls >> nd.memory_size;
          } else {
            return parse_err("unknown node field " + field);
          }
        }
        node_data[uuid] = std::move(nd);
      } else if (kw == "tpmseed") {
        std::string uuid, hex;
        ls >> uuid >> hex;
        auto k = need_key32(hex);
        if (!k) return parse_err("bad tpm seed");
        node_data.at(uuid).tpm_seed = *k;
      } else if (kw == "key") {
        std::string uuid, hex;
        ls >> uuid >> hex;
        auto k = need_key32(hex);
        if (!k) return parse_err("bad key");
        node_data.at(uuid).key = *k;
      } else if (kw == "memory") {
        std::string uuid, hex;
        ls >> uuid >> hex;
        auto raw = from_hex(hex);
        if (!raw) return parse_err("bad memory hex");
        node_data.at(uuid).memory = *raw;
      } else if (kw == "pcr") {
        std::string uuid, hex;
        int idx;
        ls >> uuid >> idx >> hex;
        auto d = crypto::Digest::from_hex(hex);
        if (!d) return parse_err("bad pcr digest");
        node_data.at(uuid).pcrs[idx] = *d;
      } else if (kw == "stage" || kw == "pristine") {
        std::string uuid, name, origin, hex;
        int idx, pcr;
        ls >> uuid >> idx >> name >> pcr >> origin >> hex;
        auto o = nodesim::origin_from_name(origin);
        auto payload = from_hex(hex);
        if (!o || !payload) return parse_err("bad stage line");
        nodesim::Stage s{name, *payload, static_cast<uint8_t>(pcr), *o};
        if (kw == "stage")
          node_data.at(uuid).stages[idx] = std::move(s);
        else
          node_data.at(uuid).pristine[idx] = std::move(s);
      } else if (kw == "registrar-entry") {
        std::string uuid, state, skip, ek_hex, aik_hex;
        ls >> uuid >> state >> skip >> ek_hex >> skip >> aik_hex;
        auto ek = from_hex(ek_hex);
        auto aik = from_hex(aik_hex);
        if (!ek || !aik) return parse_err("bad registrar entry");
        bool enrolled = state == "enrolled";
        registrar_ops.push_back([uuid, ek = *ek, aik = *aik, enrolled](Cloud& c) {
          c.registrar().restore_entry(
              uuid, {ek, aik,
                     enrolled ? attest::EnrollState::Enrolled
                              : attest::EnrollState::Pending});
        });
      } else if (kw == "registrar-challenge") {
        std::string uuid, hex;
        ls >> uuid >> hex;
        auto k = need_key32(hex);
        if (!k) return parse_err("bad challenge");
        registrar_ops.push_back(
            [uuid, k = *k](Cloud& c) { c.registrar().restore_challenge(uuid, k); });
      } else if (kw == "verifier-record") {
        std::string uuid, skip, policy, nonce_hex, result_s, share_hex;
        int released, invalidated;
        uint64_t cycle;
        ls >> uuid >> skip >> policy >> skip >> nonce_hex >> skip >> result_s >>
            skip >> share_hex >> skip >> released >> skip >> invalidated >>
            skip >> cycle;
        attest::Verifier::Record rec;
        rec.policy = policy == "-" ? "" : policy;
        if (nonce_hex != "-") {
          auto raw = from_hex(nonce_hex);
          if (!raw || raw->size() != 16) return parse_err("bad nonce");
          tpm::Nonce n;
          std::memcpy(n.data(), raw->data(), 16);
          rec.last_nonce = n;
        }
        auto result = parse_result(result_s);
        if (!result) return parse_err(result.message());
        rec.last_result = result.value();
        if (share_hex != "-") {
          auto k = need_key32(share_hex);
          if (!k) return parse_err("bad share");
          rec.verifier_share = *k;
        }
        rec.share_released = released != 0;
        rec.key_invalidated = invalidated != 0;
        rec.cycle = cycle;
        verifier_ops.push_back(
            [uuid, rec](Cloud& c) { c.verifier().restore_record(uuid, rec); });
      } else if (kw == "wl-entry") {
        size_t count;
        ls >> current_wl >> count;
        wl[current_wl] = {};
      } else if (kw == "wl-event") {
        int idx;
        std::string hex;
        ls >> idx >> hex;
        auto d = crypto::Digest::from_hex(hex);
        if (!d) return parse_err("bad whitelist digest");
        wl.at(current_wl).emplace_back(static_cast<uint8_t>(idx), *d);
      } else if (kw == "network") {
        isolation::NetworkDef def;
        std::string field, value;
        ls >> def.id;
        while (ls >> field) {
          if (field == "vlan") {
            ls >> def.vlan;
          } else if (field == "visibility") {
            ls >> value;
            def.visibility = value == "public" ? isolation::Visibility::Public
                                               : isolation::Visibility::Private;
          } else if (field == "project") {
            ls >> value;
            def.project = value == "-" ? "" : value;
          } else if (field == "airlock") {
            int b;
            ls >> b;
            def.airlock = b != 0;
          } else if (field == "encrypted") {
            int b;
            ls >> b;
            def.encrypted = b != 0;
          } else {
            return parse_err("unknown network field " + field);
          }
        }
        networks.push_back(std::move(def));
      } else if (kw == "member") {
        std::string net, uuid, nic;
        ls >> net >> uuid >> nic;
        for (auto& def : networks)
          if (def.id == net) def.members.insert({uuid, nic});
      } else if (kw == "port") {
        std::string uuid, nic;
        ls >> uuid >> nic;
        std::set<uint16_t> vlans;
        uint16_t v;
        while (ls >> v) vlans.insert(v);
        switch_config.port_map[{uuid, nic}] = std::move(vlans);
      } else if (kw == "block-size") {
        ls >> block_size;
      } else if (kw == "image-counter") {
        std::string skip;
        ls >> image_counter >> skip >> layer_counter;
      } else if (kw == "image") {
        provision::ImageCatalog::Image img;
        std::string field, value;
        ls >> img.id;
        while (ls >> field) {
          if (field == "length") {
            ls >> img.length;
          } else if (field == "frozen") {
            int b;
            ls >> b;
            img.frozen = b != 0;
          } else if (field == "origin") {
            ls >> value;
            img.origin = str_opt(value);
          } else if (field == "top") {
            ls >> img.top_layer;
          } else if (field == "enc") {
            ls >> value;
            if (value == "wrapped") {
              std::string ct_hex;
              int unlocked;
              ls >> ct_hex >> unlocked;
              auto ct = from_hex(ct_hex);
              if (!ct) return parse_err("bad wrapped key");
              img.enc.wrapped = true;
              img.enc.wrapped_content_key = *ct;
              img.enc.unlocked = unlocked != 0;
            }
          } else {
            return parse_err("unknown image field " + field);
          }
        }
        images.push_back(std::move(img));
      } else if (kw == "layer") {
        uint64_t lid;
        std::string skip, parent;
        ls >> lid >> skip >> parent;
        provision::ImageCatalog::Layer layer;
        if (parent != "-") layer.parent = std::stoull(parent);
        layers[lid] = std::move(layer);
      } else if (kw == "block") {
        uint64_t lid, index;
        std::string hex;
        ls >> lid >> index >> hex;
        auto raw = from_hex(hex);
        if (!raw) return parse_err("bad block hex");
        layers.at(lid).blocks[index] = *raw;
      } else if (kw == "target") {
        std::string node, image;
        ls >> node >> image;
        targets[node] = image;
      } else {
        return parse_err("unknown keyword " + kw);
      }
    } catch (const std::exception& e) {
      return parse_err(std::string("malformed line: ") + e.what());
    }
  }

  // Assemble the cloud from the parsed parts.
  CloudAccess::set_seed(*cloud, seed, counter);
  CloudAccess::set_default_image(*cloud, default_image);
  CloudAccess::build_services(*cloud, vlan_lo, vlan_hi, block_size);
  options.base_image = default_image;

  cloud->isolation().register_endpoint(options.attestation_endpoint, "svc0");
  cloud->isolation().register_endpoint(options.provisioning_endpoint, "svc0");
  for (auto& def : networks) cloud->isolation().restore_network(std::move(def));
  cloud->isolation().restore_switch(std::move(switch_config));
  cloud->isolation().restore_net_counter(net_counter);

  orch::Fleet& fleet = CloudAccess::fleet(*cloud);
  std::vector<orch::NodeRecord> records;
  for (auto& [uuid, nd] : node_data) {
    std::vector<nodesim::Stage> stages, pristine;
    for (auto& [idx, s] : nd.stages) stages.push_back(std::move(s));
    for (auto& [idx, s] : nd.pristine) pristine.push_back(std::move(s));
    if (stages.empty()) return {Err::ParseError, uuid + " has no stages"};
    try {
      fleet.emplace(uuid, orch::FleetNode{
                              nodesim::NodeSim(uuid, nd.firmware, nd.tpm_seed,
                                               stages, nd.memory_size,
                                               CloudAccess::trace(*cloud)),
                              pristine});
    } catch (const std::invalid_argument& e) {
      return {Err::ParseError, e.what()};
    }
    auto& sim = fleet.at(uuid).sim;
    auto phase = [&]() -> std::optional<nodesim::BootPhase> {
      for (auto p : {nodesim::BootPhase::Off, nodesim::BootPhase::Measuring,
                     nodesim::BootPhase::AwaitingAttestation,
                     nodesim::BootPhase::KeyReceived, nodesim::BootPhase::TenantOs})
        if (nd.phase == nodesim::phase_name(p)) return p;
      return std::nullopt;
    }();
    if (!phase) return {Err::ParseError, uuid + ": bad phase " + nd.phase};
    sim.restore_phase(*phase);
    sim.restore_cycle(nd.cycle);
    if (nd.key) sim.restore_key(nodesim::EnclaveKey{*nd.key});
    if (!nd.memory.empty()) {
      Bytes mem(nd.memory_size, 0);
      std::copy(nd.memory.begin(), nd.memory.end(), mem.begin());
      sim.restore_memory(std::move(mem));
    }
    for (const auto& [idx, d] : nd.pcrs)
      sim.bank_mut().set(static_cast<uint8_t>(idx), d);

    cloud->isolation().add_node(uuid, {"nic0"});
    if (nd.project != "-")
      cloud->isolation().restore_assignment(uuid, nd.project);

    orch::NodeRecord rec;
    rec.uuid = uuid;
    auto state = orch::state_from_name(nd.state);
    if (!state) return {Err::ParseError, uuid + ": bad state " + nd.state};
    rec.state = *state;
    rec.project = str_opt(nd.project);
    rec.profile = nd.profile == "-" ? "" : nd.profile;
    rec.airlock_net = str_opt(nd.airlock_net);
    rec.attached_clone = str_opt(nd.clone);
    records.push_back(std::move(rec));
  }

  for (auto& [name, events] : wl)
    CloudAccess::whitelist(*cloud).add_entry(name, std::move(events));

  for (auto& op : registrar_ops) op(*cloud);

  provision::ImageCatalog& cat = cloud->images();
  for (auto& [lid, layer] : layers) cat.restore_layer(lid, std::move(layer));
  for (auto& img : images) cat.restore_image(std::move(img));
  for (const auto& [node, image] : targets) cat.restore_target(node, image);
  cat.restore_counters(image_counter, layer_counter);

  CloudAccess::build_verifier_and_orchestrator(*cloud, std::move(options));
  cloud->verifier().set_poll_interval(poll_interval);
  cloud->orchestrator().restore_tick_counter(tick_counter);
  for (auto& op : verifier_ops) op(*cloud);
  for (auto& rec : records) cloud->orchestrator().restore_record(std::move(rec));
  for (auto& [tenant, nets] : tenant_nets)
    cloud->orchestrator().set_tenant_networks(tenant, nets);

  return cloud;
}

Result<std::unique_ptr<Cloud>> load_state_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {Err::IoError, "cannot read " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return load_state(ss.str());
}

}  // namespace airlock::cloud
