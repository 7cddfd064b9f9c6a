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

#include "scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace airlock::scenario {

namespace {

struct LineParser {
  std::istringstream ls;
  int lineno;
  std::string err;

  LineParser(const std::string& line, int lineno) : ls(line), lineno(lineno) {}

  std::string fail(const std::string& msg) {
    return "line " + std::to_string(lineno) + ": " + msg;
  }
  Result<std::string> word(const std::string& what) {
    std::string w;
    if (!(ls >> w)) return {Err::ParseError, fail("expected " + what)};
    return w;
  }
  Result<uint64_t> number(const std::string& what) {
    auto w = word(what);
    if (!w) return {w.error(), w.message()};
    try {
      return std::stoull(w.value());
    } catch (...) {
      return {Err::ParseError, fail(what + " must be a number")};
    }
  }
  Result<Bytes> hex_bytes(const std::string& what) {
    auto w = word(what);
    if (!w) return {w.error(), w.message()};
    auto bytes = from_hex(w.value());
    if (!bytes) return {Err::ParseError, fail(what + " must be hex")};
    return *bytes;
  }
};

Result<Bytes> read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return {Err::IoError, "cannot read " + path};
  Bytes data((std::istreambuf_iterator<char>(is)),
             std::istreambuf_iterator<char>());
  return data;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    if (comma > pos) out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

Result<TamperSpec> parse_tamper_args(LineParser& p, std::string uuid) {
  TamperSpec t;
  t.uuid = std::move(uuid);
  auto kw = p.word("'stage'");
  if (!kw) return {kw.error(), kw.message()};
  if (kw.value() != "stage")
    return {Err::ParseError, p.fail("expected 'stage'")};
  auto stage = p.word("stage name");
  if (!stage) return {stage.error(), stage.message()};
  t.stage = stage.value();
  auto kw2 = p.word("'offset'");
  if (!kw2 || kw2.value() != "offset")
    return {Err::ParseError, p.fail("expected 'offset'")};
  auto off = p.number("offset");
  if (!off) return {off.error(), off.message()};
  t.offset = off.value();
  auto kw3 = p.word("'value'");
  if (!kw3 || kw3.value() != "value")
    return {Err::ParseError, p.fail("expected 'value'")};
  auto val = p.hex_bytes("value");
  if (!val) return {val.error(), val.message()};
  if (val.value().size() != 1)
    return {Err::ParseError, p.fail("value must be one byte")};
  t.value = val.value()[0];
  return t;
}

}  // namespace

Result<Scenario> parse_scenario(const std::string& text,
                                const std::string& base_dir,
                                bool allow_actions) {
  Scenario sc;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  size_t default_memory = nodesim::NodeSim::kDefaultMemoryBytes;

  while (std::getline(is, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    LineParser p(raw, lineno);
    std::string directive;
    if (!(p.ls >> directive)) continue;

    auto forbid_script = [&]() -> Result<void> {
      if (!allow_actions)
        return {Err::ParseError,
                p.fail("directive '" + directive + "' is not allowed here")};
      return ok();
    };

    if (directive == "scenario") {
      auto name = p.word("scenario name");
      if (!name) return {name.error(), name.message()};
      sc.name = name.value();
    } else if (directive == "seed") {
      auto n = p.number("seed");
      if (!n) return {n.error(), n.message()};
      sc.seed = n.value();
    } else if (directive == "vlan-pool") {
      auto lo = p.number("vlan low");
      if (!lo) return {lo.error(), lo.message()};
      auto hi = p.number("vlan high");
      if (!hi) return {hi.error(), hi.message()};
      if (lo.value() > hi.value() || hi.value() > 4094)
        return {Err::ParseError, p.fail("bad vlan range")};
      sc.spec.vlan_lo = static_cast<uint16_t>(lo.value());
      sc.spec.vlan_hi = static_cast<uint16_t>(hi.value());
    } else if (directive == "memory-size") {
      auto n = p.number("memory bytes");
      if (!n) return {n.error(), n.message()};
      default_memory = n.value();
    } else if (directive == "node" || directive == "nodes") {
      size_t count = 1;
      std::string prefix;
      if (directive == "nodes") {
        auto n = p.number("node count");
        if (!n) return {n.error(), n.message()};
        count = n.value();
        prefix = "node";
      }
      std::string uuid;
      if (directive == "node") {
        auto u = p.word("node uuid");
        if (!u) return {u.error(), u.message()};
        uuid = u.value();
      }
      cloud::NodeSpec ns;
      ns.memory_bytes = default_memory;
      std::string kw;
      while (p.ls >> kw) {
        if (kw == "firmware") {
          auto fw = p.word("firmware kind");
          if (!fw) return {fw.error(), fw.message()};
          auto kind = nodesim::firmware_from_name(fw.value());
          if (!kind)
            return {Err::ParseError, p.fail("unknown firmware " + fw.value())};
          ns.firmware = *kind;
        } else if (kw == "memory") {
          auto m = p.number("memory bytes");
          if (!m) return {m.error(), m.message()};
          ns.memory_bytes = m.value();
        } else if (kw == "prefix" && directive == "nodes") {
          auto pr = p.word("prefix");
          if (!pr) return {pr.error(), pr.message()};
          prefix = pr.value();
        } else {
          return {Err::ParseError, p.fail("unknown node attribute " + kw)};
        }
      }
      if (directive == "node") {
        ns.uuid = uuid;
        sc.spec.nodes.push_back(ns);
      } else {
        for (size_t i = 1; i <= count; ++i) {
          cloud::NodeSpec each = ns;
          std::string index = std::to_string(i);
          if (index.size() < 2) index = "0" + index;
          each.uuid = prefix + "-" + index;
          sc.spec.nodes.push_back(each);
        }
      }
    } else if (directive == "stage") {
      auto uuid = p.word("node uuid");
      if (!uuid) return {uuid.error(), uuid.message()};
      auto stage = p.word("stage name");
      if (!stage) return {stage.error(), stage.message()};
      auto mode = p.word("'hex' or 'file'");
      if (!mode) return {mode.error(), mode.message()};
      Bytes payload;
      if (mode.value() == "hex") {
        auto h = p.hex_bytes("payload");
        if (!h) return {h.error(), h.message()};
        payload = h.value();
      } else if (mode.value() == "file") {
        auto path = p.word("path");
        if (!path) return {path.error(), path.message()};
        auto data = read_file((std::filesystem::path(base_dir) / path.value()).string());
        if (!data) return {Err::ParseError, p.fail(data.message())};
        payload = data.value();
      } else {
        return {Err::ParseError, p.fail("stage payload must be hex or file")};
      }
      bool found = false;
      for (auto& ns : sc.spec.nodes)
        if (ns.uuid == uuid.value()) {
          ns.stage_overrides[stage.value()] = payload;
          found = true;
        }
      if (!found)
        return {Err::ParseError, p.fail("stage override for unknown node " +
                                        uuid.value())};
    } else if (directive == "image") {
      auto id = p.word("image id");
      if (!id) return {id.error(), id.message()};
      auto mode = p.word("'zero', 'hex' or 'file'");
      if (!mode) return {mode.error(), mode.message()};
      cloud::ImageSpec img;
      img.id = id.value();
      if (mode.value() == "zero") {
        auto n = p.number("byte count");
        if (!n) return {n.error(), n.message()};
        img.content = Bytes(n.value(), 0);
      } else if (mode.value() == "hex") {
        auto h = p.hex_bytes("content");
        if (!h) return {h.error(), h.message()};
        img.content = h.value();
      } else if (mode.value() == "file") {
        auto path = p.word("path");
        if (!path) return {path.error(), path.message()};
        auto data = read_file((std::filesystem::path(base_dir) / path.value()).string());
        if (!data) return {Err::ParseError, p.fail(data.message())};
        img.content = data.value();
      } else {
        return {Err::ParseError, p.fail("image source must be zero, hex or file")};
      }
      sc.spec.images.push_back(std::move(img));
    } else if (directive == "default-image") {
      auto id = p.word("image id");
      if (!id) return {id.error(), id.message()};
      sc.spec.default_image = id.value();
    } else if (directive == "kernel") {
      auto mode = p.word("'hex'");
      if (!mode || mode.value() != "hex")
        return {Err::ParseError, p.fail("kernel payload must be hex")};
      auto h = p.hex_bytes("kernel payload");
      if (!h) return {h.error(), h.message()};
      sc.spec.os_kernel_payload = h.value();
    } else if (directive == "whitelist") {
      auto mode = p.word("'auto' or 'file'");
      if (!mode) return {mode.error(), mode.message()};
      if (mode.value() == "auto") {
        sc.spec.whitelist_auto = true;
      } else if (mode.value() == "file") {
        auto path = p.word("path");
        if (!path) return {path.error(), path.message()};
        auto data = read_file((std::filesystem::path(base_dir) / path.value()).string());
        if (!data) return {Err::ParseError, p.fail(data.message())};
        sc.spec.whitelist_auto = false;
        sc.spec.whitelist_text.assign(data.value().begin(), data.value().end());
      } else {
        return {Err::ParseError, p.fail("whitelist must be auto or file")};
      }
    } else if (directive == "tamper") {
      auto uuid = p.word("node uuid");
      if (!uuid) return {uuid.error(), uuid.message()};
      auto t = parse_tamper_args(p, uuid.value());
      if (!t) return {t.error(), t.message()};
      sc.pre_tampers.push_back(t.value());
    } else if (directive == "tenant") {
      TenantSpec ts;
      auto name = p.word("tenant name");
      if (!name) return {name.error(), name.message()};
      ts.name = name.value();
      std::string kw;
      while (p.ls >> kw) {
        if (kw == "profile") {
          auto prof = p.word("profile");
          if (!prof) return {prof.error(), prof.message()};
          if (!orch::profile_by_name(prof.value()))
            return {Err::ParseError, p.fail("unknown profile " + prof.value())};
          ts.profile = prof.value();
        } else if (kw == "networks") {
          auto nets = p.word("network list");
          if (!nets) return {nets.error(), nets.message()};
          ts.networks = split_commas(nets.value());
          for (const auto& net : ts.networks)
            if (net.rfind("alk-", 0) == 0)
              return {Err::ParseError,
                      p.fail("the alk- prefix is reserved for airlock networks")};
        } else {
          return {Err::ParseError, p.fail("unknown tenant attribute " + kw)};
        }
      }
      sc.tenants.push_back(std::move(ts));
    } else if (directive == "admit") {
      if (auto allowed = forbid_script(); !allowed)
        return {allowed.error(), allowed.message()};
      Action a;
      a.kind = Action::Kind::Admit;
      auto kw = p.word("'tenant'");
      if (!kw || kw.value() != "tenant")
        return {Err::ParseError, p.fail("expected 'tenant'")};
      auto name = p.word("tenant name");
      if (!name) return {name.error(), name.message()};
      a.tenant = name.value();
      std::string more;
      while (p.ls >> more) {
        if (more == "count") {
          auto n = p.number("count");
          if (!n) return {n.error(), n.message()};
          a.count = n.value();
        } else if (more == "profile") {
          auto prof = p.word("profile");
          if (!prof) return {prof.error(), prof.message()};
          if (!orch::profile_by_name(prof.value()))
            return {Err::ParseError, p.fail("unknown profile " + prof.value())};
          a.profile = prof.value();
        } else {
          return {Err::ParseError, p.fail("unknown admit attribute " + more)};
        }
      }
      sc.actions.push_back(std::move(a));
    } else if (directive == "poll") {
      if (auto allowed = forbid_script(); !allowed)
        return {allowed.error(), allowed.message()};
      Action a;
      a.kind = Action::Kind::Poll;
      sc.actions.push_back(a);
    } else if (directive == "poll-interval") {
      auto n = p.number("poll interval");
      if (!n) return {n.error(), n.message()};
      if (n.value() == 0)
        return {Err::ParseError, p.fail("poll interval must be >= 1")};
      sc.poll_interval = n.value();
    } else if (directive == "tick") {
      if (auto allowed = forbid_script(); !allowed)
        return {allowed.error(), allowed.message()};
      Action a;
      a.kind = Action::Kind::Tick;
      a.count = 1;
      uint64_t n;
      if (p.ls >> n) a.count = n;
      sc.actions.push_back(a);
    } else if (directive == "runtime-tamper") {
      if (auto allowed = forbid_script(); !allowed)
        return {allowed.error(), allowed.message()};
      auto uuid = p.word("node uuid");
      if (!uuid) return {uuid.error(), uuid.message()};
      auto t = parse_tamper_args(p, uuid.value());
      if (!t) return {t.error(), t.message()};
      Action a;
      a.kind = Action::Kind::RuntimeTamper;
      a.tamper = t.value();
      sc.actions.push_back(std::move(a));
    } else if (directive == "release" || directive == "clean") {
      if (auto allowed = forbid_script(); !allowed)
        return {allowed.error(), allowed.message()};
      auto uuid = p.word("node uuid");
      if (!uuid) return {uuid.error(), uuid.message()};
      Action a;
      a.kind = directive == "release" ? Action::Kind::Release : Action::Kind::Clean;
      a.uuid = uuid.value();
      sc.actions.push_back(std::move(a));
    } else if (directive == "memwrite" || directive == "blockwrite") {
      if (auto allowed = forbid_script(); !allowed)
        return {allowed.error(), allowed.message()};
      auto uuid = p.word("node uuid");
      if (!uuid) return {uuid.error(), uuid.message()};
      auto kw = p.word(directive == "memwrite" ? "'offset'" : "'index'");
      if (!kw ||
          kw.value() != (directive == "memwrite" ? "offset" : "index"))
        return {Err::ParseError, p.fail("expected offset/index")};
      auto n = p.number("offset");
      if (!n) return {n.error(), n.message()};
      auto kw2 = p.word("'hex'");
      if (!kw2 || kw2.value() != "hex")
        return {Err::ParseError, p.fail("expected 'hex'")};
      auto data = p.hex_bytes("data");
      if (!data) return {data.error(), data.message()};
      Action a;
      a.kind = directive == "memwrite" ? Action::Kind::MemWrite
                                       : Action::Kind::BlockWrite;
      a.uuid = uuid.value();
      a.offset = n.value();
      a.data = data.value();
      sc.actions.push_back(std::move(a));
    } else if (directive == "expect") {
      auto uuid = p.word("node uuid");
      if (!uuid) return {uuid.error(), uuid.message()};
      auto kw = p.word("'state'");
      if (!kw || kw.value() != "state")
        return {Err::ParseError, p.fail("expected 'state'")};
      auto st = p.word("state name");
      if (!st) return {st.error(), st.message()};
      auto state = orch::state_from_name(st.value());
      if (!state)
        return {Err::ParseError, p.fail("unknown state " + st.value())};
      sc.expectations.push_back({uuid.value(), *state});
    } else {
      return {Err::ParseError,
              "line " + std::to_string(lineno) + ": unknown directive '" +
                  directive + "'"};
    }
  }
  if (sc.spec.nodes.empty())
    return {Err::ParseError, "scenario defines no nodes"};
  return sc;
}

Result<Scenario> parse_scenario_file(const std::string& path,
                                     bool allow_actions) {
  auto data = read_file(path);
  if (!data) return {data.error(), data.message()};
  std::string text(data.value().begin(), data.value().end());
  std::string base = std::filesystem::path(path).parent_path().string();
  if (base.empty()) base = ".";
  auto parsed = parse_scenario(text, base, allow_actions);
  if (parsed && parsed.value().name == "scenario")
    parsed.value().name = std::filesystem::path(path).stem().string();
  return parsed;
}

Result<ScenarioReport> run_scenario(const Scenario& scenario,
                                    std::optional<uint64_t> seed_override,
                                    std::unique_ptr<cloud::Cloud>* keep_cloud) {
  cloud::CloudSpec spec = scenario.spec;
  spec.seed = seed_override ? *seed_override : scenario.seed.value_or(1);

  auto created = cloud::Cloud::create(spec);
  if (!created) return {created.error(), created.message()};
  std::unique_ptr<cloud::Cloud> cloud = std::move(created).take();
  cloud->verifier().set_poll_interval(scenario.poll_interval);

  std::map<std::string, TenantSpec> tenants;
  for (const TenantSpec& ts : scenario.tenants) {
    tenants[ts.name] = ts;
    if (!ts.networks.empty())
      cloud->orchestrator().set_tenant_networks(ts.name, ts.networks);
  }

  for (const TamperSpec& t : scenario.pre_tampers) {
    if (!cloud->fleet().count(t.uuid))
      return {Err::InvalidConfig, "tamper targets unknown node " + t.uuid};
    auto r = cloud->node(t.uuid).tamper(t.stage, t.offset, t.value);
    if (!r) return {r.error(), r.message()};
  }

  ScenarioReport report;
  report.name = scenario.name;
  report.seed = spec.seed;
  std::ostringstream summary;
  summary << "scenario " << scenario.name << " seed=" << spec.seed << "\n";

  for (const Action& a : scenario.actions) {
    switch (a.kind) {
      case Action::Kind::Admit: {
        std::string profile_name = a.profile;
        if (profile_name.empty()) {
          auto it = tenants.find(a.tenant);
          profile_name = it != tenants.end() ? it->second.profile : "full";
        }
        auto profile = orch::profile_by_name(profile_name);
        if (!profile)
          return {Err::InvalidConfig, "unknown profile " + profile_name};
        auto outcomes =
            cloud->orchestrator().admit_many(a.tenant, a.count, *profile);
        for (const auto& o : outcomes) {
          if (o.error == Err::NoFreeNodes) {
            summary << "  admit " << a.tenant << ": no free nodes\n";
          } else {
            summary << "  admit " << a.tenant << ": " << o.uuid << " -> "
                    << orch::state_name(o.final_state)
                    << (o.detail.empty() ? "" : " (" + o.detail + ")") << "\n";
          }
        }
        break;
      }
      case Action::Kind::Poll: {
        auto results = cloud->orchestrator().poll_once();
        for (const auto& [uuid, r] : results)
          if (!r.pass)
            summary << "  poll: " << uuid << " " << r.describe()
                    << " -> revoked\n";
        break;
      }
      case Action::Kind::Tick: {
        for (size_t i = 0; i < a.count; ++i) {
          auto results = cloud->orchestrator().tick();
          for (const auto& [uuid, r] : results)
            if (!r.pass)
              summary << "  tick " << cloud->orchestrator().tick_counter()
                      << ": " << uuid << " " << r.describe() << " -> revoked\n";
        }
        break;
      }
      case Action::Kind::RuntimeTamper: {
        if (!cloud->fleet().count(a.tamper.uuid))
          return {Err::InvalidConfig,
                  "runtime-tamper targets unknown node " + a.tamper.uuid};
        auto r = cloud->node(a.tamper.uuid)
                     .tamper(a.tamper.stage, a.tamper.offset, a.tamper.value);
        if (!r) return {r.error(), r.message()};
        break;
      }
      case Action::Kind::Release: {
        auto r = cloud->orchestrator().release_node(a.uuid);
        if (!r) summary << "  release " << a.uuid << ": " << r.describe() << "\n";
        break;
      }
      case Action::Kind::Clean: {
        auto r = cloud->orchestrator().clean_node(a.uuid);
        if (!r) summary << "  clean " << a.uuid << ": " << r.describe() << "\n";
        break;
      }
      case Action::Kind::MemWrite: {
        if (!cloud->fleet().count(a.uuid))
          return {Err::InvalidConfig, "memwrite targets unknown node " + a.uuid};
        auto& node = cloud->node(a.uuid);
        if (a.offset + a.data.size() > node.memory_size())
          return {Err::InvalidConfig, "memwrite past the end of memory"};
        node.write_memory(a.offset, a.data);
        break;
      }
      case Action::Kind::BlockWrite: {
        auto r = cloud->images().write_block(a.uuid, a.offset, a.data);
        if (!r)
          summary << "  blockwrite " << a.uuid << ": " << r.describe() << "\n";
        break;
      }
    }
  }

  report.violations = invariants::check_trace(cloud->trace().events());
  for (const Expectation& e : scenario.expectations) {
    const orch::NodeRecord* rec = cloud->orchestrator().record(e.uuid);
    bool met = rec && rec->state == e.state;
    if (!met) report.expectations_ok = false;
    std::ostringstream line;
    line << e.uuid << " state=" << orch::state_name(e.state) << ": "
         << (met ? "ok"
                 : ("MISMATCH (observed " +
                    std::string(rec ? orch::state_name(rec->state) : "missing") +
                    ")"));
    report.expectation_lines.push_back(line.str());
  }

  for (const std::string& line : report.expectation_lines)
    summary << "  expect " << line << "\n";
  summary << "  invariants: " << report.violations.size() << " violations over "
          << cloud->trace().events().size() << " events\n";
  if (!report.violations.empty())
    summary << invariants::describe(report.violations);
  summary << (report.ok() ? "RESULT: PASS" : "RESULT: FAIL") << "\n";

  report.trace_text = cloud->trace().text();
  report.summary = summary.str();
  if (keep_cloud) *keep_cloud = std::move(cloud);
  return report;
}

}  // namespace airlock::scenario
