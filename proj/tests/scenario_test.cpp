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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "scenario.hpp"

using namespace airlock;
using namespace airlock::scenario;

namespace {

const char* kSmall = R"(
scenario smoke
seed 4
node node-01 firmware heads-flashed
node node-02 firmware heads-flashed
image base zero 8192
tenant alice profile full networks net-alice
tamper node-02 stage heads-kernel offset 0 value ee
admit tenant alice count 2
expect node-01 state Allocated
expect node-02 state Rejected
)";

}  // namespace

TEST_CASE("scenario parse covers the fleet, script and expectations") {
  auto parsed = parse_scenario(kSmall);
  REQUIRE(parsed);
  const Scenario& sc = parsed.value();
  CHECK(sc.name == "smoke");
  CHECK(sc.seed.value() == 4);
  CHECK(sc.spec.nodes.size() == 2);
  CHECK(sc.pre_tampers.size() == 1);
  CHECK(sc.tenants.size() == 1);
  CHECK(sc.actions.size() == 1);
  CHECK(sc.expectations.size() == 2);
}

TEST_CASE("parse errors carry line numbers") {
  auto bad = parse_scenario("node n1 firmware heads-flashed\nbogus-directive x\n");
  REQUIRE_FALSE(bad);
  CHECK(bad.error() == Err::ParseError);
  CHECK(bad.message().find("line 2") != std::string::npos);

  auto bad2 = parse_scenario("node n1 firmware no-such-firmware\n");
  REQUIRE_FALSE(bad2);
  CHECK(bad2.message().find("line 1") != std::string::npos);

  auto bad3 = parse_scenario("nodes 2 firmware heads-flashed\nexpect node-01 state Borked\n");
  REQUIRE_FALSE(bad3);
  CHECK(bad3.message().find("line 2") != std::string::npos);

  auto empty = parse_scenario("# nothing here\n");
  REQUIRE_FALSE(empty);
}

TEST_CASE("cloud-config mode refuses script directives") {
  auto cfg = parse_scenario("node n1 firmware heads-flashed\nadmit tenant a count 1\n",
                            ".", /*allow_actions=*/false);
  REQUIRE_FALSE(cfg);
  CHECK(cfg.message().find("not allowed") != std::string::npos);

  auto ok_cfg = parse_scenario(
      "nodes 4 firmware heads-flashed\nimage base zero 4096\n", ".", false);
  REQUIRE(ok_cfg);
  CHECK(ok_cfg.value().spec.nodes.size() == 4);
  CHECK(ok_cfg.value().spec.nodes[0].uuid == "node-01");
  CHECK(ok_cfg.value().spec.nodes[3].uuid == "node-04");

  auto prefixed = parse_scenario(
      "nodes 2 firmware stock-uefi prefix blade memory 4096\n", ".", false);
  REQUIRE(prefixed);
  CHECK(prefixed.value().spec.nodes[0].uuid == "blade-01");
  CHECK(prefixed.value().spec.nodes[1].memory_bytes == 4096);
}

TEST_CASE("scenario run meets expectations with zero violations") {
  auto parsed = parse_scenario(kSmall);
  REQUIRE(parsed);
  auto report = run_scenario(parsed.value());
  REQUIRE(report);
  CHECK(report.value().ok());
  CHECK(report.value().expectations_ok);
  CHECK(report.value().violations.empty());
  CHECK(report.value().summary.find("RESULT: PASS") != std::string::npos);
  CHECK(report.value().trace_text.find("event=AttestFailEvent") !=
        std::string::npos);
}

TEST_CASE("unmet expectations are reported, not hidden") {
  std::string text = R"(
scenario wrong
node node-01 firmware heads-flashed
tenant alice profile full
admit tenant alice count 1
expect node-01 state Rejected
)";
  auto parsed = parse_scenario(text);
  REQUIRE(parsed);
  auto report = run_scenario(parsed.value());
  REQUIRE(report);
  CHECK_FALSE(report.value().ok());
  CHECK_FALSE(report.value().expectations_ok);
  CHECK(report.value().violations.empty());
  REQUIRE(report.value().expectation_lines.size() == 1);
  CHECK(report.value().expectation_lines[0].find("MISMATCH") !=
        std::string::npos);
}

TEST_CASE("same seed reruns bit-identically; different seed differs") {
  auto parsed = parse_scenario(kSmall);
  REQUIRE(parsed);
  auto a = run_scenario(parsed.value(), 99);
  auto b = run_scenario(parsed.value(), 99);
  auto c = run_scenario(parsed.value(), 100);
  REQUIRE(a);
  REQUIRE(b);
  REQUIRE(c);
  CHECK(a.value().trace_text == b.value().trace_text);
  CHECK(a.value().trace_text != c.value().trace_text);
}

TEST_CASE("tick actions honor the configured poll interval") {
  std::string text = R"(
scenario ticks
seed 12
poll-interval 2
node node-01 firmware heads-flashed
tenant acme profile full
admit tenant acme count 1
runtime-tamper node-01 stage acm offset 0 value 99
tick 1
expect node-01 state Allocated
)";
  // One tick with interval 2: no poll yet, so the tamper goes unnoticed.
  auto parsed = parse_scenario(text);
  REQUIRE(parsed);
  auto report = run_scenario(parsed.value());
  REQUIRE(report);
  CHECK(report.value().ok());

  // A second tick crosses the interval and revokes the node.
  std::string text2 = text;
  auto pos = text2.find("tick 1");
  text2.replace(pos, 6, "tick 2");
  pos = text2.find("state Allocated");
  text2.replace(pos, 15, "state Rejected");
  auto parsed2 = parse_scenario(text2);
  REQUIRE(parsed2);
  auto report2 = run_scenario(parsed2.value());
  REQUIRE(report2);
  CHECK(report2.value().ok());
}

TEST_CASE("explicit whitelist files gate admissions") {
  // A whitelist carrying only the flashed-Heads chain: the heads node
  // admits, the stock-UEFI node is rejected as unknown firmware.
  attest::Whitelist wl;
  attest::Whitelist::EventList events;
  for (const auto& s : nodesim::default_stages(nodesim::FirmwareKind::HeadsFlashed))
    events.emplace_back(s.pcr_index, crypto::sha256(s.payload));
  wl.add_entry("heads-default", events);

  auto dir = std::filesystem::temp_directory_path() / "airlock-wl-test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "golden.wl");
    out << wl.serialize();
  }
  std::string text = R"(
scenario wl
seed 9
node node-01 firmware heads-flashed
node node-02 firmware stock-uefi
whitelist file golden.wl
tenant acme profile full
admit tenant acme count 2
expect node-01 state Allocated
expect node-02 state Rejected
)";
  auto parsed = parse_scenario(text, dir.string());
  REQUIRE(parsed);
  CHECK_FALSE(parsed.value().spec.whitelist_auto);
  auto report = run_scenario(parsed.value());
  REQUIRE(report);
  INFO(report.value().summary);
  CHECK(report.value().ok());
  std::filesystem::remove_all(dir);
}

TEST_CASE("bundled scenarios all pass") {
  std::filesystem::path dir(AIRLOCK_SCENARIO_DIR);
  size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".scn") continue;
    ++count;
    INFO(entry.path().string());
    auto parsed = parse_scenario_file(entry.path().string());
    REQUIRE(parsed);
    auto report = run_scenario(parsed.value());
    REQUIRE(report);
    INFO(report.value().summary);
    CHECK(report.value().ok());
  }
  CHECK(count >= 7);
}

TEST_CASE("release-readmit leaves no predecessor bytes behind") {
  auto parsed = parse_scenario_file(
      (std::filesystem::path(AIRLOCK_SCENARIO_DIR) / "release-readmit.scn")
          .string());
  REQUIRE(parsed);
  std::unique_ptr<cloud::Cloud> cloud;
  auto report = run_scenario(parsed.value(), {}, &cloud);
  REQUIRE(report);
  REQUIRE(report.value().ok());
  REQUIRE(cloud);

  // Memory: every byte zero after the release->readmit cycle.
  CHECK(cloud->node("node-01").memory_is_zero());
  // Disk: bob's fresh clone equals the base image everywhere.
  const auto* rec = cloud->orchestrator().record("node-01");
  REQUIRE(rec);
  REQUIRE(rec->attached_clone);
  for (uint64_t i = 0; i < cloud->images().block_count(*rec->attached_clone); ++i)
    CHECK(cloud->images().read_block_of(*rec->attached_clone, i).value() ==
          cloud->images().read_block_of("base", i).value());
}
