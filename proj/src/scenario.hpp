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

#ifndef AIRLOCK_SCENARIO_HPP_
#define AIRLOCK_SCENARIO_HPP_

#include <optional>
#include <string>
#include <vector>

#include "cloud.hpp"
#include "invariants.hpp"

namespace airlock::scenario {

struct TamperSpec {
  std::string uuid;
  std::string stage;
  size_t offset = 0;
  uint8_t value = 0;
};

struct TenantSpec {
  std::string name;
  std::string profile = "full";
  std::vector<std::string> networks;
};

struct Action {
  enum class Kind {
    Admit,
    Poll,
    Tick,
    RuntimeTamper,
    Release,
    Clean,
    MemWrite,
    BlockWrite
  };
  Kind kind;
  // admit
  std::string tenant;
  size_t count = 1;
  std::string profile;  // empty -> tenant default
  // runtime-tamper
  TamperSpec tamper;
  // release/clean/memwrite/blockwrite
  std::string uuid;
  uint64_t offset = 0;
  Bytes data;
};

struct Expectation {
  std::string uuid;
  orch::NodeState state;
};

struct Scenario {
  std::string name = "scenario";
  std::optional<uint64_t> seed;
  uint64_t poll_interval = 1;
  cloud::CloudSpec spec;
  std::vector<TamperSpec> pre_tampers;  // injected attacks before any boot
  std::vector<TenantSpec> tenants;
  std::vector<Action> actions;
  std::vector<Expectation> expectations;
};

// Parses the scenario text. `base_dir` anchors relative `file` references;
// `allow_actions` is cleared for plain cloud-init configs, which share the
// fleet grammar but carry no script.
Result<Scenario> parse_scenario(const std::string& text,
                                const std::string& base_dir = ".",
                                bool allow_actions = true);
Result<Scenario> parse_scenario_file(const std::string& path,
                                     bool allow_actions = true);

struct ScenarioReport {
  std::string name;
  uint64_t seed = 0;
  bool expectations_ok = true;
  std::vector<std::string> expectation_lines;
  std::vector<invariants::Violation> violations;
  std::string trace_text;
  std::string summary;  // human-readable report

  bool ok() const { return expectations_ok && violations.empty(); }
};

// Builds a fresh cloud from the scenario's fleet, runs the script with a
// fixed seed, then checks the whole trace. Deterministic per seed.
// `keep_cloud`, when given, receives the finished cloud (for persistence or
// further probing).
Result<ScenarioReport> run_scenario(
    const Scenario& scenario, std::optional<uint64_t> seed_override = {},
    std::unique_ptr<cloud::Cloud>* keep_cloud = nullptr);

}  // namespace airlock::scenario

#endif  // AIRLOCK_SCENARIO_HPP_
