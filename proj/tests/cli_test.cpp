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

// End-to-end CLI checks: spawns the real binary and verifies the exit-code
// contract (0 = handled outcomes, 1 = failures, 2 = usage/parse errors).
// Usage: cli_test <path-to-airlock-binary> <scenario-dir>

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

int failures = 0;

void expect(bool cond, const std::string& what) {
  if (!cond) {
    ++failures;
    std::cerr << "[FAIL] " << what << "\n";
  } else {
    std::cout << "[ ok ] " << what << "\n";
  }
}

int run(const std::string& cmd) {
  int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: cli_test <airlock-binary> <scenario-dir>\n";
    return 2;
  }
  std::string bin = argv[1];
  std::filesystem::path scenarios(argv[2]);

  std::filesystem::path work =
      std::filesystem::temp_directory_path() /
      ("airlock-cli-" + std::to_string(::getpid()));
  std::filesystem::create_directories(work);
  std::filesystem::current_path(work);

  std::ofstream("fleet.cfg") << "nodes 4 firmware heads-flashed\n"
                                "image base zero 8192\n";
  std::ofstream("dup.cfg") << "node n1 firmware heads-flashed\n"
                              "node n1 firmware heads-flashed\n";
  std::ofstream("bad.scn") << "what is this\n";

  expect(run(bin + " init --config fleet.cfg --state s1 --seed 5") == 0,
         "init exits 0");
  expect(std::filesystem::exists("s1"), "init wrote the state file");
  expect(run(bin + " init --config fleet.cfg --state s1") == 1,
         "re-init without --force exits 1");
  expect(run(bin + " init --config fleet.cfg --state s1 --force") == 0,
         "re-init with --force exits 0");
  expect(run(bin + " init --config dup.cfg --state s2") == 2,
         "duplicate uuid config exits 2");
  expect(run(bin + " init --config missing.cfg --state s3") != 0,
         "missing config fails");

  expect(run(bin + " admit --tenant acme --count 2 --state s1") == 0,
         "admit 2 of 4 exits 0");
  expect(run(bin + " admit --tenant acme --count 5 --state s1") == 1,
         "admit beyond the pool exits 1");
  expect(run(bin + " status --state s1") == 0, "status exits 0");
  expect(run(bin + " poll --state s1") == 0, "poll exits 0");

  expect(run(bin + " release --node node-01 --state s1") == 0,
         "release exits 0");
  expect(run(bin + " release --node node-01 --state s1") == 1,
         "double release exits 1");
  expect(run(bin + " clean --node node-01 --state s1") == 1,
         "clean of a free node exits 1");

  expect(run(bin + " scenario --file " +
             (scenarios / "tamper-firmware.scn").string()) == 0,
         "tamper-firmware scenario exits 0");
  expect(std::filesystem::exists("tamper-firmware.trace"),
         "scenario wrote its trace");
  expect(run(bin + " scenario --file " +
             (scenarios / "concurrent-16.scn").string()) == 0,
         "concurrent-16 scenario exits 0");
  expect(run(bin + " scenario --file bad.scn") == 2,
         "malformed scenario exits 2");
  expect(run(bin + " scenario --file nonexistent.scn") != 0,
         "missing scenario fails");
  expect(run(bin + " bogus-subcommand") == 2, "unknown subcommand exits 2");

  // Deterministic replay: the same seed writes the same trace bytes.
  std::string scn = (scenarios / "runtime-revocation.scn").string();
  expect(run(bin + " scenario --file " + scn + " --seed 7 --trace t1") == 0,
         "seeded scenario run 1");
  expect(run(bin + " scenario --file " + scn + " --seed 7 --trace t2") == 0,
         "seeded scenario run 2");
  auto slurp = [](const char* p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  expect(!slurp("t1").empty() && slurp("t1") == slurp("t2"),
         "same seed, bit-identical traces");

  std::filesystem::current_path(std::filesystem::temp_directory_path());
  std::filesystem::remove_all(work);
  if (failures) {
    std::cerr << failures << " CLI checks failed\n";
    return 1;
  }
  std::cout << "all CLI checks passed\n";
  return 0;
}
