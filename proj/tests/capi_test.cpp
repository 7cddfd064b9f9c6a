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

// Exercises the shared-library surface exactly as an embedder would: opaque
// handle, status codes, heap strings.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "airlock/airlock.h"
#include "doctest.h"

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("airlock-capi-" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) {
    auto p = path / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string at(const std::string& name) { return (path / name).string(); }
};

constexpr const char* kFleet = R"(
nodes 3 firmware heads-flashed
image base zero 8192
)";

struct Str {
  char* p = nullptr;
  ~Str() { airlock_string_free(p); }
};

}  // namespace

TEST_CASE("version string is available") {
  CHECK(std::string(airlock_version()) == "0.1.0");
}

TEST_CASE("init -> admit -> save -> load -> trace round trip") {
  TempDir tmp;
  std::string cfg = tmp.file("fleet.cfg", kFleet);

  airlock_cloud* cloud = nullptr;
  Str err;
  REQUIRE(airlock_cloud_init(cfg.c_str(), 77, 1, &cloud, &err.p) == AIRLOCK_OK);
  CHECK(airlock_cloud_seed(cloud) == 77);

  Str report;
  airlock_status st = airlock_admit(cloud, "acme", 2, "full", &report.p, &err.p);
  CHECK(st == AIRLOCK_OK);
  std::string lines = report.p;
  CHECK(lines.find("Allocated") != std::string::npos);

  Str status_text;
  REQUIRE(airlock_status_report(cloud, &status_text.p, &err.p) == AIRLOCK_OK);
  CHECK(std::string(status_text.p).find("project=acme") != std::string::npos);

  Str trace;
  REQUIRE(airlock_trace(cloud, &trace.p, &err.p) == AIRLOCK_OK);
  CHECK(std::string(trace.p).find("event=AttestPassEvent") != std::string::npos);

  std::string state = tmp.at("cloud.state");
  REQUIRE(airlock_cloud_save(cloud, state.c_str(), &err.p) == AIRLOCK_OK);
  airlock_cloud_free(cloud);

  airlock_cloud* loaded = nullptr;
  REQUIRE(airlock_cloud_load(state.c_str(), &loaded, &err.p) == AIRLOCK_OK);
  Str poll_report;
  CHECK(airlock_poll(loaded, &poll_report.p, &err.p) == AIRLOCK_OK);
  CHECK(std::string(poll_report.p).find("pass") != std::string::npos);
  airlock_cloud_free(loaded);
}

TEST_CASE("admit shortfall returns FAILURE with per-node verdicts") {
  TempDir tmp;
  std::string cfg = tmp.file("fleet.cfg", "nodes 1 firmware heads-flashed\n");
  airlock_cloud* cloud = nullptr;
  Str err;
  REQUIRE(airlock_cloud_init(cfg.c_str(), 1, 1, &cloud, &err.p) == AIRLOCK_OK);
  Str report;
  airlock_status st = airlock_admit(cloud, "acme", 2, "full", &report.p, &err.p);
  CHECK(st == AIRLOCK_ERR_FAILURE);
  std::string lines = report.p;
  CHECK(lines.find("Allocated") != std::string::npos);
  CHECK(lines.find("NoFreeNodes") != std::string::npos);
  airlock_cloud_free(cloud);
}

TEST_CASE("release and clean map lifecycle errors to STATE") {
  TempDir tmp;
  std::string cfg = tmp.file("fleet.cfg", kFleet);
  airlock_cloud* cloud = nullptr;
  Str err;
  REQUIRE(airlock_cloud_init(cfg.c_str(), 9, 1, &cloud, &err.p) == AIRLOCK_OK);
  Str err2;
  CHECK(airlock_release(cloud, "node-01", &err2.p) == AIRLOCK_ERR_STATE);
  Str err3;
  CHECK(airlock_clean(cloud, "node-01", &err3.p) == AIRLOCK_ERR_STATE);
  Str err4;
  CHECK(airlock_release(cloud, "ghost", &err4.p) == AIRLOCK_ERR_NOT_FOUND);
  airlock_cloud_free(cloud);
}

TEST_CASE("parse problems come back as PARSE with a message") {
  TempDir tmp;
  std::string bad = tmp.file("bad.cfg", "nonsense here\n");
  airlock_cloud* cloud = nullptr;
  Str err;
  CHECK(airlock_cloud_init(bad.c_str(), 0, 0, &cloud, &err.p) ==
        AIRLOCK_ERR_PARSE);
  REQUIRE(err.p != nullptr);
  CHECK(std::string(err.p).find("line 1") != std::string::npos);

  Str err2;
  airlock_cloud* missing = nullptr;
  CHECK(airlock_cloud_load(tmp.at("nope.state").c_str(), &missing, &err2.p) ==
        AIRLOCK_ERR_IO);

  std::string corrupt = tmp.file("corrupt.state", "airlock-state v1\njunk\n");
  Str err3;
  CHECK(airlock_cloud_load(corrupt.c_str(), &missing, &err3.p) !=
        AIRLOCK_OK);
}

TEST_CASE("scenario runner reports expectations through the C surface") {
  TempDir tmp;
  std::string scn = tmp.file("mini.scn", R"(
scenario mini
seed 2
node node-01 firmware heads-flashed
image base zero 4096
tenant t profile full
admit tenant t count 1
expect node-01 state Allocated
)");
  Str report, err;
  int ok = 0;
  std::string trace_path = tmp.at("mini.trace");
  std::string state_path = tmp.at("mini.state");
  REQUIRE(airlock_scenario_run(scn.c_str(), 0, 0, trace_path.c_str(),
                               state_path.c_str(), &report.p, &ok,
                               &err.p) == AIRLOCK_OK);
  CHECK(ok == 1);
  CHECK(std::string(report.p).find("RESULT: PASS") != std::string::npos);
  CHECK(std::filesystem::exists(trace_path));
  CHECK(std::filesystem::exists(state_path));

  // The persisted state is loadable and already has node-01 allocated.
  airlock_cloud* cloud = nullptr;
  Str err2;
  REQUIRE(airlock_cloud_load(state_path.c_str(), &cloud, &err2.p) == AIRLOCK_OK);
  Str status_text;
  REQUIRE(airlock_status_report(cloud, &status_text.p, nullptr) == AIRLOCK_OK);
  CHECK(std::string(status_text.p).find("state=Allocated") != std::string::npos);
  airlock_cloud_free(cloud);
}
