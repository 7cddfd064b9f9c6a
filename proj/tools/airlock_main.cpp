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

// Driver CLI. Everything goes through the public C API in
// include/airlock/airlock.h; this translation unit never touches the
// library's internal headers.

#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "airlock/airlock.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // unmet expectations / invalid operation
constexpr int kExitUsage = 2;    // usage or parse errors

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { airlock_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

struct OwnedCloud {
  airlock_cloud* ptr = nullptr;
  ~OwnedCloud() { airlock_cloud_free(ptr); }
};

int exit_code_for(airlock_status status) {
  switch (status) {
    case AIRLOCK_OK:
      return kExitOk;
    case AIRLOCK_ERR_PARSE:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

int report_error(const char* what, airlock_status status, const OwnedString& err) {
  std::fprintf(stderr, "airlock: %s failed: %s\n", what,
               err.ptr ? err.ptr : "unknown error");
  return exit_code_for(status);
}

int load_cloud(const std::string& state_path, bool has_seed, uint64_t seed,
               OwnedCloud& cloud) {
  OwnedString err;
  airlock_status st = airlock_cloud_load(state_path.c_str(), &cloud.ptr, &err.ptr);
  if (st != AIRLOCK_OK) return report_error("loading state", st, err);
  if (has_seed) airlock_cloud_reseed(cloud.ptr, seed);
  return kExitOk;
}

int save_cloud(const OwnedCloud& cloud, const std::string& state_path) {
  OwnedString err;
  airlock_status st = airlock_cloud_save(cloud.ptr, state_path.c_str(), &err.ptr);
  if (st != AIRLOCK_OK) return report_error("saving state", st, err);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"airlock - attested bare-metal cloud simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // --state/--seed may follow the subcommand

  std::string state_path = "airlock.state";
  uint64_t seed = 0;
  bool has_seed = false;
  app.add_option("--state", state_path, "cloud state file")
      ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "seed for reproducible runs");

  // init
  auto* init = app.add_subcommand("init", "create a cloud from a fleet config");
  std::string config_path;
  bool force = false;
  init->add_option("--config", config_path, "fleet config file")->required();
  init->add_flag("--force", force, "overwrite an existing state file");

  // admit
  auto* admit = app.add_subcommand("admit", "admit nodes into a tenant enclave");
  std::string tenant, profile = "full";
  int count = 1;
  admit->add_option("--tenant", tenant, "tenant name")->required();
  admit->add_option("--count", count, "number of nodes")->capture_default_str();
  admit->add_option("--profile", profile, "full | attested | unattested")
      ->capture_default_str();

  // release / clean
  auto* release = app.add_subcommand("release", "release an allocated node");
  auto* clean = app.add_subcommand("clean", "clean a rejected node");
  std::string node;
  release->add_option("--node", node, "node uuid")->required();
  clean->add_option("--node", node, "node uuid")->required();

  // poll
  auto* poll = app.add_subcommand("poll", "run one continuous-attestation tick");

  // status
  auto* status_cmd = app.add_subcommand("status", "print the cloud state");

  // scenario
  auto* scenario = app.add_subcommand("scenario", "run a scenario file");
  std::string scenario_path, trace_path;
  bool want_state_out = false;
  scenario->add_option("--file", scenario_path, "scenario file")->required();
  scenario->add_option("--trace", trace_path,
                       "trace output path (default: <scenario>.trace)");
  scenario->add_flag("--save-state", want_state_out,
                     "persist the final cloud to --state");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  has_seed = seed_opt->count() > 0;

  if (init->parsed()) {
    if (std::filesystem::exists(state_path) && !force) {
      std::fprintf(stderr,
                   "airlock: %s exists; use --force to overwrite\n",
                   state_path.c_str());
      return kExitFailure;
    }
    OwnedCloud cloud;
    OwnedString err;
    airlock_status st = airlock_cloud_init(config_path.c_str(), seed,
                                           has_seed ? 1 : 0, &cloud.ptr,
                                           &err.ptr);
    if (st != AIRLOCK_OK) return report_error("init", st, err);
    std::printf("seed: %llu\n",
                static_cast<unsigned long long>(airlock_cloud_seed(cloud.ptr)));
    if (int rc = save_cloud(cloud, state_path); rc != kExitOk) return rc;
    OwnedString report;
    if (airlock_status_report(cloud.ptr, &report.ptr, nullptr) == AIRLOCK_OK)
      std::fputs(report.str().c_str(), stdout);
    return kExitOk;
  }

  if (admit->parsed()) {
    OwnedCloud cloud;
    if (int rc = load_cloud(state_path, has_seed, seed, cloud); rc != kExitOk)
      return rc;
    OwnedString report, err;
    airlock_status st = airlock_admit(cloud.ptr, tenant.c_str(), count,
                                      profile.c_str(), &report.ptr, &err.ptr);
    std::fputs(report.str().c_str(), stdout);
    if (st != AIRLOCK_OK && st != AIRLOCK_ERR_FAILURE)
      return report_error("admit", st, err);
    if (int rc = save_cloud(cloud, state_path); rc != kExitOk) return rc;
    if (st == AIRLOCK_ERR_FAILURE) {
      std::fprintf(stderr, "airlock: %s\n", err.ptr ? err.ptr : "admit failed");
      return kExitFailure;
    }
    return kExitOk;
  }

  if (release->parsed() || clean->parsed()) {
    OwnedCloud cloud;
    if (int rc = load_cloud(state_path, has_seed, seed, cloud); rc != kExitOk)
      return rc;
    OwnedString err;
    airlock_status st =
        release->parsed()
            ? airlock_release(cloud.ptr, node.c_str(), &err.ptr)
            : airlock_clean(cloud.ptr, node.c_str(), &err.ptr);
    if (st != AIRLOCK_OK)
      return report_error(release->parsed() ? "release" : "clean", st, err);
    if (int rc = save_cloud(cloud, state_path); rc != kExitOk) return rc;
    std::printf("%s: ok\n", node.c_str());
    return kExitOk;
  }

  if (poll->parsed()) {
    OwnedCloud cloud;
    if (int rc = load_cloud(state_path, has_seed, seed, cloud); rc != kExitOk)
      return rc;
    OwnedString report, err;
    airlock_status st = airlock_poll(cloud.ptr, &report.ptr, &err.ptr);
    if (st != AIRLOCK_OK) return report_error("poll", st, err);
    std::fputs(report.str().c_str(), stdout);
    if (int rc = save_cloud(cloud, state_path); rc != kExitOk) return rc;
    return kExitOk;
  }

  if (status_cmd->parsed()) {
    OwnedCloud cloud;
    if (int rc = load_cloud(state_path, false, 0, cloud); rc != kExitOk)
      return rc;
    OwnedString report, err;
    airlock_status st = airlock_status_report(cloud.ptr, &report.ptr, &err.ptr);
    if (st != AIRLOCK_OK) return report_error("status", st, err);
    std::fputs(report.str().c_str(), stdout);
    return kExitOk;
  }

  if (scenario->parsed()) {
    if (trace_path.empty())
      trace_path =
          std::filesystem::path(scenario_path).stem().string() + ".trace";
    OwnedString report, err;
    int expectations_ok = 0;
    airlock_status st = airlock_scenario_run(
        scenario_path.c_str(), seed, has_seed ? 1 : 0, trace_path.c_str(),
        want_state_out ? state_path.c_str() : nullptr, &report.ptr,
        &expectations_ok, &err.ptr);
    if (st != AIRLOCK_OK) return report_error("scenario", st, err);
    std::fputs(report.str().c_str(), stdout);
    std::printf("trace: %s\n", trace_path.c_str());
    return expectations_ok ? kExitOk : kExitFailure;
  }

  return kExitUsage;
}
