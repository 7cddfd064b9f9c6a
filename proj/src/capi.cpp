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

#include "airlock/airlock.h"

#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cloud.hpp"
#include "persistence.hpp"
#include "scenario.hpp"

using airlock::Err;

struct airlock_cloud {
  std::unique_ptr<airlock::cloud::Cloud> impl;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_err(char** err, const std::string& msg) {
  if (err) *err = dup_string(msg);
}

airlock_status status_of(Err e) {
  switch (e) {
    case Err::None:
      return AIRLOCK_OK;
    case Err::ParseError:
    case Err::InvalidConfig:
      return AIRLOCK_ERR_PARSE;
    case Err::InvalidTransition:
    case Err::NotAwaitingAttestation:
    case Err::NotRunning:
    case Err::AlreadyPowered:
      return AIRLOCK_ERR_STATE;
    case Err::NoSuchNode:
    case Err::NoSuchEntry:
    case Err::NoSuchNetwork:
    case Err::NoSuchImage:
    case Err::NoSuchStage:
      return AIRLOCK_ERR_NOT_FOUND;
    case Err::IoError:
    case Err::ChecksumMismatch:
      return AIRLOCK_ERR_IO;
    case Err::FileExists:
      return AIRLOCK_ERR_EXISTS;
    default:
      return AIRLOCK_ERR_FAILURE;
  }
}

template <typename Fn>
airlock_status guarded(char** err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    set_err(err, e.what());
    return AIRLOCK_ERR_FAILURE;
  } catch (...) {
    set_err(err, "unknown error");
    return AIRLOCK_ERR_FAILURE;
  }
}

uint64_t random_seed() {
  return static_cast<uint64_t>(
      std::chrono::steady_clock::now().time_since_epoch().count());
}

}  // namespace

extern "C" {

const char* airlock_version(void) { return "0.1.0"; }

airlock_status airlock_cloud_init(const char* config_path, uint64_t seed,
                                  int has_seed, airlock_cloud** out,
                                  char** err) {
  if (!config_path || !out) {
    set_err(err, "null argument");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    auto parsed = airlock::scenario::parse_scenario_file(config_path,
                                                         /*allow_actions=*/false);
    if (!parsed) {
      set_err(err, parsed.describe());
      return status_of(parsed.error());
    }
    airlock::cloud::CloudSpec spec = parsed.value().spec;
    spec.seed = has_seed ? seed : random_seed();
    auto cloud = airlock::cloud::Cloud::create(spec);
    if (!cloud) {
      set_err(err, cloud.describe());
      return status_of(cloud.error());
    }
    cloud.value()->verifier().set_poll_interval(parsed.value().poll_interval);
    *out = new airlock_cloud{std::move(cloud).take()};
    return AIRLOCK_OK;
  });
}

airlock_status airlock_cloud_load(const char* state_path, airlock_cloud** out,
                                  char** err) {
  if (!state_path || !out) {
    set_err(err, "null argument");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    auto cloud = airlock::cloud::load_state_file(state_path);
    if (!cloud) {
      set_err(err, cloud.describe());
      return status_of(cloud.error());
    }
    *out = new airlock_cloud{std::move(cloud).take()};
    return AIRLOCK_OK;
  });
}

airlock_status airlock_cloud_save(airlock_cloud* cloud, const char* state_path,
                                  char** err) {
  if (!cloud || !state_path) {
    set_err(err, "null argument");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    auto saved = airlock::cloud::save_state_file(*cloud->impl, state_path);
    if (!saved) {
      set_err(err, saved.describe());
      return status_of(saved.error());
    }
    return AIRLOCK_OK;
  });
}

void airlock_cloud_free(airlock_cloud* cloud) { delete cloud; }

uint64_t airlock_cloud_seed(const airlock_cloud* cloud) {
  return cloud ? cloud->impl->seed() : 0;
}

void airlock_cloud_reseed(airlock_cloud* cloud, uint64_t seed) {
  if (cloud) cloud->impl->reseed(seed);
}

airlock_status airlock_admit(airlock_cloud* cloud, const char* tenant,
                             int count, const char* profile, char** report,
                             char** err) {
  if (!cloud || !tenant || count < 0) {
    set_err(err, "bad arguments");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    auto prof = airlock::orch::profile_by_name(profile ? profile : "full");
    if (!prof) {
      set_err(err, std::string("unknown profile ") + (profile ? profile : ""));
      return AIRLOCK_ERR_PARSE;
    }
    auto outcomes = cloud->impl->orchestrator().admit_many(
        tenant, static_cast<size_t>(count), *prof);
    std::ostringstream os;
    bool shortfall = false;
    for (const auto& o : outcomes) {
      if (o.error == Err::NoFreeNodes) {
        shortfall = true;
        os << "NoFreeNodes: pool exhausted\n";
      } else {
        os << o.uuid << " " << airlock::orch::state_name(o.final_state)
           << (o.detail.empty() ? "" : " (" + o.detail + ")") << "\n";
      }
    }
    if (report) *report = dup_string(os.str());
    if (shortfall) {
      set_err(err, "insufficient free nodes");
      return AIRLOCK_ERR_FAILURE;
    }
    return AIRLOCK_OK;
  });
}

airlock_status airlock_release(airlock_cloud* cloud, const char* node,
                               char** err) {
  if (!cloud || !node) {
    set_err(err, "null argument");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    auto r = cloud->impl->orchestrator().release_node(node);
    if (!r) {
      set_err(err, r.describe());
      return status_of(r.error());
    }
    return AIRLOCK_OK;
  });
}

airlock_status airlock_clean(airlock_cloud* cloud, const char* node,
                             char** err) {
  if (!cloud || !node) {
    set_err(err, "null argument");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    auto r = cloud->impl->orchestrator().clean_node(node);
    if (!r) {
      set_err(err, r.describe());
      return status_of(r.error());
    }
    return AIRLOCK_OK;
  });
}

airlock_status airlock_poll(airlock_cloud* cloud, char** report, char** err) {
  if (!cloud) {
    set_err(err, "null argument");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    auto results = cloud->impl->orchestrator().poll_once();
    std::ostringstream os;
    for (const auto& [uuid, r] : results)
      os << uuid << " " << r.describe() << (r.pass ? "" : " -> revoked") << "\n";
    if (report) *report = dup_string(os.str());
    return AIRLOCK_OK;
  });
}

airlock_status airlock_status_report(airlock_cloud* cloud, char** report,
                                     char** err) {
  if (!cloud || !report) {
    set_err(err, "null argument");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    *report = dup_string(cloud->impl->status_text());
    return AIRLOCK_OK;
  });
}

airlock_status airlock_trace(airlock_cloud* cloud, char** text, char** err) {
  if (!cloud || !text) {
    set_err(err, "null argument");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    *text = dup_string(cloud->impl->trace().text());
    return AIRLOCK_OK;
  });
}

airlock_status airlock_scenario_run(const char* scenario_path, uint64_t seed,
                                    int has_seed, const char* trace_out_path,
                                    const char* state_out_path, char** report,
                                    int* expectations_ok, char** err) {
  if (!scenario_path) {
    set_err(err, "null scenario path");
    return AIRLOCK_ERR_PARSE;
  }
  return guarded(err, [&]() -> airlock_status {
    auto parsed = airlock::scenario::parse_scenario_file(scenario_path);
    if (!parsed) {
      set_err(err, parsed.describe());
      return status_of(parsed.error());
    }
    std::optional<uint64_t> seed_override;
    if (has_seed) seed_override = seed;
    std::unique_ptr<airlock::cloud::Cloud> final_cloud;
    auto run = airlock::scenario::run_scenario(parsed.value(), seed_override,
                                               &final_cloud);
    if (!run) {
      set_err(err, run.describe());
      return status_of(run.error());
    }
    const auto& rep = run.value();
    if (trace_out_path) {
      std::ofstream tf(trace_out_path, std::ios::binary | std::ios::trunc);
      if (!tf) {
        set_err(err, std::string("cannot write ") + trace_out_path);
        return AIRLOCK_ERR_IO;
      }
      tf << rep.trace_text;
    }
    if (state_out_path && final_cloud) {
      auto saved = airlock::cloud::save_state_file(*final_cloud, state_out_path);
      if (!saved) {
        set_err(err, saved.describe());
        return status_of(saved.error());
      }
    }
    if (report) *report = dup_string(rep.summary);
    if (expectations_ok) *expectations_ok = rep.ok() ? 1 : 0;
    return AIRLOCK_OK;
  });
}

void airlock_string_free(char* s) { std::free(s); }

}  // extern "C"
