/* Copyright 2026 The Airlock Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Public C API of libairlock, the attested bare-metal cloud simulator.
 *
 * A cloud lives behind the opaque airlock_cloud handle. Every call returns
 * an airlock_status; calls that can fail take an optional char** which, on
 * failure, receives a heap-allocated message to free with
 * airlock_string_free. Returned report/trace strings are heap-allocated the
 * same way. Handles are not thread-safe; drive one cloud from one thread.
 */

#ifndef AIRLOCK_AIRLOCK_H_
#define AIRLOCK_AIRLOCK_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AIRLOCK_API __declspec(dllexport)
#else
#define AIRLOCK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct airlock_cloud airlock_cloud;

typedef enum airlock_status {
  AIRLOCK_OK = 0,
  AIRLOCK_ERR_FAILURE = 1,   /* operation failed / expectations unmet */
  AIRLOCK_ERR_PARSE = 2,     /* config, scenario or state file malformed */
  AIRLOCK_ERR_STATE = 3,     /* invalid lifecycle transition or phase */
  AIRLOCK_ERR_NOT_FOUND = 4, /* unknown node, image or network */
  AIRLOCK_ERR_IO = 5,        /* file unreadable/unwritable or bad checksum */
  AIRLOCK_ERR_EXISTS = 6,    /* refusing to overwrite */
} airlock_status;

AIRLOCK_API const char* airlock_version(void);

/* ---- cloud lifecycle ---- */

/* Builds a cloud from a fleet config file. `has_seed` selects between the
 * explicit seed and a randomly drawn one (readable via airlock_cloud_seed). */
AIRLOCK_API airlock_status airlock_cloud_init(const char* config_path,
                                              uint64_t seed, int has_seed,
                                              airlock_cloud** out, char** err);
AIRLOCK_API airlock_status airlock_cloud_load(const char* state_path,
                                              airlock_cloud** out, char** err);
AIRLOCK_API airlock_status airlock_cloud_save(airlock_cloud* cloud,
                                              const char* state_path,
                                              char** err);
AIRLOCK_API void airlock_cloud_free(airlock_cloud* cloud);
AIRLOCK_API uint64_t airlock_cloud_seed(const airlock_cloud* cloud);
AIRLOCK_API void airlock_cloud_reseed(airlock_cloud* cloud, uint64_t seed);

/* ---- tenant operations ---- */

/* Admits `count` nodes concurrently for `tenant` under `profile`
 * (full | attested | unattested). Per-node verdict lines land in *report.
 * Returns AIRLOCK_ERR_FAILURE when the free pool ran short; rejections are
 * handled outcomes and still return AIRLOCK_OK. */
AIRLOCK_API airlock_status airlock_admit(airlock_cloud* cloud,
                                         const char* tenant, int count,
                                         const char* profile, char** report,
                                         char** err);
AIRLOCK_API airlock_status airlock_release(airlock_cloud* cloud,
                                           const char* node, char** err);
AIRLOCK_API airlock_status airlock_clean(airlock_cloud* cloud, const char* node,
                                         char** err);
/* One continuous-attestation tick; failing nodes are revoked and reported. */
AIRLOCK_API airlock_status airlock_poll(airlock_cloud* cloud, char** report,
                                        char** err);
AIRLOCK_API airlock_status airlock_status_report(airlock_cloud* cloud,
                                                 char** report, char** err);
/* The linearized event trace accumulated by this handle so far. */
AIRLOCK_API airlock_status airlock_trace(airlock_cloud* cloud, char** text,
                                         char** err);

/* ---- scenario harness ---- */

/* Runs a scenario file end to end on a fresh cloud. *expectations_ok is 1
 * iff every expectation held and the invariant checker found nothing.
 * trace_out_path and state_out_path are optional (NULL to skip). */
AIRLOCK_API airlock_status airlock_scenario_run(const char* scenario_path,
                                                uint64_t seed, int has_seed,
                                                const char* trace_out_path,
                                                const char* state_out_path,
                                                char** report,
                                                int* expectations_ok,
                                                char** err);

AIRLOCK_API void airlock_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* AIRLOCK_AIRLOCK_H_ */
