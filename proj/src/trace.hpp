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

#ifndef AIRLOCK_TRACE_HPP_
#define AIRLOCK_TRACE_HPP_

#include <cstdint>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace airlock {

enum class EventKind {
  PowerOn,
  Measure,
  Execute,
  Kexec,
  PowerOff,
  Scrub,
  Tamper,
  StateChange,
  NetCreate,
  NetDelete,
  Connect,
  Detach,
  Drain,
  Enroll,
  NonceIssued,
  AttestPass,
  AttestFail,
  ShareRelease,
  Revoke,
  KeyCombine,
  KeyErase,
  AttachTarget,
  DetachTarget,
  Clean,
};

// Trace spelling, e.g. EventKind::Measure -> "MeasureEvent".
const char* event_name(EventKind k);

struct Event {
  uint64_t seq;
  std::string node;   // uuid the event concerns, or "-" for service-level
  std::string phase;  // boot phase of the node at emission, or "-"
  EventKind kind;
  std::string detail;  // slash-separated key:value pairs
};

std::string format_event_line(const Event& e);

// Global linearized event log. Emission assigns the linearization order.
class TraceCollector {
 public:
  uint64_t emit(const std::string& node, const std::string& phase,
                EventKind kind, const std::string& detail);
  const std::vector<Event>& events() const { return events_; }
  void write_to(std::ostream& os) const;
  std::string text() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
  uint64_t next_seq_ = 1;
};

}  // namespace airlock

#endif  // AIRLOCK_TRACE_HPP_
