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

#include "trace.hpp"

#include <sstream>

namespace airlock {

const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::PowerOn: return "PowerOnEvent";
    case EventKind::Measure: return "MeasureEvent";
    case EventKind::Execute: return "ExecuteEvent";
    case EventKind::Kexec: return "KexecEvent";
    case EventKind::PowerOff: return "PowerOffEvent";
    case EventKind::Scrub: return "ScrubEvent";
    case EventKind::Tamper: return "TamperEvent";
    case EventKind::StateChange: return "StateChangeEvent";
    case EventKind::NetCreate: return "NetCreateEvent";
    case EventKind::NetDelete: return "NetDeleteEvent";
    case EventKind::Connect: return "ConnectEvent";
    case EventKind::Detach: return "DetachEvent";
    case EventKind::Drain: return "DrainEvent";
    case EventKind::Enroll: return "EnrollEvent";
    case EventKind::NonceIssued: return "NonceEvent";
    case EventKind::AttestPass: return "AttestPassEvent";
    case EventKind::AttestFail: return "AttestFailEvent";
    case EventKind::ShareRelease: return "ShareReleaseEvent";
    case EventKind::Revoke: return "RevokeEvent";
    case EventKind::KeyCombine: return "KeyCombineEvent";
    case EventKind::KeyErase: return "KeyEraseEvent";
    case EventKind::AttachTarget: return "AttachTargetEvent";
    case EventKind::DetachTarget: return "DetachTargetEvent";
    case EventKind::Clean: return "CleanEvent";
  }
  return "UnknownEvent";
}

std::string format_event_line(const Event& e) {
  std::ostringstream os;
  os << "seq=" << e.seq << " node=" << e.node << " phase=" << e.phase
     << " event=" << event_name(e.kind) << " detail=" << e.detail;
  return os.str();
}

uint64_t TraceCollector::emit(const std::string& node, const std::string& phase,
                              EventKind kind, const std::string& detail) {
  std::lock_guard<std::mutex> lk(mu_);
  Event e{next_seq_++, node, phase, kind, detail};
  events_.push_back(std::move(e));
  return events_.back().seq;
}

void TraceCollector::write_to(std::ostream& os) const {
  std::lock_guard<std::mutex> lk(mu_);
  for (const Event& e : events_) os << format_event_line(e) << "\n";
}

std::string TraceCollector::text() const {
  std::ostringstream os;
  write_to(os);
  return os.str();
}

void TraceCollector::clear() {
  std::lock_guard<std::mutex> lk(mu_);
  events_.clear();
  next_seq_ = 1;
}

}  // namespace airlock
