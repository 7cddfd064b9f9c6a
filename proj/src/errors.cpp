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

#include "errors.hpp"

namespace airlock {

const char* err_name(Err e) {
  switch (e) {
    case Err::None: return "ok";
    case Err::AlreadyPowered: return "AlreadyPowered";
    case Err::NotAwaitingAttestation: return "NotAwaitingAttestation";
    case Err::NotRunning: return "NotRunning";
    case Err::NoSuchStage: return "NoSuchStage";
    case Err::OutOfRange: return "OutOfRange";
    case Err::EmptySelection: return "EmptySelection";
    case Err::ActivationFailed: return "ActivationFailed";
    case Err::AlreadyEnrolled: return "AlreadyEnrolled";
    case Err::EnrollmentFailed: return "EnrollmentFailed";
    case Err::NoSuchNode: return "NoSuchNode";
    case Err::NoSuchEntry: return "NoSuchEntry";
    case Err::NoPendingRound: return "NoPendingRound";
    case Err::KeyRefused: return "KeyRefused";
    case Err::NoFreeNodes: return "NoFreeNodes";
    case Err::NoVlansAvailable: return "NoVlansAvailable";
    case Err::Forbidden: return "Forbidden";
    case Err::NotAMember: return "NotAMember";
    case Err::AlreadyMember: return "AlreadyMember";
    case Err::NoSuchNetwork: return "NoSuchNetwork";
    case Err::NetworkNotEmpty: return "NetworkNotEmpty";
    case Err::NoSuchImage: return "NoSuchImage";
    case Err::HasClones: return "HasClones";
    case Err::InUse: return "InUse";
    case Err::AlreadyAttached: return "AlreadyAttached";
    case Err::NotAttached: return "NotAttached";
    case Err::FrozenImage: return "FrozenImage";
    case Err::ImageLocked: return "ImageLocked";
    case Err::UnlockFailed: return "UnlockFailed";
    case Err::NotEncrypted: return "NotEncrypted";
    case Err::InvalidTransition: return "InvalidTransition";
    case Err::DuplicateId: return "DuplicateId";
    case Err::ParseError: return "ParseError";
    case Err::ChecksumMismatch: return "ChecksumMismatch";
    case Err::FileExists: return "FileExists";
    case Err::IoError: return "IoError";
    case Err::InvalidConfig: return "InvalidConfig";
    case Err::Internal: return "Internal";
  }
  return "?";
}

}  // namespace airlock
