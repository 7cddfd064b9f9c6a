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

#ifndef AIRLOCK_PERSISTENCE_HPP_
#define AIRLOCK_PERSISTENCE_HPP_

#include <memory>
#include <string>

#include "cloud.hpp"

namespace airlock::cloud {

// Plain structured text, canonical ordering, trailing line
// `checksum <sha256-hex-of-body>`. save(load(save(x))) is byte-identical.
std::string save_state(Cloud& cloud);
Result<std::unique_ptr<Cloud>> load_state(const std::string& text);

Result<void> save_state_file(Cloud& cloud, const std::string& path);
Result<std::unique_ptr<Cloud>> load_state_file(const std::string& path);

}  // namespace airlock::cloud

#endif  // AIRLOCK_PERSISTENCE_HPP_
