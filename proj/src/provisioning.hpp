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

#ifndef AIRLOCK_PROVISIONING_HPP_
#define AIRLOCK_PROVISIONING_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "crypto.hpp"
#include "errors.hpp"
#include "trace.hpp"

namespace airlock::provision {

// Copy-on-write image store. Images own a top layer holding only the blocks
// written at that level; clones resolve unwritten blocks through sealed
// parent layers. Cloning moves the parent's current blocks into a sealed
// mid-layer, so later writes to the parent never leak into earlier clones.
class ImageCatalog {
 public:
  static constexpr uint64_t kDefaultBlockSize = 4096;

  struct EncryptionState {
    bool wrapped = false;
    Bytes wrapped_content_key;  // authenticated wrap under the enclave key
    bool unlocked = false;
  };

  struct Layer {
    std::optional<uint64_t> parent;
    std::map<uint64_t, Bytes> blocks;  // block index -> exactly block_size bytes
  };

  struct Image {
    std::string id;
    std::optional<std::string> origin;  // image this was cloned from
    uint64_t top_layer = 0;
    uint64_t length = 0;  // total bytes
    bool frozen = false;  // snapshots refuse writes
    EncryptionState enc;
  };

  explicit ImageCatalog(TraceCollector& trace,
                        uint64_t block_size = kDefaultBlockSize);

  Result<std::string> create_image(std::span<const uint8_t> content,
                                   const std::string& id_hint = "");
  Result<std::string> clone_image(const std::string& id);
  // Clone-and-freeze: the returned image refuses writes.
  Result<std::string> snapshot_image(const std::string& id);
  Result<void> delete_image(const std::string& id);

  // Encryption gate: wraps a fresh content key under `key`; reads and writes
  // are refused until unlock_image succeeds with the same key.
  Result<void> wrap_image(const std::string& id, const Key32& key,
                          crypto::Rng& rng);
  Result<void> unlock_image(const std::string& id, const Key32& key);

  Result<void> attach_boot_target(const std::string& node,
                                  const std::string& image);
  Result<void> detach_boot_target(const std::string& node);
  std::optional<std::string> attached_image(const std::string& node) const;

  Result<Bytes> read_block(const std::string& node, uint64_t index) const;
  Result<void> write_block(const std::string& node, uint64_t index,
                           std::span<const uint8_t> data);

  // Catalog-level block access (scenario harness, verification).
  Result<Bytes> read_block_of(const std::string& image, uint64_t index) const;

  uint64_t block_count(const std::string& image) const;
  uint64_t block_size() const { return block_size_; }
  bool has_image(const std::string& id) const { return images_.count(id) > 0; }
  const Image* image(const std::string& id) const;
  const std::map<std::string, Image>& images() const { return images_; }
  const std::map<uint64_t, Layer>& layers() const { return layers_; }
  const std::map<std::string, std::string>& targets() const { return targets_; }
  size_t own_block_count(const std::string& image) const;

  // Persistence restore.
  void restore_image(Image img);
  void restore_layer(uint64_t id, Layer layer);
  void restore_target(const std::string& node, const std::string& image);
  void restore_counters(uint64_t image_counter, uint64_t layer_counter);
  uint64_t image_counter() const { return image_counter_; }
  uint64_t layer_counter() const { return layer_counter_; }

 private:
  uint64_t new_layer(std::optional<uint64_t> parent);
  void gc_layer(uint64_t id);
  bool layer_referenced(uint64_t id) const;
  Result<const Image*> writable_target(const std::string& node);

  uint64_t block_size_;
  std::map<std::string, Image> images_;
  std::map<uint64_t, Layer> layers_;
  std::map<std::string, std::string> targets_;  // node -> attached image
  uint64_t image_counter_ = 1;
  uint64_t layer_counter_ = 1;
  TraceCollector& trace_;
};

}  // namespace airlock::provision

#endif  // AIRLOCK_PROVISIONING_HPP_
