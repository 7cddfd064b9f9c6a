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

#include "provisioning.hpp"

#include <algorithm>
#include <stdexcept>

namespace airlock::provision {

ImageCatalog::ImageCatalog(TraceCollector& trace, uint64_t block_size)
    : block_size_(block_size), trace_(trace) {
  if (block_size_ == 0) throw std::invalid_argument("block size must be > 0");
}

uint64_t ImageCatalog::new_layer(std::optional<uint64_t> parent) {
  uint64_t id = layer_counter_++;
  layers_[id] = Layer{parent, {}};
  return id;
}

Result<std::string> ImageCatalog::create_image(std::span<const uint8_t> content,
                                               const std::string& id_hint) {
  std::string id = id_hint;
  if (id.empty()) id = "img-" + std::to_string(image_counter_++);
  if (images_.count(id)) return {Err::DuplicateId, id};

  Image img;
  img.id = id;
  img.length = content.size();
  img.top_layer = new_layer(std::nullopt);
  Layer& top = layers_[img.top_layer];
  for (uint64_t off = 0; off < content.size(); off += block_size_) {
    uint64_t n = std::min<uint64_t>(block_size_, content.size() - off);
    Bytes block(block_size_, 0);
    std::copy(content.begin() + off, content.begin() + off + n, block.begin());
    top.blocks[off / block_size_] = std::move(block);
  }
  images_[id] = std::move(img);
  return id;
}

Result<std::string> ImageCatalog::clone_image(const std::string& id) {
  auto it = images_.find(id);
  if (it == images_.end()) return {Err::NoSuchImage, id};
  Image& parent = it->second;

  Layer& parent_top = layers_.at(parent.top_layer);
  if (!parent_top.blocks.empty()) {
    // Seal the parent's current contents; both the parent and the clone
    // continue on top of the sealed layer. No block data is copied.
    uint64_t sealed = new_layer(parent_top.parent);
    layers_[sealed].blocks = std::move(parent_top.blocks);
    parent_top.blocks.clear();
    parent_top.parent = sealed;
  }

  Image clone;
  clone.id = "img-" + std::to_string(image_counter_++);
  clone.origin = id;
  clone.length = parent.length;
  clone.enc = parent.enc;
  clone.top_layer = new_layer(layers_.at(parent.top_layer).parent);
  images_[clone.id] = clone;
  return clone.id;
}

Result<std::string> ImageCatalog::snapshot_image(const std::string& id) {
  auto cloned = clone_image(id);
  if (!cloned) return cloned;
  images_.at(cloned.value()).frozen = true;
  return cloned;
}

bool ImageCatalog::layer_referenced(uint64_t id) const {
  for (const auto& [iid, img] : images_)
    if (img.top_layer == id) return true;
  for (const auto& [lid, layer] : layers_)
    if (layer.parent && *layer.parent == id) return true;
  return false;
}

void ImageCatalog::gc_layer(uint64_t id) {
  while (true) {
    auto it = layers_.find(id);
    if (it == layers_.end() || layer_referenced(id)) return;
    std::optional<uint64_t> parent = it->second.parent;
    layers_.erase(it);
    if (!parent) return;
    id = *parent;
  }
}

Result<void> ImageCatalog::delete_image(const std::string& id) {
  auto it = images_.find(id);
  if (it == images_.end()) return {Err::NoSuchImage, id};
  for (const auto& [other_id, other] : images_)
    if (other.origin && *other.origin == id)
      return {Err::HasClones, id + " has live clone " + other_id};
  for (const auto& [node, image] : targets_)
    if (image == id) return {Err::InUse, id + " attached to " + node};
  uint64_t top = it->second.top_layer;
  images_.erase(it);
  gc_layer(top);
  return ok();
}

Result<void> ImageCatalog::wrap_image(const std::string& id, const Key32& key,
                                      crypto::Rng& rng) {
  auto it = images_.find(id);
  if (it == images_.end()) return {Err::NoSuchImage, id};
  Key32 content_key = rng.key32();
  it->second.enc.wrapped = true;
  it->second.enc.wrapped_content_key =
      crypto::secretbox_wrap(key, content_key, rng);
  it->second.enc.unlocked = false;
  return ok();
}

Result<void> ImageCatalog::unlock_image(const std::string& id,
                                        const Key32& key) {
  auto it = images_.find(id);
  if (it == images_.end()) return {Err::NoSuchImage, id};
  if (!it->second.enc.wrapped) return {Err::NotEncrypted, id};
  if (it->second.enc.unlocked) return ok();
  auto content = crypto::secretbox_unwrap(key, it->second.enc.wrapped_content_key);
  if (!content) return {Err::UnlockFailed, id};
  it->second.enc.unlocked = true;
  return ok();
}

Result<void> ImageCatalog::attach_boot_target(const std::string& node,
                                              const std::string& image) {
  if (targets_.count(node)) return {Err::AlreadyAttached, node};
  if (!images_.count(image)) return {Err::NoSuchImage, image};
  targets_[node] = image;
  trace_.emit(node, "-", EventKind::AttachTarget, "image:" + image);
  return ok();
}

Result<void> ImageCatalog::detach_boot_target(const std::string& node) {
  auto it = targets_.find(node);
  if (it == targets_.end()) return ok();  // already detached: no-op
  trace_.emit(node, "-", EventKind::DetachTarget, "image:" + it->second);
  targets_.erase(it);
  return ok();
}

std::optional<std::string> ImageCatalog::attached_image(
    const std::string& node) const {
  auto it = targets_.find(node);
  if (it == targets_.end()) return std::nullopt;
  return it->second;
}

uint64_t ImageCatalog::block_count(const std::string& image) const {
  auto it = images_.find(image);
  if (it == images_.end()) return 0;
  return (it->second.length + block_size_ - 1) / block_size_;
}

size_t ImageCatalog::own_block_count(const std::string& image) const {
  auto it = images_.find(image);
  if (it == images_.end()) return 0;
  return layers_.at(it->second.top_layer).blocks.size();
}

Result<Bytes> ImageCatalog::read_block_of(const std::string& image,
                                          uint64_t index) const {
  auto it = images_.find(image);
  if (it == images_.end()) return {Err::NoSuchImage, image};
  const Image& img = it->second;
  if (img.enc.wrapped && !img.enc.unlocked) return {Err::ImageLocked, image};
  if (index >= block_count(image)) return {Err::OutOfRange, image};
  // Nearest layer owning the block wins; zero-fill past the root.
  std::optional<uint64_t> layer = img.top_layer;
  while (layer) {
    const Layer& l = layers_.at(*layer);
    auto bit = l.blocks.find(index);
    if (bit != l.blocks.end()) return bit->second;
    layer = l.parent;
  }
  return Bytes(block_size_, 0);
}

Result<Bytes> ImageCatalog::read_block(const std::string& node,
                                       uint64_t index) const {
  auto it = targets_.find(node);
  if (it == targets_.end()) return {Err::NotAttached, node};
  return read_block_of(it->second, index);
}

Result<void> ImageCatalog::write_block(const std::string& node, uint64_t index,
                                       std::span<const uint8_t> data) {
  auto it = targets_.find(node);
  if (it == targets_.end()) return {Err::NotAttached, node};
  Image& img = images_.at(it->second);
  if (img.frozen) return {Err::FrozenImage, img.id};
  if (img.enc.wrapped && !img.enc.unlocked) return {Err::ImageLocked, img.id};
  if (index >= block_count(img.id)) return {Err::OutOfRange, img.id};
  if (data.size() > block_size_) return {Err::OutOfRange, "oversized block"};
  Bytes block(block_size_, 0);
  std::copy(data.begin(), data.end(), block.begin());
  layers_.at(img.top_layer).blocks[index] = std::move(block);
  return ok();
}

const ImageCatalog::Image* ImageCatalog::image(const std::string& id) const {
  auto it = images_.find(id);
  return it == images_.end() ? nullptr : &it->second;
}

void ImageCatalog::restore_image(Image img) { images_[img.id] = std::move(img); }

void ImageCatalog::restore_layer(uint64_t id, Layer layer) {
  layers_[id] = std::move(layer);
}

void ImageCatalog::restore_target(const std::string& node,
                                  const std::string& image) {
  targets_[node] = image;
}

void ImageCatalog::restore_counters(uint64_t image_counter,
                                    uint64_t layer_counter) {
  image_counter_ = image_counter;
  layer_counter_ = layer_counter;
}

}  // namespace airlock::provision
