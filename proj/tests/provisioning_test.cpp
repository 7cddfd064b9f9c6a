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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>

#include "doctest.h"
#include "provisioning.hpp"

using namespace airlock;
using namespace airlock::provision;

namespace {

Key32 key_from(uint8_t fill) {
  Key32 k;
  k.fill(fill);
  return k;
}

Bytes patterned(size_t n, uint8_t base) {
  Bytes out(n);
  for (size_t i = 0; i < n; ++i) out[i] = static_cast<uint8_t>(base + i);
  return out;
}

// Flat-array oracle: every image is a fully materialized byte array; clone
// copies it wholesale. The COW implementation must match byte for byte.
struct FlatOracle {
  uint64_t block_size;
  std::map<std::string, Bytes> images;

  void create(const std::string& id, const Bytes& content) {
    size_t blocks = (content.size() + block_size - 1) / block_size;
    Bytes flat(blocks * block_size, 0);
    std::copy(content.begin(), content.end(), flat.begin());
    images[id] = std::move(flat);
  }
  void clone(const std::string& parent, const std::string& id) {
    images[id] = images.at(parent);
  }
  void write(const std::string& id, uint64_t index, const Bytes& block) {
    Bytes padded(block_size, 0);
    std::copy(block.begin(), block.end(), padded.begin());
    std::copy(padded.begin(), padded.end(),
              images.at(id).begin() + index * block_size);
  }
  Bytes read(const std::string& id, uint64_t index) const {
    const Bytes& flat = images.at(id);
    return Bytes(flat.begin() + index * block_size,
                 flat.begin() + (index + 1) * block_size);
  }
};

}  // namespace

TEST_CASE("create and read back") {
  TraceCollector trace;
  ImageCatalog cat(trace, 4096);
  Bytes content = patterned(8192, 3);
  auto id = cat.create_image(content, "base");
  REQUIRE(id);
  CHECK(cat.block_count("base") == 2);
  auto b1 = cat.read_block_of("base", 1);
  REQUIRE(b1);
  CHECK(b1.value() == Bytes(content.begin() + 4096, content.end()));
  auto oob = cat.read_block_of("base", 2);
  CHECK_FALSE(oob);
  CHECK(oob.error() == Err::OutOfRange);
  CHECK_FALSE(cat.clone_image("missing"));
}

TEST_CASE("clone is O(1) metadata: zero owned blocks at creation") {
  TraceCollector trace;
  ImageCatalog cat(trace, 512);
  REQUIRE(cat.create_image(patterned(4096, 1), "base"));
  auto clone = cat.clone_image("base");
  REQUIRE(clone);
  CHECK(cat.own_block_count(clone.value()) == 0);
  for (uint64_t i = 0; i < cat.block_count("base"); ++i) {
    CHECK(cat.read_block_of(clone.value(), i).value() ==
          cat.read_block_of("base", i).value());
  }
}

TEST_CASE("clone writes never touch the parent") {
  TraceCollector trace;
  ImageCatalog cat(trace, 512);
  REQUIRE(cat.create_image(patterned(2048, 7), "base"));
  Bytes original = cat.read_block_of("base", 3).value();
  auto clone = cat.clone_image("base");
  REQUIRE(clone);
  REQUIRE(cat.attach_boot_target("node", clone.value()));
  REQUIRE(cat.write_block("node", 3, patterned(512, 0x80)));
  CHECK(cat.read_block("node", 3).value() == patterned(512, 0x80));
  CHECK(cat.read_block_of("base", 3).value() == original);
}

TEST_CASE("clone snapshots at clone time") {
  TraceCollector trace;
  ImageCatalog cat(trace, 512);
  REQUIRE(cat.create_image(patterned(2048, 1), "base"));
  auto c1 = cat.clone_image("base");
  REQUIRE(c1);

  // c2 cloned from c1 BEFORE c1 writes: the write stays invisible to c2.
  auto c2 = cat.clone_image(c1.value());
  REQUIRE(c2);
  REQUIRE(cat.attach_boot_target("n1", c1.value()));
  REQUIRE(cat.write_block("n1", 0, patterned(512, 0x99)));
  CHECK(cat.read_block_of(c2.value(), 0).value() ==
        cat.read_block_of("base", 0).value());

  // c3 cloned from c1 AFTER the write: it sees the write.
  auto c3 = cat.clone_image(c1.value());
  REQUIRE(c3);
  CHECK(cat.read_block_of(c3.value(), 0).value() == patterned(512, 0x99));
  // ...and a later write to c1 is not visible to c3 either.
  REQUIRE(cat.write_block("n1", 1, patterned(512, 0x42)));
  CHECK(cat.read_block_of(c3.value(), 1).value() ==
        cat.read_block_of("base", 1).value());
}

TEST_CASE("delete honors clones and attachments") {
  TraceCollector trace;
  ImageCatalog cat(trace, 512);
  REQUIRE(cat.create_image(patterned(1024, 1), "base"));
  auto clone = cat.clone_image("base");
  REQUIRE(clone);

  auto blocked = cat.delete_image("base");
  CHECK_FALSE(blocked);
  CHECK(blocked.error() == Err::HasClones);

  REQUIRE(cat.attach_boot_target("node", clone.value()));
  auto in_use = cat.delete_image(clone.value());
  CHECK_FALSE(in_use);
  CHECK(in_use.error() == Err::InUse);

  REQUIRE(cat.detach_boot_target("node"));
  REQUIRE(cat.delete_image(clone.value()));   // detached leaf clone
  REQUIRE(cat.delete_image("base"));
  CHECK(cat.images().empty());
  CHECK(cat.layers().empty());  // layer store fully collected
}

TEST_CASE("attach/detach session rules") {
  TraceCollector trace;
  ImageCatalog cat(trace, 512);
  REQUIRE(cat.create_image(patterned(1024, 1), "base"));
  REQUIRE(cat.create_image(patterned(1024, 2), "other"));
  REQUIRE(cat.attach_boot_target("node", "base"));
  auto dbl = cat.attach_boot_target("node", "other");
  CHECK_FALSE(dbl);
  CHECK(dbl.error() == Err::AlreadyAttached);
  REQUIRE(cat.detach_boot_target("node"));
  REQUIRE(cat.detach_boot_target("node"));  // no-op
  auto unattached = cat.read_block("node", 0);
  CHECK_FALSE(unattached);
  CHECK(unattached.error() == Err::NotAttached);
}

TEST_CASE("successor tenants see base content, not prior writes") {
  TraceCollector trace;
  ImageCatalog cat(trace, 512);
  Bytes base_content = patterned(2048, 5);
  REQUIRE(cat.create_image(base_content, "base"));

  auto first = cat.clone_image("base");
  REQUIRE(first);
  REQUIRE(cat.attach_boot_target("node", first.value()));
  REQUIRE(cat.write_block("node", 2, patterned(512, 0xEE)));
  REQUIRE(cat.detach_boot_target("node"));

  auto second = cat.clone_image("base");
  REQUIRE(second);
  REQUIRE(cat.attach_boot_target("node", second.value()));
  for (uint64_t i = 0; i < 4; ++i)
    CHECK(cat.read_block("node", i).value() ==
          cat.read_block_of("base", i).value());
}

TEST_CASE("last write wins; short writes are zero-padded") {
  TraceCollector trace;
  ImageCatalog cat(trace, 512);
  REQUIRE(cat.create_image(patterned(1024, 1), "base"));
  REQUIRE(cat.attach_boot_target("node", "base"));
  REQUIRE(cat.write_block("node", 1, patterned(512, 0x10)));
  REQUIRE(cat.write_block("node", 1, patterned(100, 0x20)));
  Bytes expect(512, 0);
  std::copy_n(patterned(100, 0x20).begin(), 100, expect.begin());
  CHECK(cat.read_block("node", 1).value() == expect);
  auto oob = cat.write_block("node", 9, patterned(512, 1));
  CHECK_FALSE(oob);
  CHECK(oob.error() == Err::OutOfRange);
}

TEST_CASE("snapshots are frozen clones") {
  TraceCollector trace;
  ImageCatalog cat(trace, 512);
  REQUIRE(cat.create_image(patterned(1024, 1), "base"));
  auto snap = cat.snapshot_image("base");
  REQUIRE(snap);
  REQUIRE(cat.attach_boot_target("node", snap.value()));
  auto refused = cat.write_block("node", 0, patterned(512, 2));
  CHECK_FALSE(refused);
  CHECK(refused.error() == Err::FrozenImage);
  CHECK(cat.read_block("node", 0).value() ==
        cat.read_block_of("base", 0).value());
}

TEST_CASE("encrypted images gate block access on the enclave key") {
  TraceCollector trace;
  crypto::Rng rng(11);
  ImageCatalog cat(trace, 512);
  REQUIRE(cat.create_image(patterned(1024, 9), "secret"));

  auto not_enc = cat.unlock_image("secret", key_from(1));
  CHECK_FALSE(not_enc);
  CHECK(not_enc.error() == Err::NotEncrypted);

  Key32 tenant_share = key_from(0xaa);
  Key32 verifier_share = key_from(0x31);
  Key32 k = xor_keys(tenant_share, verifier_share);
  REQUIRE(cat.wrap_image("secret", k, rng));

  auto locked = cat.read_block_of("secret", 0);
  CHECK_FALSE(locked);
  CHECK(locked.error() == Err::ImageLocked);

  Key32 wrong = k;
  wrong[7] ^= 0x01;  // one flipped bit
  auto bad = cat.unlock_image("secret", wrong);
  CHECK_FALSE(bad);
  CHECK(bad.error() == Err::UnlockFailed);

  REQUIRE(cat.unlock_image("secret", k));
  REQUIRE(cat.unlock_image("secret", k));  // already unlocked: no-op
  CHECK(cat.read_block_of("secret", 0).value() ==
        Bytes(patterned(512, 9)));
}

TEST_CASE("random scripts match the flat-array oracle on deep chains") {
  crypto::Rng rng(20177);
  for (int trial = 0; trial < 25; ++trial) {
    TraceCollector trace;
    uint64_t bs = 256;
    ImageCatalog cat(trace, bs);
    FlatOracle oracle{bs, {}};

    Bytes content = rng.bytes(bs * 6);
    REQUIRE(cat.create_image(content, "base"));
    oracle.create("base", content);

    std::vector<std::string> ids{"base"};
    std::map<std::string, int> depth{{"base", 0}};

    for (int op = 0; op < 200; ++op) {
      switch (rng.pick(3)) {
        case 0: {  // clone something shallow enough
          const std::string& parent = ids[rng.pick(ids.size())];
          if (depth[parent] >= 3) break;
          auto c = cat.clone_image(parent);
          REQUIRE(c);
          oracle.clone(parent, c.value());
          depth[c.value()] = depth[parent] + 1;
          ids.push_back(c.value());
          break;
        }
        case 1: {  // write one block through a transient session
          const std::string& id = ids[rng.pick(ids.size())];
          uint64_t index = rng.pick(6);
          Bytes block = rng.bytes(bs);
          REQUIRE(cat.attach_boot_target("rw", id));
          REQUIRE(cat.write_block("rw", index, block));
          REQUIRE(cat.detach_boot_target("rw"));
          oracle.write(id, index, block);
          break;
        }
        case 2: {  // read and compare
          const std::string& id = ids[rng.pick(ids.size())];
          uint64_t index = rng.pick(6);
          CHECK(cat.read_block_of(id, index).value() ==
                oracle.read(id, index));
          break;
        }
      }
    }
    // Full sweep at the end: every image, every block.
    for (const std::string& id : ids)
      for (uint64_t i = 0; i < 6; ++i)
        CHECK(cat.read_block_of(id, i).value() == oracle.read(id, i));
  }
}
