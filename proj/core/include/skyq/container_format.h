// Copyright 2026 The skyq Authors.
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

// Container file encoding.
//
// Layout (all little-endian):
//
//   "SKYA"            4 bytes magic
//   format version    u16
//   trixel id         u64
//   record count      u64
//   tag section len   u64   (= count * kTagRecordSize)
//   schema hash       u64
//   tag records       count * kTagRecordSize
//   tag CRC32         u32   (over the tag records)
//   full records      count * FullRecordSize(schema)
//   full CRC32        u32   (over the full records)
//
// Tag record (96 bytes): obj_id u64, x y z f64, u g r i z f64, size f64,
// home trixel u64, class u8, 7 reserved zero bytes.
// Full record: obj_id u64, x y z f64, u g r i z f64, size f64, class u8,
// 7 reserved zero bytes, then one f64 per schema extra.
//
// The tag section precedes the full section so a tag-only scan reads a
// prefix of the file.

#ifndef SKYQ_CONTAINER_FORMAT_H_
#define SKYQ_CONTAINER_FORMAT_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "skyq/htm.h"
#include "skyq/record.h"

namespace skyq {

inline constexpr char kContainerMagic[4] = {'S', 'K', 'Y', 'A'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kContainerHeaderSize = 4 + 2 + 8 + 8 + 8 + 8;
inline constexpr std::size_t kTagRecordSize = 96;
inline constexpr std::size_t kCrcSize = 4;

inline std::size_t FullRecordSize(const Schema& schema) { return 88 + 8 * schema.extras.size(); }

struct ContainerHeader {
  std::uint16_t version = kFormatVersion;
  TrixelId trixel;
  std::uint64_t count = 0;
  std::uint64_t tag_bytes = 0;
  std::uint64_t schema_hash = 0;
};

// Byte counters shared by concurrent readers.
struct IoCounters {
  std::atomic<std::uint64_t> containers_opened{0};
  std::atomic<std::uint64_t> header_bytes{0};
  std::atomic<std::uint64_t> tag_bytes{0};
  std::atomic<std::uint64_t> full_bytes{0};

  std::uint64_t TotalBytes() const { return header_bytes + tag_bytes + full_bytes; }
};

// Serializes `objects` (already in container order) into a complete file image.
std::vector<std::byte> EncodeContainer(TrixelId trixel, const Schema& schema,
                                       std::span<const SkyObject> objects,
                                       std::span<const TrixelId> homes);

// Reads one container file. Throws IntegrityError naming the file on bad
// magic, version, schema hash, sizes or checksum; IoError when unreadable.
class ContainerReader {
 public:
  ContainerReader(std::filesystem::path path, const Schema& schema, IoCounters* counters);

  const ContainerHeader& header() const { return header_; }
  const std::filesystem::path& path() const { return path_; }

  std::vector<TagRecord> ReadTags();
  std::vector<SkyObject> ReadFull();
  // Tag records converted to SkyObjects with empty extras.
  std::vector<SkyObject> Read(Projection projection);

 private:
  std::vector<std::byte> ReadSection(std::uint64_t offset, std::uint64_t length, bool tag);

  std::filesystem::path path_;
  const Schema& schema_;
  IoCounters* counters_;
  ContainerHeader header_;
  std::uint64_t file_size_ = 0;
};

std::uint32_t Crc32(std::span<const std::byte> data);

}  // namespace skyq

#endif  // SKYQ_CONTAINER_FORMAT_H_
