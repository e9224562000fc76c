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

// Persistent trixel-partitioned catalog.
//
// A catalog is a directory holding immutable versions:
//
//   <root>/CURRENT             name of the published version
//   <root>/v00000003/meta.txt  CatalogMeta as key=value text
//   <root>/v00000003/ids.bin   sorted obj_ids, u64 little-endian
//   <root>/v00000003/c<id>.skya   one container per non-empty storage trixel
//
// Loads build the next version beside the current one (unchanged containers
// are hard-linked) and publish it by renaming CURRENT, so readers always see
// a complete version and a failed load leaves the catalog untouched.

#ifndef SKYQ_CATALOG_H_
#define SKYQ_CATALOG_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skyq/container_format.h"
#include "skyq/htm.h"
#include "skyq/record.h"

namespace skyq {

inline constexpr int kDefaultStorageDepth = 4;

struct CatalogMeta {
  int format_version = kFormatVersion;
  Schema schema;
  int storage_depth = kDefaultStorageDepth;
  std::uint64_t version = 0;
  std::uint64_t total = 0;
  std::map<TrixelId, std::uint64_t> container_counts;
  // Counts at storage_depth + 2, used for selectivity estimates.
  TrixelCounts fine_counts;
  std::vector<std::string> load_history;

  int count_depth() const { return fine_counts.level(); }
  std::string ToText() const;
  static CatalogMeta FromText(const std::string& text, const std::string& source);
};

// Objects parsed from one ingest file.
struct Chunk {
  std::string source;
  std::vector<SkyObject> objects;
};

// Parses an ingest CSV with header
//   obj_id,ra_deg,dec_deg,u,g,r,i,z,size_arcsec,class[,extra...]
// and returns the chunk plus the extra column names. Throws ParseError
// (line number, column 1) on malformed rows, DomainError-derived messages
// are rethrown as ParseError with the line.
Chunk ReadCsvChunk(const std::filesystem::path& path, Schema* schema_out);
Chunk ParseCsvChunk(const std::string& text, const std::string& source, Schema* schema_out);

struct LoadReport {
  std::uint64_t objects_loaded = 0;
  // Container -> number of times it was opened for writing during the load.
  std::map<TrixelId, int> touches;
  std::chrono::duration<double> duration{0};

  std::size_t containers_touched() const { return touches.size(); }
};

struct CatalogStats {
  std::uint64_t total = 0;
  std::map<TrixelId, std::uint64_t> container_counts;
  std::array<double, kNumBands> mag_min{}, mag_max{};
  double size_min = 0, size_max = 0;
};

class Catalog {
 public:
  // Creates an empty catalog. Throws ConflictError if `root` already holds one.
  static Catalog Create(const std::filesystem::path& root, const Schema& schema,
                        int storage_depth = kDefaultStorageDepth);
  // Opens the published version. Throws IoError if absent.
  static Catalog Open(const std::filesystem::path& root);
  static bool Exists(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  const std::filesystem::path& version_dir() const { return version_dir_; }
  const CatalogMeta& meta() const { return meta_; }
  const Schema& schema() const { return meta_.schema; }
  int storage_depth() const { return meta_.storage_depth; }

  // Non-empty containers in id order.
  std::vector<TrixelId> Containers() const;
  std::filesystem::path ContainerPath(TrixelId id) const;
  ContainerReader OpenContainer(TrixelId id, IoCounters* counters = nullptr) const;

  // Two-phase single-pass load. Throws ConflictError on duplicate obj_id and
  // DomainError on a schema mismatch; the catalog is unchanged on failure.
  LoadReport Ingest(const Chunk& chunk);

  // Re-reads CURRENT (picks up loads published by another handle).
  void Refresh();

 private:
  Catalog(std::filesystem::path root, std::filesystem::path version_dir, CatalogMeta meta)
      : root_(std::move(root)), version_dir_(std::move(version_dir)), meta_(std::move(meta)) {}

  std::filesystem::path root_;
  std::filesystem::path version_dir_;
  CatalogMeta meta_;
};

// Finalizer of splitmix64:
//   z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//   z ^= z >> 27; z *= 0x94d049bb133111eb;
//   z ^= z >> 31;
std::uint64_t Mix64(std::uint64_t z);
// An object is sampled iff Mix64(obj_id ^ seed) / 2^64 < fraction.
bool SampleKeeps(std::uint64_t obj_id, double fraction, std::uint64_t seed);

// Writes a complete derived catalog at `dest` holding the sampled objects.
// Deterministic for fixed (fraction, seed). Throws DomainError unless
// fraction is in (0, 1].
Catalog Sample(const Catalog& source, const std::filesystem::path& dest, double fraction,
               std::uint64_t seed);

// Per-container counts and attribute ranges, cross-checked against the
// container headers and the meta totals. Throws IntegrityError naming the
// offending file.
CatalogStats Stats(const Catalog& catalog);

// Full consistency audit: every tag record equals its full record, every
// object sits in the container Locate() assigns it, records are in
// container order and ids.bin matches the stored ids. Throws IntegrityError.
void Audit(const Catalog& catalog);

}  // namespace skyq

#endif  // SKYQ_CATALOG_H_
