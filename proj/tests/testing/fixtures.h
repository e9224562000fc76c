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

// Synthetic catalogs and scratch directories for tests and benchmarks.

#ifndef SKYQ_TESTING_FIXTURES_H_
#define SKYQ_TESTING_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "skyq/catalog.h"
#include "skyq/htm.h"
#include "skyq/record.h"
#include "skyq/sphere.h"

namespace skyq::testing {

using Rng = std::mt19937_64;

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

UnitVec RandomUnitVec(Rng& rng);
// Uniform point within `radius_rad` of `center`.
UnitVec RandomPointNear(Rng& rng, const UnitVec& center, double radius_rad);
// Point inside trixel `t`, strictly away from its edges.
UnitVec RandomPointInTrixel(Rng& rng, const Trixel& t);
// Offset `from` by `sep_rad` along a random bearing.
UnitVec Offset(Rng& rng, const UnitVec& from, double sep_rad);

Schema MakeSchema(int extras);

// Random magnitudes in [14, 24], size in [0, 5], any class, extras random.
SkyObject RandomObject(Rng& rng, std::uint64_t id, const UnitVec& pos, int extras = 0);

std::vector<SkyObject> UniformObjects(std::size_t n, std::uint64_t seed, int extras = 0,
                                      std::uint64_t first_id = 1);
// Half uniform, half in Gaussian-ish clumps of about `clump_arcsec`.
std::vector<SkyObject> ClusteredObjects(std::size_t n, std::uint64_t seed, int clumps,
                                        double clump_arcsec, std::uint64_t first_id = 1);

// Creates a catalog and ingests `objects` in chunks of `chunk_size`.
Catalog BuildCatalog(const std::filesystem::path& root, const Schema& schema,
                     const std::vector<SkyObject>& objects, int depth = 4,
                     std::size_t chunk_size = 0);

// Ingest CSV text for `objects`.
std::string ToCsv(const std::vector<SkyObject>& objects, const Schema& schema);

// One of: cap (0.1 to 30 deg), latitude band in a random built-in frame,
// a convex of up to 4 half-spaces, or the union of two of those.
Region RandomRegion(Rng& rng);

}  // namespace skyq::testing

#endif  // SKYQ_TESTING_FIXTURES_H_
