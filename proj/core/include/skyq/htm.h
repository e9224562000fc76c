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

// Hierarchical triangular mesh over the unit sphere.
//
// The eight faces of the octahedron are recursively split into four
// spherical triangles ("trixels"). Ids encode the quad-tree directly:
//
//   base trixels          S0..S3 = 8..11, N0..N3 = 12..15
//   child i of trixel t   4 * t + i
//   level(id)             (bit_length(id) - 4) / 2
//
// so the descendants of t at k levels below form the contiguous id range
// [t * 4^k, (t + 1) * 4^k).

#ifndef SKYQ_HTM_H_
#define SKYQ_HTM_H_

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skyq/sphere.h"

namespace skyq {

inline constexpr int kMaxLevel = 24;

class TrixelId {
 public:
  constexpr TrixelId() = default;
  constexpr explicit TrixelId(std::uint64_t value) : value_(value) {}

  constexpr std::uint64_t value() const { return value_; }
  bool valid() const;
  // Requires valid().
  int level() const;
  TrixelId parent() const { return TrixelId(value_ >> 2); }
  TrixelId child(int i) const { return TrixelId((value_ << 2) | static_cast<std::uint64_t>(i)); }
  // Ancestor (or self) at `level` <= level().
  TrixelId AncestorAt(int level) const;
  // Half-open id range of descendants at `level` >= level().
  std::pair<std::uint64_t, std::uint64_t> RangeAt(int level) const;
  bool IsAncestorOrSelfOf(TrixelId other) const;

  // "N3:012" style: base name, then child digits from level 1 down.
  std::string Name() const;
  // Accepts a decimal id or the Name() form. Throws DomainError.
  static TrixelId Parse(std::string_view text);

  constexpr auto operator<=>(const TrixelId&) const = default;

 private:
  std::uint64_t value_ = 0;
};

struct Trixel {
  TrixelId id;
  UnitVec v0, v1, v2;

  // Edge-plane test (vi x vj) . p >= -tolerance for the three directed edges.
  bool Contains(const UnitVec& p, double tolerance = 1e-15) const;
};

std::array<Trixel, 8> BaseTrixels();
std::array<Trixel, 4> Subdivide(const Trixel& t);
// Rebuilds corners by descending from the base trixel along the id digits.
// Throws DomainError for an invalid id.
Trixel TrixelFromId(TrixelId id);
// Total: every unit vector maps to exactly one id per level. Ties go to the
// first containing candidate in child order. Throws DomainError for level
// outside [0, kMaxLevel].
TrixelId Locate(const UnitVec& p, int level);
// The trixel Locate() picks, with its corners.
Trixel LocateTrixel(const UnitVec& p, int level);

// Spherical excess A + B + C - pi, steradians.
double TrixelSolidAngle(const Trixel& t);
// Smallest inscribed-circle radius (radians) over all trixels at `level`.
double MinInradius(int level);

enum class Verdict { kReject, kPartial, kFull };

// Exact FULL/REJECT classification of a trixel against a region; PARTIAL is
// returned whenever the trixel may straddle the boundary.
Verdict ClassifyTrixel(const Region& region, const Trixel& t);

struct Coverage {
  std::vector<TrixelId> full;
  std::vector<TrixelId> partial;
  int level = 0;

  bool empty() const { return full.empty() && partial.empty(); }
};

// Recursive descent from the base trixels: FULL nodes are recorded without
// descent, REJECT nodes are dropped, PARTIAL nodes recurse until `level`.
Coverage Classify(const Region& region, int level);

// Object counts per trixel at one fixed level.
class TrixelCounts {
 public:
  TrixelCounts() = default;
  explicit TrixelCounts(int level) : level_(level) {}

  int level() const { return level_; }
  void Add(TrixelId id, std::uint64_t n);
  const std::map<std::uint64_t, std::uint64_t>& entries() const { return counts_; }
  std::uint64_t Total() const;
  // Objects under `id`. Throws DomainError when `id` is finer than level().
  std::uint64_t CountUnder(TrixelId id) const;

 private:
  int level_ = 0;
  std::map<std::uint64_t, std::uint64_t> counts_;
};

struct SelectivityEstimate {
  std::uint64_t min = 0;
  double expected = 0;
  std::uint64_t max = 0;
};

// min counts FULL trixels, max adds every PARTIAL trixel, expected adds
// `partial_fraction` of the partial counts.
SelectivityEstimate EstimateSelectivity(const Coverage& coverage, const TrixelCounts& counts,
                                        double partial_fraction = 0.5);

}  // namespace skyq

template <>
struct std::hash<skyq::TrixelId> {
  std::size_t operator()(const skyq::TrixelId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value());
  }
};

#endif  // SKYQ_HTM_H_
