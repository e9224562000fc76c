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

// Catalog records and attribute resolution.

#ifndef SKYQ_RECORD_H_
#define SKYQ_RECORD_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skyq/htm.h"
#include "skyq/sphere.h"

namespace skyq {

enum class ObjectClass : std::uint8_t { kStar = 0, kGalaxy = 1, kQso = 2, kUnknown = 3 };

std::string_view ClassName(ObjectClass c);
// Case-insensitive STAR/GALAXY/QSO/UNKNOWN.
std::optional<ObjectClass> ParseClass(std::string_view s);

enum Band : int { kU = 0, kG = 1, kR = 2, kI = 3, kZ = 4 };
inline constexpr int kNumBands = 5;
inline constexpr std::array<const char*, kNumBands> kBandNames = {"u", "g", "r", "i", "z"};

// Full catalog record. `extras` follows the catalog schema; it is empty for
// records read through the tag projection.
struct SkyObject {
  std::uint64_t obj_id = 0;
  UnitVec pos;
  std::array<double, kNumBands> mag{};
  double size_arcsec = 0;
  ObjectClass cls = ObjectClass::kUnknown;
  std::vector<double> extras;

  double Color(int band) const { return mag[band] - mag[band + 1]; }
  bool operator==(const SkyObject&) const = default;
};

// Vertical partition holding the ten most-queried attributes.
struct TagRecord {
  std::uint64_t obj_id = 0;
  double x = 0, y = 0, z = 0;
  std::array<double, kNumBands> mag{};
  double size_arcsec = 0;
  ObjectClass cls = ObjectClass::kUnknown;
  TrixelId home_trixel;

  bool operator==(const TagRecord&) const = default;
};

TagRecord MakeTag(const SkyObject& obj, TrixelId home);
// Tag fields of `obj` equal `tag` field for field.
bool TagMatches(const TagRecord& tag, const SkyObject& obj);

enum class Projection { kTag, kFull };

// Names of the per-record extra attributes, in storage order.
struct Schema {
  std::vector<std::string> extras;

  std::uint64_t Hash() const;
  bool operator==(const Schema&) const = default;
};

// A resolved attribute reference. Core attributes live in the tag record;
// extras only in the full record.
struct AttributeRef {
  enum class Kind {
    kObjId, kRa, kDec, kCx, kCy, kCz, kMag, kSize, kClass, kExtra
  };
  Kind kind = Kind::kObjId;
  int index = 0;  // band for kMag, position for kExtra

  bool IsTag() const { return kind != Kind::kExtra; }
  bool IsNumeric() const { return kind != Kind::kClass; }
  bool operator==(const AttributeRef&) const = default;
};

// Core attribute names: obj_id ra dec cx cy cz u g r i z size class.
const std::vector<std::string>& CoreAttributeNames();
std::optional<AttributeRef> ResolveAttribute(const Schema& schema, std::string_view name);
std::string AttributeName(const Schema& schema, const AttributeRef& ref);
// Numeric value; kClass yields the class code. Extras read as NaN when the
// record was loaded through the tag projection.
double AttributeValue(const SkyObject& obj, const AttributeRef& ref);

}  // namespace skyq

#endif  // SKYQ_RECORD_H_
