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

#include "skyq/record.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace skyq {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view ClassName(ObjectClass c) {
  switch (c) {
    case ObjectClass::kStar:
      return "STAR";
    case ObjectClass::kGalaxy:
      return "GALAXY";
    case ObjectClass::kQso:
      return "QSO";
    case ObjectClass::kUnknown:
      return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::optional<ObjectClass> ParseClass(std::string_view s) {
  const std::string l = Lower(s);
  if (l == "star") return ObjectClass::kStar;
  if (l == "galaxy") return ObjectClass::kGalaxy;
  if (l == "qso") return ObjectClass::kQso;
  if (l == "unknown") return ObjectClass::kUnknown;
  return std::nullopt;
}

TagRecord MakeTag(const SkyObject& obj, TrixelId home) {
  TagRecord t;
  t.obj_id = obj.obj_id;
  t.x = obj.pos.x();
  t.y = obj.pos.y();
  t.z = obj.pos.z();
  t.mag = obj.mag;
  t.size_arcsec = obj.size_arcsec;
  t.cls = obj.cls;
  t.home_trixel = home;
  return t;
}

bool TagMatches(const TagRecord& tag, const SkyObject& obj) {
  return tag.obj_id == obj.obj_id && tag.x == obj.pos.x() && tag.y == obj.pos.y() &&
         tag.z == obj.pos.z() && tag.mag == obj.mag && tag.size_arcsec == obj.size_arcsec &&
         tag.cls == obj.cls;
}

std::uint64_t Schema::Hash() const {
  // FNV-1a over the newline-terminated names.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& name : extras) {
    for (char c : name) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

const std::vector<std::string>& CoreAttributeNames() {
  static const std::vector<std::string> names = {"obj_id", "ra", "dec", "cx", "cy", "cz", "u",
                                                 "g",      "r",  "i",   "z",  "size", "class"};
  return names;
}

std::optional<AttributeRef> ResolveAttribute(const Schema& schema, std::string_view name) {
  using K = AttributeRef::Kind;
  const std::string l = Lower(name);
  if (l == "obj_id") return AttributeRef{K::kObjId, 0};
  if (l == "ra") return AttributeRef{K::kRa, 0};
  if (l == "dec") return AttributeRef{K::kDec, 0};
  if (l == "cx") return AttributeRef{K::kCx, 0};
  if (l == "cy") return AttributeRef{K::kCy, 0};
  if (l == "cz") return AttributeRef{K::kCz, 0};
  for (int b = 0; b < kNumBands; ++b) {
    if (l == kBandNames[b]) return AttributeRef{K::kMag, b};
  }
  if (l == "size" || l == "size_arcsec") return AttributeRef{K::kSize, 0};
  if (l == "class") return AttributeRef{K::kClass, 0};
  for (std::size_t i = 0; i < schema.extras.size(); ++i) {
    if (schema.extras[i] == name) return AttributeRef{K::kExtra, static_cast<int>(i)};
  }
  return std::nullopt;
}

std::string AttributeName(const Schema& schema, const AttributeRef& ref) {
  using K = AttributeRef::Kind;
  switch (ref.kind) {
    case K::kObjId:
      return "obj_id";
    case K::kRa:
      return "ra";
    case K::kDec:
      return "dec";
    case K::kCx:
      return "cx";
    case K::kCy:
      return "cy";
    case K::kCz:
      return "cz";
    case K::kMag:
      return kBandNames[ref.index];
    case K::kSize:
      return "size";
    case K::kClass:
      return "class";
    case K::kExtra:
      return schema.extras.at(ref.index);
  }
  return "?";
}

double AttributeValue(const SkyObject& obj, const AttributeRef& ref) {
  using K = AttributeRef::Kind;
  switch (ref.kind) {
    case K::kObjId:
      return static_cast<double>(obj.obj_id);
    case K::kRa:
      return ToLonLat(obj.pos).lon_deg;
    case K::kDec:
      return ToLonLat(obj.pos).lat_deg;
    case K::kCx:
      return obj.pos.x();
    case K::kCy:
      return obj.pos.y();
    case K::kCz:
      return obj.pos.z();
    case K::kMag:
      return obj.mag[ref.index];
    case K::kSize:
      return obj.size_arcsec;
    case K::kClass:
      return static_cast<double>(obj.cls);
    case K::kExtra:
      if (static_cast<std::size_t>(ref.index) < obj.extras.size()) return obj.extras[ref.index];
      return std::numeric_limits<double>::quiet_NaN();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace skyq
