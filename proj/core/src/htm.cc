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

#include "skyq/htm.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <mutex>

#include "skyq/error.h"

namespace skyq {

namespace {

// Boundary slack for classification. Anything this close to a constraint
// boundary is reported PARTIAL, never FULL or REJECT.
constexpr double kMargin = 1e-12;

const char* const kBaseNames[8] = {"S0", "S1", "S2", "S3", "N0", "N1", "N2", "N3"};

std::array<Trixel, 8> MakeBaseTrixels() {
  const UnitVec a0 = UnitVec::Unchecked(0, 0, 1);
  const UnitVec a1 = UnitVec::Unchecked(1, 0, 0);
  const UnitVec a2 = UnitVec::Unchecked(0, 1, 0);
  const UnitVec a3 = UnitVec::Unchecked(-1, 0, 0);
  const UnitVec a4 = UnitVec::Unchecked(0, -1, 0);
  const UnitVec a5 = UnitVec::Unchecked(0, 0, -1);
  return {{
      {TrixelId(8), a1, a5, a2},
      {TrixelId(9), a2, a5, a3},
      {TrixelId(10), a3, a5, a4},
      {TrixelId(11), a4, a5, a1},
      {TrixelId(12), a1, a0, a4},
      {TrixelId(13), a4, a0, a3},
      {TrixelId(14), a3, a0, a2},
      {TrixelId(15), a2, a0, a1},
  }};
}

const std::array<Trixel, 8>& CachedBase() {
  static const std::array<Trixel, 8> base = MakeBaseTrixels();
  return base;
}

// Smallest of the three edge-plane values; positive inside.
double MinEdgeValue(const Trixel& t, const UnitVec& p) {
  return std::min({t.v0.Cross(t.v1).Dot(p.vec()), t.v1.Cross(t.v2).Dot(p.vec()),
                   t.v2.Cross(t.v0).Dot(p.vec())});
}

// Containment with the tolerance scaled to each edge's length, used for the
// conservative "is this point possibly inside" checks of classification.
bool MaybeContains(const Trixel& t, const Vec3& p) {
  const Vec3 e[3] = {t.v0.Cross(t.v1), t.v1.Cross(t.v2), t.v2.Cross(t.v0)};
  for (const auto& n : e) {
    if (n.Dot(p) < -kMargin * n.Norm()) return false;
  }
  return true;
}

// Whether the extremum of n.p along the great-circle arc a->b reaches the
// boundary n.p = d. `seek_min` looks at the minimum (arc endpoints are
// inside and we ask whether the arc dips out), otherwise the maximum.
bool ArcReachesBoundary(const Vec3& a, const Vec3& b, const HalfSpace& h, bool seek_min) {
  const double cos_theta = a.Dot(b);
  const Vec3 perp = b - a * cos_theta;
  const double perp_norm = perp.Norm();
  if (perp_norm == 0.0) return false;
  const Vec3 u = perp * (1.0 / perp_norm);
  const double theta = std::atan2(perp_norm, cos_theta);
  // n.p(t) = A cos t + B sin t = R cos(t - phi) along p(t) = a cos t + u sin t.
  const double big_a = h.normal.Dot(a);
  const double big_b = h.normal.Dot(u);
  const double r = std::hypot(big_a, big_b);
  double t = std::atan2(big_b, big_a);
  if (seek_min) t += kPi;
  t = std::fmod(t, 2 * kPi);
  if (t < 0) t += 2 * kPi;
  const bool in_arc = t <= theta + kMargin || t >= 2 * kPi - kMargin;
  if (!in_arc) return false;
  return seek_min ? (-r <= h.offset + kMargin) : (r >= h.offset - kMargin);
}

Verdict ClassifyHalfSpace(const HalfSpace& h, const Trixel& t) {
  int inside = 0, outside = 0;
  for (const UnitVec* v : {&t.v0, &t.v1, &t.v2}) {
    const double s = h.normal.Dot(*v) - h.offset;
    if (s > kMargin) {
      ++inside;
    } else if (s < -kMargin) {
      ++outside;
    } else {
      return Verdict::kPartial;
    }
  }
  if (inside != 3 && outside != 3) return Verdict::kPartial;

  const Vec3 corners[3] = {t.v0.vec(), t.v1.vec(), t.v2.vec()};
  const bool seek_min = inside == 3;
  for (int i = 0; i < 3; ++i) {
    if (ArcReachesBoundary(corners[i], corners[(i + 1) % 3], h, seek_min)) {
      return Verdict::kPartial;
    }
  }
  if (inside == 3) {
    // A hole (the complement cap) lying entirely inside the triangle.
    if (h.offset > -1.0 && MaybeContains(t, (-h.normal).vec())) return Verdict::kPartial;
    return Verdict::kFull;
  }
  // A cap lying entirely inside the triangle.
  if (h.offset <= 1.0 && MaybeContains(t, h.normal.vec())) return Verdict::kPartial;
  return Verdict::kReject;
}

Verdict ClassifyConvex(const Convex& c, const Trixel& t) {
  Verdict out = Verdict::kFull;
  for (const auto& h : c.constraints) {
    const Verdict v = ClassifyHalfSpace(h, t);
    if (v == Verdict::kReject) return Verdict::kReject;
    if (v == Verdict::kPartial) out = Verdict::kPartial;
  }
  return out;
}

void ClassifyRecursive(const Region& region, const Trixel& t, int level, Coverage& out) {
  switch (ClassifyTrixel(region, t)) {
    case Verdict::kReject:
      return;
    case Verdict::kFull:
      out.full.push_back(t.id);
      return;
    case Verdict::kPartial:
      if (t.id.level() >= level) {
        out.partial.push_back(t.id);
        return;
      }
      for (const auto& child : Subdivide(t)) ClassifyRecursive(region, child, level, out);
      return;
  }
}

double SphericalInradius(const Trixel& t) {
  const double a = AngularDistance(t.v1, t.v2);
  const double b = AngularDistance(t.v0, t.v2);
  const double c = AngularDistance(t.v0, t.v1);
  const double s = 0.5 * (a + b + c);
  const double tan_r =
      std::sqrt(std::sin(s - a) * std::sin(s - b) * std::sin(s - c) / std::sin(s));
  return std::atan(tan_r);
}

void CheckLevel(int level) {
  if (level < 0 || level > kMaxLevel) {
    throw DomainError("level " + std::to_string(level) + " outside [0, " +
                      std::to_string(kMaxLevel) + "]");
  }
}

}  // namespace

bool TrixelId::valid() const {
  if (value_ < 8) return false;
  const int bits = std::bit_width(value_);
  return bits % 2 == 0 && bits <= 4 + 2 * kMaxLevel;
}

int TrixelId::level() const { return (std::bit_width(value_) - 4) / 2; }

TrixelId TrixelId::AncestorAt(int lvl) const {
  return TrixelId(value_ >> (2 * (level() - lvl)));
}

std::pair<std::uint64_t, std::uint64_t> TrixelId::RangeAt(int lvl) const {
  const int shift = 2 * (lvl - level());
  return {value_ << shift, (value_ + 1) << shift};
}

bool TrixelId::IsAncestorOrSelfOf(TrixelId other) const {
  const int mine = level();
  const int theirs = other.level();
  return theirs >= mine && other.AncestorAt(mine) == *this;
}

std::string TrixelId::Name() const {
  if (!valid()) return "invalid(" + std::to_string(value_) + ")";
  const int lvl = level();
  std::string name = kBaseNames[(value_ >> (2 * lvl)) - 8];
  if (lvl == 0) return name;
  name += ':';
  for (int i = lvl - 1; i >= 0; --i) {
    name += static_cast<char>('0' + ((value_ >> (2 * i)) & 3));
  }
  return name;
}

TrixelId TrixelId::Parse(std::string_view text) {
  auto fail = [&]() -> TrixelId {
    throw DomainError("invalid trixel id '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();
  if (text[0] == 'N' || text[0] == 'S' || text[0] == 'n' || text[0] == 's') {
    if (text.size() < 2 || text[1] < '0' || text[1] > '3') return fail();
    std::uint64_t v = ((text[0] == 'N' || text[0] == 'n') ? 12 : 8) + (text[1] - '0');
    std::string_view rest = text.substr(2);
    if (!rest.empty()) {
      if (rest[0] != ':' || rest.size() == 1) return fail();
      rest.remove_prefix(1);
      if (rest.size() > kMaxLevel) return fail();
      for (char c : rest) {
        if (c < '0' || c > '3') return fail();
        v = (v << 2) | static_cast<std::uint64_t>(c - '0');
      }
    }
    return TrixelId(v);
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return fail();
  TrixelId id(v);
  if (!id.valid()) return fail();
  return id;
}

bool Trixel::Contains(const UnitVec& p, double tolerance) const {
  return v0.Cross(v1).Dot(p.vec()) >= -tolerance && v1.Cross(v2).Dot(p.vec()) >= -tolerance &&
         v2.Cross(v0).Dot(p.vec()) >= -tolerance;
}

std::array<Trixel, 8> BaseTrixels() { return CachedBase(); }

std::array<Trixel, 4> Subdivide(const Trixel& t) {
  const UnitVec w0 = UnitVec::Normalize(t.v1.vec() + t.v2.vec());
  const UnitVec w1 = UnitVec::Normalize(t.v0.vec() + t.v2.vec());
  const UnitVec w2 = UnitVec::Normalize(t.v0.vec() + t.v1.vec());
  return {{
      {t.id.child(0), t.v0, w2, w1},
      {t.id.child(1), t.v1, w0, w2},
      {t.id.child(2), t.v2, w1, w0},
      {t.id.child(3), w0, w1, w2},
  }};
}

Trixel TrixelFromId(TrixelId id) {
  if (!id.valid()) throw DomainError("invalid trixel id " + std::to_string(id.value()));
  const int lvl = id.level();
  Trixel t = CachedBase()[id.AncestorAt(0).value() - 8];
  for (int l = 1; l <= lvl; ++l) {
    const int digit = static_cast<int>(id.AncestorAt(l).value() & 3);
    t = Subdivide(t)[digit];
  }
  return t;
}

Trixel LocateTrixel(const UnitVec& p, int level) {
  CheckLevel(level);
  constexpr double kTolerance = 1e-15;
  const auto& base = CachedBase();
  // Points that miss every candidate by rounding go to the least-violated one.
  auto pick = [&](const auto& candidates) -> const Trixel& {
    for (const auto& t : candidates) {
      if (t.Contains(p, kTolerance)) return t;
    }
    const Trixel* best = &candidates[0];
    double best_value = MinEdgeValue(*best, p);
    for (const auto& t : candidates) {
      const double v = MinEdgeValue(t, p);
      if (v > best_value) {
        best = &t;
        best_value = v;
      }
    }
    return *best;
  };
  Trixel t = pick(base);
  for (int l = 1; l <= level; ++l) {
    const auto children = Subdivide(t);
    t = pick(children);
  }
  return t;
}

TrixelId Locate(const UnitVec& p, int level) { return LocateTrixel(p, level).id; }

double TrixelSolidAngle(const Trixel& t) {
  auto angle = [](const UnitVec& at, const UnitVec& b, const UnitVec& c) {
    const Vec3 n1 = at.Cross(b);
    const Vec3 n2 = at.Cross(c);
    return std::atan2(n1.Cross(n2).Norm(), n1.Dot(n2));
  };
  return angle(t.v0, t.v1, t.v2) + angle(t.v1, t.v2, t.v0) + angle(t.v2, t.v0, t.v1) - kPi;
}

double MinInradius(int level) {
  CheckLevel(level);
  // Enumerated exactly up to kEnumerated; below that each level roughly
  // halves the inradius, so extrapolate with a 10% safety factor.
  constexpr int kEnumerated = 7;
  static std::once_flag once;
  static std::array<double, kEnumerated + 1> table;
  std::call_once(once, [] {
    std::vector<Trixel> current(CachedBase().begin(), CachedBase().end());
    for (int l = 0; l <= kEnumerated; ++l) {
      double m = kPi;
      for (const auto& t : current) m = std::min(m, SphericalInradius(t));
      table[l] = m;
      if (l == kEnumerated) break;
      std::vector<Trixel> next;
      next.reserve(current.size() * 4);
      for (const auto& t : current)
        for (const auto& c : Subdivide(t)) next.push_back(c);
      current = std::move(next);
    }
  });
  if (level <= kEnumerated) return table[level];
  return table[kEnumerated] * std::ldexp(0.9, -(level - kEnumerated));
}

Verdict ClassifyTrixel(const Region& region, const Trixel& t) {
  Verdict out = Verdict::kReject;
  for (const auto& c : region.convexes) {
    const Verdict v = ClassifyConvex(c, t);
    if (v == Verdict::kFull) return Verdict::kFull;
    if (v == Verdict::kPartial) out = Verdict::kPartial;
  }
  return out;
}

Coverage Classify(const Region& region, int level) {
  CheckLevel(level);
  Coverage out;
  out.level = level;
  for (const auto& t : CachedBase()) ClassifyRecursive(region, t, level, out);
  return out;
}

void TrixelCounts::Add(TrixelId id, std::uint64_t n) {
  if (!id.valid() || id.level() != level_) {
    throw DomainError("count for trixel " + id.Name() + " does not match counts level " +
                      std::to_string(level_));
  }
  counts_[id.value()] += n;
}

std::uint64_t TrixelCounts::Total() const {
  std::uint64_t total = 0;
  for (const auto& [_, n] : counts_) total += n;
  return total;
}

std::uint64_t TrixelCounts::CountUnder(TrixelId id) const {
  if (!id.valid()) throw DomainError("invalid trixel id " + std::to_string(id.value()));
  if (id.level() > level_) {
    throw DomainError("no counts for " + id.Name() + ": counts are kept at level " +
                      std::to_string(level_));
  }
  const auto [lo, hi] = id.RangeAt(level_);
  std::uint64_t n = 0;
  for (auto it = counts_.lower_bound(lo); it != counts_.end() && it->first < hi; ++it) {
    n += it->second;
  }
  return n;
}

SelectivityEstimate EstimateSelectivity(const Coverage& coverage, const TrixelCounts& counts,
                                        double partial_fraction) {
  SelectivityEstimate e;
  for (auto id : coverage.full) e.min += counts.CountUnder(id);
  std::uint64_t partial = 0;
  for (auto id : coverage.partial) partial += counts.CountUnder(id);
  e.max = e.min + partial;
  e.expected = static_cast<double>(e.min) + partial_fraction * static_cast<double>(partial);
  return e;
}

}  // namespace skyq
