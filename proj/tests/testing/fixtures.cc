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

#include "fixtures.h"

#include <cmath>
#include <sstream>

namespace skyq::testing {

TempDir::TempDir() {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    path_ = base / ("skyq-test-" + std::to_string(rd()) + std::to_string(rd()));
    if (std::filesystem::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

UnitVec RandomUnitVec(Rng& rng) {
  std::uniform_real_distribution<double> z(-1.0, 1.0), phi(0.0, 2 * kPi);
  const double zz = z(rng);
  const double a = phi(rng);
  const double r = std::sqrt(std::max(0.0, 1 - zz * zz));
  return UnitVec::Normalize(r * std::cos(a), r * std::sin(a), zz);
}

UnitVec Offset(Rng& rng, const UnitVec& from, double sep_rad) {
  // Tangent basis at `from`.
  const Vec3 p = from.vec();
  Vec3 helper = std::abs(p.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  Vec3 e1 = p.Cross(helper);
  e1 = e1 * (1 / e1.Norm());
  const Vec3 e2 = p.Cross(e1);
  std::uniform_real_distribution<double> bearing(0.0, 2 * kPi);
  const double b = bearing(rng);
  const Vec3 dir = e1 * std::cos(b) + e2 * std::sin(b);
  return UnitVec::Normalize(p * std::cos(sep_rad) + dir * std::sin(sep_rad));
}

UnitVec RandomPointNear(Rng& rng, const UnitVec& center, double radius_rad) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Uniform in area: cos(theta) uniform in [cos r, 1].
  const double c = 1 - u(rng) * (1 - std::cos(radius_rad));
  return Offset(rng, center, std::acos(std::min(1.0, c)));
}

UnitVec RandomPointInTrixel(Rng& rng, const Trixel& t) {
  std::uniform_real_distribution<double> u(0.02, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  return UnitVec::Normalize(t.v0.vec() * a + t.v1.vec() * b + t.v2.vec() * c);
}

Schema MakeSchema(int extras) {
  Schema s;
  for (int i = 0; i < extras; ++i) s.extras.push_back("x" + std::to_string(i));
  return s;
}

SkyObject RandomObject(Rng& rng, std::uint64_t id, const UnitVec& pos, int extras) {
  std::uniform_real_distribution<double> mag(14.0, 24.0), size(0.0, 5.0), extra(-100.0, 100.0);
  std::uniform_int_distribution<int> cls(0, 3);
  SkyObject o;
  o.obj_id = id;
  o.pos = pos;
  for (auto& m : o.mag) m = mag(rng);
  o.size_arcsec = size(rng);
  o.cls = static_cast<ObjectClass>(cls(rng));
  for (int i = 0; i < extras; ++i) o.extras.push_back(extra(rng));
  return o;
}

std::vector<SkyObject> UniformObjects(std::size_t n, std::uint64_t seed, int extras,
                                      std::uint64_t first_id) {
  Rng rng(seed);
  std::vector<SkyObject> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(RandomObject(rng, first_id + i, RandomUnitVec(rng), extras));
  }
  return out;
}

std::vector<SkyObject> ClusteredObjects(std::size_t n, std::uint64_t seed, int clumps,
                                        double clump_arcsec, std::uint64_t first_id) {
  Rng rng(seed);
  std::vector<UnitVec> centers;
  for (int c = 0; c < clumps; ++c) centers.push_back(RandomUnitVec(rng));
  std::uniform_int_distribution<int> pick(0, clumps - 1);
  std::vector<SkyObject> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const UnitVec pos = i % 2 == 0 ? RandomUnitVec(rng)
                                   : RandomPointNear(rng, centers[pick(rng)],
                                                     ArcsecToRadians(clump_arcsec));
    out.push_back(RandomObject(rng, first_id + i, pos));
  }
  return out;
}

Catalog BuildCatalog(const std::filesystem::path& root, const Schema& schema,
                     const std::vector<SkyObject>& objects, int depth, std::size_t chunk_size) {
  Catalog catalog = Catalog::Create(root, schema, depth);
  if (chunk_size == 0) chunk_size = std::max<std::size_t>(objects.size(), 1);
  for (std::size_t i = 0; i < objects.size(); i += chunk_size) {
    Chunk chunk;
    chunk.source = "chunk" + std::to_string(i / chunk_size);
    const std::size_t end = std::min(objects.size(), i + chunk_size);
    chunk.objects.assign(objects.begin() + static_cast<std::ptrdiff_t>(i),
                         objects.begin() + static_cast<std::ptrdiff_t>(end));
    catalog.Ingest(chunk);
  }
  return catalog;
}

std::string ToCsv(const std::vector<SkyObject>& objects, const Schema& schema) {
  std::ostringstream os;
  os.precision(17);
  os << "obj_id,ra_deg,dec_deg,u,g,r,i,z,size_arcsec,class";
  for (const auto& e : schema.extras) os << "," << e;
  os << "\n";
  for (const auto& o : objects) {
    const LonLat ll = ToLonLat(o.pos);
    os << o.obj_id << "," << ll.lon_deg << "," << ll.lat_deg;
    for (double m : o.mag) os << "," << m;
    os << "," << o.size_arcsec << "," << ClassName(o.cls);
    for (double x : o.extras) os << "," << x;
    os << "\n";
  }
  return os.str();
}

namespace {

Convex RandomConvexPart(Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (kind(rng)) {
    case 0: {
      const double deg = 0.1 + u(rng) * 29.9;
      return Convex{{Cap(RandomUnitVec(rng), deg * 3600)}};
    }
    case 1: {
      const Frame& frame = u(rng) < 0.5 ? Frame::Equatorial() : Frame::Galactic();
      double a = -90 + 180 * u(rng), b = -90 + 180 * u(rng);
      if (a > b) std::swap(a, b);
      return LatitudeBand(frame, a, b);
    }
    default: {
      Convex c;
      std::uniform_int_distribution<int> count(1, 4);
      const int n = count(rng);
      const UnitVec center = RandomUnitVec(rng);
      for (int i = 0; i < n; ++i) {
        // Half-spaces whose boundaries pass near `center`, so the
        // intersection is usually non-empty.
        const UnitVec normal = Offset(rng, center, 0.3 + 1.2 * u(rng));
        c.constraints.push_back(HalfSpace{normal, -0.2 + 0.9 * u(rng) * normal.Dot(center)});
      }
      return c;
    }
  }
}

}  // namespace

Region RandomRegion(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Region r = Region::Of(RandomConvexPart(rng));
  if (u(rng) < 0.25) r = RegionUnion(r, Region::Of(RandomConvexPart(rng)));
  return r;
}

}  // namespace skyq::testing
