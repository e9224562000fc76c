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

#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.h"
#include "oracles.h"
#include "skyq/error.h"
#include "skyq/join.h"

namespace skyq {
namespace {

using testing::IdPair;
using testing::TempDir;

std::vector<PairResult> Drain(PairStream s) {
  std::vector<PairResult> out;
  while (auto p = s.Next()) out.push_back(*p);
  return out;
}

std::vector<IdPair> Keys(const std::vector<PairResult>& pairs) {
  std::vector<IdPair> out;
  for (const auto& p : pairs) out.emplace_back(p.obj_a, p.obj_b);
  std::sort(out.begin(), out.end());
  return out;
}

SkyObject At(std::uint64_t id, const UnitVec& pos, std::array<double, 5> mag = {20, 19, 18, 17.5, 17},
             ObjectClass cls = ObjectClass::kStar) {
  SkyObject o;
  o.obj_id = id;
  o.pos = pos;
  o.mag = mag;
  o.cls = cls;
  return o;
}

// Point offset from `p` along unit tangent `dir` by `arcsec`.
UnitVec Along(const UnitVec& p, const Vec3& dir, double arcsec) {
  const double a = ArcsecToRadians(arcsec);
  return UnitVec::Normalize(p.vec() * std::cos(a) + dir * std::sin(a));
}

Vec3 Unit(const Vec3& v) { return v * (1.0 / v.Norm()); }

TEST(HashJoinTest, TwoObjectsOnePair) {
  TempDir dir;
  const UnitVec c = FromLonLat(33, 44);
  const Vec3 east = Unit(Vec3{0, 0, 1}.Cross(c.vec()));
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{},
                                      {At(9, c), At(4, Along(c, east, 7))}, 3);
  const auto pairs = Drain(HashJoin(cat, JoinSpec{}, EngineConfig{}));
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].obj_a, 4u);
  EXPECT_EQ(pairs[0].obj_b, 9u);
  EXPECT_NEAR(pairs[0].separation_arcsec, 7, 1e-6);
}

TEST(HashJoinTest, PairStraddlingBucketEdge) {
  TempDir dir;
  const Trixel t = TrixelFromId(TrixelId::Parse("N1:230"));
  const UnitVec mid = UnitVec::Normalize(t.v0.vec() + t.v1.vec());
  const Vec3 across = Unit(t.v0.Cross(t.v1));
  const UnitVec a = Along(mid, across, 2.5), b = Along(mid, -across, 2.5);
  ASSERT_NE(Locate(a, 3), Locate(b, 3));
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{}, {At(1, a), At(2, b)}, 3);
  for (int workers : {1, 3}) {
    EngineConfig cfg;
    cfg.workers = workers;
    const auto pairs = Drain(HashJoin(cat, JoinSpec{}, cfg));
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_NEAR(pairs[0].separation_arcsec, 5, 1e-6);
  }
}

TEST(HashJoinTest, ClusterAroundMeshVertex) {
  TempDir dir;
  // Six level-3 trixels meet at the vertex shared below; scatter objects
  // within 6" so every pair is within 12" and crosses buckets.
  const UnitVec v = TrixelFromId(TrixelId::Parse("S2:11")).v2;
  testing::Rng rng(51);
  std::vector<SkyObject> objs;
  for (std::uint64_t i = 0; i < 12; ++i) {
    objs.push_back(At(i + 1, testing::RandomPointNear(rng, v, ArcsecToRadians(6))));
  }
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{}, objs, 3);
  JoinSpec spec;
  spec.radius_arcsec = 12;
  const auto got = Keys(Drain(HashJoin(cat, spec, EngineConfig{})));
  EXPECT_EQ(got.size(), 66u);
  EXPECT_EQ(got, testing::AllPairs(objs, 12, nullptr));
}

TEST(HashJoinTest, MatchesBruteForceOnClusteredCatalog) {
  TempDir dir;
  const auto objs = testing::ClusteredObjects(10000, 52, 60, 40);
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{}, objs, 3);
  for (double radius : {10.0, 30.0}) {
    const auto want = testing::AllPairs(objs, radius, nullptr);
    ASSERT_GT(want.size(), 1000u);
    for (int workers : {1, 4}) {
      JoinSpec spec;
      spec.radius_arcsec = radius;
      EngineConfig cfg;
      cfg.workers = workers;
      const auto pairs = Drain(HashJoin(cat, spec, cfg));
      EXPECT_EQ(Keys(pairs), want) << radius << " " << workers;
      for (const auto& p : pairs) {
        EXPECT_LT(p.obj_a, p.obj_b);
        EXPECT_LE(p.separation_arcsec, radius);
      }
    }
    // A finer bucket level gives the same answer.
    JoinSpec spec;
    spec.radius_arcsec = radius;
    EngineConfig cfg;
    cfg.bucket_level = 7;
    EXPECT_EQ(Keys(Drain(HashJoin(cat, spec, cfg))), want);
  }
}

TEST(HashJoinTest, GridOracleAgreesWithAllPairs) {
  const auto objs = testing::ClusteredObjects(3000, 53, 20, 30);
  EXPECT_EQ(testing::GridPairs(objs, 20), testing::AllPairs(objs, 20, nullptr));
}

TEST(HashJoinTest, BucketLevelValidation) {
  EXPECT_NO_THROW(ValidateBucketLevel(4, 10));
  EXPECT_THROW(ValidateBucketLevel(4, 0), ConfigError);
  EXPECT_THROW(ValidateBucketLevel(4, -1), ConfigError);
  EXPECT_THROW(ValidateBucketLevel(16, 10), ConfigError);
  EXPECT_THROW(ValidateBucketLevel(2, 6 * 3600), ConfigError);
  const double r = RadiansToArcsec(MinInradius(9)) / 2;
  EXPECT_NO_THROW(ValidateBucketLevel(9, r * 0.999));
  EXPECT_THROW(ValidateBucketLevel(9, r * 1.001), ConfigError);

  TempDir dir;
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{}, testing::UniformObjects(10, 54), 3);
  EngineConfig cfg;
  cfg.bucket_level = 20;
  EXPECT_THROW(HashJoin(cat, JoinSpec{}, cfg), ConfigError);
}

TEST(LensSearchTest, ColorAndDistanceCriteria) {
  TempDir dir;
  const UnitVec c = FromLonLat(150, 2);
  const Vec3 north = Unit(c.vec().Cross(Vec3{0, 0, 1}).Cross(c.vec()));
  const std::array<double, 5> base = {21.0, 20.2, 19.9, 19.7, 19.6};
  auto shifted = [&](double dm) {
    auto m = base;
    for (double& x : m) x += dm;
    return m;
  };
  auto tweak = [&](int band, double d) {
    auto m = base;
    m[band] += d;
    return m;
  };
  std::vector<SkyObject> objs = {
      At(1, c, base),
      At(2, Along(c, north, 6), shifted(1.3)),  // same colors, fainter: a lens pair with 1
      At(3, Along(c, north, -8), tweak(2, 0.2)),  // color mismatch
      At(4, Along(c, north, 25), base),           // too far
      At(5, Along(c, north, -8.5), shifted(0.04)),
  };
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{}, objs, 3);
  const auto pairs = Drain(LensSearch(cat, LensOptions{}, EngineConfig{}));
  EXPECT_EQ(Keys(pairs), (std::vector<IdPair>{{1, 2}, {1, 5}}));
  for (const auto& p : pairs) {
    for (double d : p.color_delta) EXPECT_LE(std::abs(d), 0.05);
  }
  LensOptions wide;
  wide.color_eps_mag = 0.5;
  EXPECT_EQ(Keys(Drain(LensSearch(cat, wide, EngineConfig{}))),
            (std::vector<IdPair>{{1, 2}, {1, 3}, {1, 5}, {3, 5}}));
}

TEST(LensSearchTest, MatchesOracle) {
  TempDir dir;
  auto objs = testing::ClusteredObjects(8000, 55, 50, 15);
  // Odd ids are clumped; give every other one identical colors.
  for (std::size_t i = 1; i < objs.size(); i += 4) {
    const double off = objs[i].mag[0] - 20;
    objs[i].mag = {20 + off, 19.5 + off, 19.2 + off, 19.1 + off, 19.0 + off};
  }
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{}, objs, 3);
  const auto want = testing::AllPairs(objs, 10, [](const SkyObject& a, const SkyObject& b) {
    for (int c = 0; c < 4; ++c) {
      if (std::abs(a.Color(c) - b.Color(c)) > 0.05) return false;
    }
    return true;
  });
  ASSERT_GT(want.size(), 50u);
  EngineConfig cfg;
  cfg.workers = 3;
  EXPECT_EQ(Keys(Drain(LensSearch(cat, LensOptions{}, cfg))), want);
}

TEST(CompanionSearchTest, OrderedPairsAroundQuasars) {
  TempDir dir;
  const UnitVec q = FromLonLat(210, -5);
  const Vec3 east = Unit(Vec3{0, 0, 1}.Cross(q.vec()));
  const std::array<double, 5> qso = {19.5, 19.3, 19.2, 19.1, 19.0};
  const std::array<double, 5> blue_faint = {21.5, 21.0, 20.8, 20.7, 20.6};
  const std::array<double, 5> red_faint = {23, 21.5, 20.5, 20.0, 19.8};
  const std::array<double, 5> blue_bright = {19.8, 19.2, 19.0, 18.9, 18.8};
  std::vector<SkyObject> objs = {
      At(50, q, qso, ObjectClass::kQso),
      At(10, Along(q, east, 3), blue_faint, ObjectClass::kGalaxy),   // companion
      At(11, Along(q, east, -4.5), blue_faint, ObjectClass::kGalaxy),  // companion
      At(12, Along(q, east, 2), red_faint, ObjectClass::kGalaxy),    // too red
      At(13, Along(q, east, -2), blue_bright, ObjectClass::kGalaxy),  // too bright
      At(14, Along(q, east, 7), blue_faint, ObjectClass::kGalaxy),   // too far
      At(15, Along(q, east, 1), blue_faint, ObjectClass::kStar),     // not a galaxy
  };
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{}, objs, 3);
  const auto pairs = Drain(CompanionSearch(cat, CompanionOptions{}, EngineConfig{}));
  EXPECT_EQ(Keys(pairs), (std::vector<IdPair>{{50, 10}, {50, 11}}));
  for (const auto& p : pairs) EXPECT_EQ(p.obj_a, 50u);

  CompanionOptions faint;
  faint.faint_g = 21.2;
  EXPECT_TRUE(Drain(CompanionSearch(cat, faint, EngineConfig{})).empty());
  CompanionOptions bad;
  bad.primary = "class = QSO AND";
  EXPECT_THROW(CompanionSearch(cat, bad, EngineConfig{}), ParseError);
  bad.primary = "redshift > 1";
  EXPECT_THROW(CompanionSearch(cat, bad, EngineConfig{}), PlanError);
  CompanionOptions zero;
  zero.radius_arcsec = 0;
  EXPECT_THROW(CompanionSearch(cat, zero, EngineConfig{}), ConfigError);
}

TEST(CompanionSearchTest, MatchesOracle) {
  TempDir dir;
  const auto objs = testing::ClusteredObjects(8000, 56, 80, 8);
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{}, objs, 3);
  CompanionOptions opts;
  opts.primary = "class = QSO";
  opts.companion = "class = GALAXY AND g > 18";
  const auto want = testing::AllOrderedPairs(
      objs, 5, [](const SkyObject& o) { return o.cls == ObjectClass::kQso; },
      [](const SkyObject& o) { return o.cls == ObjectClass::kGalaxy && o.mag[kG] > 18; });
  ASSERT_GT(want.size(), 20u);
  EngineConfig cfg;
  cfg.workers = 2;
  EXPECT_EQ(Keys(Drain(CompanionSearch(cat, opts, cfg))), want);
}

}  // namespace
}  // namespace skyq
