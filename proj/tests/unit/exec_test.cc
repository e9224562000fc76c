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
#include <fstream>
#include <thread>

#include "fixtures.h"
#include "oracles.h"
#include "skyq/error.h"
#include "skyq/exec.h"
#include "skyq/plan.h"

namespace skyq {
namespace {

using namespace std::chrono_literals;
using testing::TempDir;

class ExecTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    objects_ = new std::vector<SkyObject>(testing::UniformObjects(20000, 41));
    catalog_ = new Catalog(testing::BuildCatalog(*dir_ / "cat", Schema{}, *objects_, 3));
  }
  static void TearDownTestSuite() {
    delete catalog_;
    delete objects_;
    delete dir_;
  }

  static QueryPlan PlanText(std::string_view text, PlanOptions o = {}) {
    return Plan(Parse(text), *catalog_, o);
  }
  static std::vector<std::uint64_t> Ids(const QueryPlan& p, int workers = 2, bool sort = true) {
    EngineConfig cfg;
    cfg.workers = workers;
    RecordStream s = Execute(p, *catalog_, cfg);
    std::vector<std::uint64_t> ids;
    while (auto row = s.Next()) ids.push_back(row->object.obj_id);
    if (sort) std::sort(ids.begin(), ids.end());
    return ids;
  }
  static std::vector<std::uint64_t> Oracle(const std::function<bool(const SkyObject&)>& f) {
    return testing::FilterIds(*objects_, f);
  }
  static bool InCap(const SkyObject& o, double ra, double dec, double arcsec) {
    return AngularDistance(o.pos, FromLonLat(ra, dec)) <= ArcsecToRadians(arcsec);
  }

  static TempDir* dir_;
  static std::vector<SkyObject>* objects_;
  static Catalog* catalog_;
};

TempDir* ExecTest::dir_ = nullptr;
std::vector<SkyObject>* ExecTest::objects_ = nullptr;
Catalog* ExecTest::catalog_ = nullptr;

TEST(BoundedQueueTest, BackpressureAndEndOfStream) {
  BoundedQueue<int> q(2);
  q.AddProducer();
  std::atomic<int> pushed{0};
  std::jthread producer([&] {
    for (int i = 0; i < 5; ++i) {
      q.Push(i);
      ++pushed;
    }
    q.ProducerDone();
  });
  std::this_thread::sleep_for(50ms);
  EXPECT_EQ(pushed.load(), 2);
  std::vector<int> got;
  while (auto v = q.Pop()) got.push_back(*v);
  EXPECT_EQ(got, (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_FALSE(q.Pop().has_value());
}

TEST(BoundedQueueTest, CancelReleasesBlockedProducer) {
  BoundedQueue<int> q(1);
  q.AddProducer();
  q.Push(1);
  std::atomic<bool> result{true};
  std::jthread producer([&] { result = q.Push(2); });
  std::this_thread::sleep_for(20ms);
  q.Cancel();
  producer.join();
  EXPECT_FALSE(result.load());
  EXPECT_FALSE(q.Pop().has_value());
}

TEST(BoundedQueueTest, PopForTimesOut) {
  BoundedQueue<int> q(4);
  q.AddProducer();
  bool timed_out = false;
  EXPECT_FALSE(q.PopFor(10ms, &timed_out).has_value());
  EXPECT_TRUE(timed_out);
  q.Push(3);
  EXPECT_EQ(q.PopFor(10ms, &timed_out), 3);
  EXPECT_FALSE(timed_out);
}

TEST(EngineConfigTest, Validation) {
  EngineConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.workers = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c.workers = 2;
  c.stream_bound = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c.stream_bound = 1;
  c.bucket_level = 30;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST_F(ExecTest, CountWholeSky) {
  EngineConfig cfg;
  cfg.workers = 3;
  RecordStream s = Execute(PlanText("SELECT COUNT FROM cat WHERE r > 0"), *catalog_, cfg);
  auto row = s.Next();
  ASSERT_TRUE(row);
  EXPECT_EQ(std::get<std::uint64_t>(row->cells.at(0)), 20000u);
  EXPECT_FALSE(s.Next());
}

TEST_F(ExecTest, AggregatesMatchOracle) {
  EngineConfig cfg;
  RecordStream s = Execute(
      PlanText("SELECT COUNT, MIN(r), MAX(g - r), AVG(size) FROM cat WHERE CIRCLE(80, -10, 72000)"),
      *catalog_, cfg);
  auto row = s.Next();
  ASSERT_TRUE(row);
  std::uint64_t n = 0;
  double mn = 1e9, mx = -1e9, sum = 0;
  for (const auto& o : *objects_) {
    if (!InCap(o, 80, -10, 72000)) continue;
    ++n;
    mn = std::min(mn, o.mag[kR]);
    mx = std::max(mx, o.Color(kG));
    sum += o.size_arcsec;
  }
  EXPECT_EQ(std::get<std::uint64_t>(row->cells[0]), n);
  EXPECT_EQ(std::get<double>(row->cells[1]), mn);
  EXPECT_EQ(std::get<double>(row->cells[2]), mx);
  EXPECT_NEAR(std::get<double>(row->cells[3]), sum / static_cast<double>(n), 1e-9);
}

TEST_F(ExecTest, EmptyAggregateYieldsNulls) {
  RecordStream s = Execute(PlanText("SELECT COUNT, MIN(r) FROM cat WHERE r < 0"), *catalog_, {});
  auto row = s.Next();
  ASSERT_TRUE(row);
  EXPECT_EQ(std::get<std::uint64_t>(row->cells[0]), 0u);
  EXPECT_TRUE(std::holds_alternative<std::monostate>(row->cells[1]));
}

TEST_F(ExecTest, UnionWithItselfIsIdempotent) {
  const std::string q = "SELECT TAG FROM cat WHERE CIRCLE(120, 30, 50000) AND r < 21";
  const auto once = Ids(PlanText(q));
  const auto twice = Ids(PlanText(q + " UNION " + q), 3, false);
  auto sorted = twice;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  EXPECT_EQ(sorted, once);
  EXPECT_EQ(once, Oracle([](const SkyObject& o) { return InCap(o, 120, 30, 50000) && o.mag[kR] < 21; }));
}

TEST_F(ExecTest, SetOperationsMatchOracle) {
  const std::string a = "SELECT TAG FROM cat WHERE CIRCLE(10, 10, 60000)";
  const std::string b = "SELECT TAG FROM cat WHERE CIRCLE(30, 5, 60000)";
  const std::string c = "SELECT TAG FROM cat WHERE r < 19";
  auto A = [](const SkyObject& o) { return InCap(o, 10, 10, 60000); };
  auto B = [](const SkyObject& o) { return InCap(o, 30, 5, 60000); };
  auto C = [](const SkyObject& o) { return o.mag[kR] < 19; };
  EXPECT_EQ(Ids(PlanText(a + " INTERSECT " + b)), Oracle([&](auto& o) { return A(o) && B(o); }));
  EXPECT_EQ(Ids(PlanText(a + " EXCEPT " + b)), Oracle([&](auto& o) { return A(o) && !B(o); }));
  EXPECT_EQ(Ids(PlanText(a + " UNION " + b + " INTERSECT " + c)),
            Oracle([&](auto& o) { return (A(o) || B(o)) && C(o); }));
  EXPECT_EQ(Ids(PlanText(a + " EXCEPT " + b + " EXCEPT " + c)),
            Oracle([&](auto& o) { return A(o) && !B(o) && !C(o); }));
  EXPECT_EQ(Ids(PlanText(a + " INTERSECT " + b + " INTERSECT " + c)),
            Oracle([&](auto& o) { return A(o) && B(o) && C(o); }));
}

TEST_F(ExecTest, WorkerCountDoesNotChangeResults) {
  const QueryPlan p = PlanText(
      "SELECT TAG FROM cat WHERE (CIRCLE(10, 10, 60000) OR LATBAND(GALACTIC, 30, 60)) AND g - r > 0");
  const auto base = Ids(p, 1);
  for (int w : {2, 3, 8}) EXPECT_EQ(Ids(p, w), base) << w;
}

TEST_F(ExecTest, SortOrderAndTies) {
  const QueryPlan q = PlanText("SELECT TAG FROM cat WHERE CIRCLE(200, 0, 40000) ORDER BY g - r DESC");
  EngineConfig cfg;
  cfg.workers = 4;
  RecordStream s = Execute(q, *catalog_, cfg);
  std::vector<SkyObject> got;
  while (auto row = s.Next()) got.push_back(row->object);
  ASSERT_GT(got.size(), 10u);
  for (std::size_t i = 1; i < got.size(); ++i) {
    const double a = got[i - 1].Color(kG), b = got[i].Color(kG);
    ASSERT_TRUE(a > b || (a == b && got[i - 1].obj_id < got[i].obj_id)) << i;
  }
}

TEST_F(ExecTest, SortTiesByObjId) {
  const QueryPlan p = PlanText("SELECT TAG FROM cat WHERE CIRCLE(200, 0, 40000) ORDER BY size - size");
  const auto got = Ids(p, 4, false);
  EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
}

TEST_F(ExecTest, LimitCancelsUpstream) {
  PlanOptions o;
  o.unpruned_scan_delay = 20ms;
  const QueryPlan p = PlanText("SELECT TAG FROM cat WHERE r < 30 LIMIT 3", o);
  const auto t0 = std::chrono::steady_clock::now();
  EngineConfig cfg;
  cfg.workers = 2;
  cfg.stream_bound = 4;
  RecordStream s = Execute(p, *catalog_, cfg);
  int n = 0;
  while (s.Next()) ++n;
  EXPECT_EQ(n, 3);
  // 512 containers at 20 ms each would take > 5 s on two workers.
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 2s);
  EXPECT_LT(s.metrics().io.containers_opened.load(), 20u);
}

TEST_F(ExecTest, AbandonedStreamStopsPromptly) {
  PlanOptions o;
  o.unpruned_scan_delay = 20ms;
  const QueryPlan p = PlanText("SELECT TAG FROM cat WHERE r < 30", o);
  const auto t0 = std::chrono::steady_clock::now();
  {
    EngineConfig cfg;
    cfg.workers = 2;
    RecordStream s = Execute(p, *catalog_, cfg);
    ASSERT_TRUE(s.Next());
  }
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 1s);
}

TEST_F(ExecTest, UnionPushesAsSoonAsPossible) {
  // The second branch scans the whole sky slowly; rows from the first
  // branch must reach the consumer well before it completes.
  PlanOptions o;
  o.unpruned_scan_delay = 5ms;
  const QueryPlan p = PlanText(
      "SELECT TAG FROM cat WHERE CIRCLE(10, 10, 7200) UNION SELECT TAG FROM cat WHERE g - r > 1.5", o);
  EngineConfig cfg;
  cfg.workers = 1;
  RecordStream s = Execute(p, *catalog_, cfg);
  ASSERT_TRUE(s.Next());
  const auto first = s.metrics().first_record_ns.load();
  while (s.Next()) {
  }
  const auto& traces = s.metrics().traces;
  std::int64_t slow_complete = 0;
  for (const auto& t : traces) {
    if (t->kind == QetKind::kScan) slow_complete = std::max(slow_complete, t->complete_ns.load());
  }
  EXPECT_GT(slow_complete, 0);
  EXPECT_LT(first * 4, slow_complete);
}

TEST_F(ExecTest, BlockingNodesEmitOnlyAfterDrain) {
  const QueryPlan p = PlanText(
      "SELECT TAG FROM cat WHERE CIRCLE(10, 10, 60000) INTERSECT SELECT TAG FROM cat WHERE r < 22 "
      "EXCEPT SELECT TAG FROM cat WHERE g < 16");
  const QueryPlan q = PlanText("SELECT TAG FROM cat WHERE CIRCLE(10, 10, 60000) ORDER BY r");
  for (const QueryPlan* plan : {&p, &q}) {
    EngineConfig cfg;
    cfg.workers = 2;
    cfg.stream_bound = 8;
    RecordStream s = Execute(*plan, *catalog_, cfg);
    while (s.Next()) {
    }
    int blocking = 0;
    for (const auto& t : s.metrics().traces) {
      if (t->kind == QetKind::kIntersect || t->kind == QetKind::kExcept || t->kind == QetKind::kSort) {
        ++blocking;
        EXPECT_EQ(t->emitted_before_drain.load(), 0u);
        EXPECT_GE(t->drained_ns.load(), 0);
        if (t->emitted > 0) {
          EXPECT_GE(t->first_emit_ns.load(), t->drained_ns.load());
        }
      }
    }
    EXPECT_GE(blocking, 1);
  }
}

TEST_F(ExecTest, ErrorsPropagateToConsumer) {
  TempDir dir;
  Catalog cat = testing::BuildCatalog(dir / "cat", Schema{}, testing::UniformObjects(3000, 42), 2);
  const auto path = cat.ContainerPath(cat.Containers()[40]);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(kContainerHeaderSize + 3));
    f.put('\x7f');
  }
  const QueryPlan p = Plan(Parse("SELECT TAG FROM cat WHERE r < 30 UNION SELECT TAG FROM cat WHERE "
                                 "CIRCLE(0, 0, 60)"),
                           cat);
  EngineConfig cfg;
  cfg.workers = 3;
  RecordStream s = Execute(p, cat, cfg);
  try {
    while (s.Next()) {
    }
    FAIL() << "corrupt container went unnoticed";
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find(path.filename().string()), std::string::npos);
  }
}

TEST_F(ExecTest, ProjectionCells) {
  RecordStream s =
      Execute(PlanText("SELECT obj_id, class, g - r FROM cat WHERE obj_id = 77"), *catalog_, {});
  auto row = s.Next();
  ASSERT_TRUE(row);
  const SkyObject& o = (*objects_)[76];
  ASSERT_EQ(o.obj_id, 77u);
  EXPECT_EQ(std::get<std::uint64_t>(row->cells[0]), 77u);
  EXPECT_EQ(std::get<std::string>(row->cells[1]), ClassName(o.cls));
  EXPECT_EQ(std::get<double>(row->cells[2]), o.mag[kG] - o.mag[kR]);
  EXPECT_FALSE(s.Next());
}

TEST_F(ExecTest, ScanEngineVisitsEveryContainerOnce) {
  Predicate pred = Predicate::Compile(ParseExpression("g - r > 0.5"), Schema{}, FrameRegistry{});
  EngineConfig cfg;
  cfg.workers = 4;
  RecordStream s = ScanEngine(*catalog_, pred, Projection::kTag, cfg);
  std::vector<std::uint64_t> ids;
  while (auto row = s.Next()) ids.push_back(row->object.obj_id);
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, Oracle([](const SkyObject& o) { return o.Color(kG) > 0.5; }));
  EXPECT_EQ(s.metrics().io.containers_opened.load(), catalog_->Containers().size());
  EXPECT_EQ(s.metrics().records_scanned.load(), 20000u);
}

TEST_F(ExecTest, MetricsTrailer) {
  RecordStream s = Execute(PlanText("SELECT TAG FROM cat WHERE CIRCLE(0, 0, 3600)"), *catalog_, {});
  while (s.Next()) {
  }
  const std::string t = s.metrics().Trailer();
  EXPECT_EQ(t.rfind("#metrics containers_opened=", 0), 0u);
  EXPECT_NE(t.find(" full_bytes=0 "), std::string::npos);
  EXPECT_NE(t.find(" total_ms="), std::string::npos);
}

}  // namespace
}  // namespace skyq
