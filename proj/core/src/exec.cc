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

#include "skyq/exec.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "skyq/error.h"

namespace skyq {

namespace {

using RowQueue = BoundedQueue<Row>;
using QueuePtr = std::shared_ptr<RowQueue>;

struct Built {
  QueuePtr out;
  std::vector<std::shared_ptr<QueueBase>> subtree;
};

void SleepUnlessCancelled(std::chrono::microseconds d, const RowQueue& q) {
  const auto until = std::chrono::steady_clock::now() + d;
  while (!q.cancelled()) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= until) return;
    std::this_thread::sleep_for(std::min<std::chrono::steady_clock::duration>(
        until - now, std::chrono::milliseconds(1)));
  }
}

// NaN sorts after every number in both directions; ties by obj_id.
bool SortBefore(double ka, double kb, std::uint64_t ia, std::uint64_t ib, bool descending) {
  const bool na = std::isnan(ka), nb = std::isnan(kb);
  if (na || nb) {
    if (na != nb) return nb;
    return ia < ib;
  }
  if (ka != kb) return descending ? ka > kb : ka < kb;
  return ia < ib;
}

bool EmitRow(ExecutionState* st, RowQueue& q, NodeTrace* t, Row row, bool blocking) {
  if (blocking && t->drained_ns.load() < 0) t->emitted_before_drain.fetch_add(1);
  if (!q.Push(std::move(row))) return false;
  std::int64_t expected = -1;
  t->first_emit_ns.compare_exchange_strong(expected, st->metrics.Now());
  t->emitted.fetch_add(1, std::memory_order_relaxed);
  return true;
}

// One of several producers of a node leaving. The last one stamps the node
// complete before the consumer can observe the end of the stream.
struct ProducerExit {
  const QueuePtr& q;
  NodeTrace* t;
  ExecMetrics& m;
  std::atomic<int>& left;
  ~ProducerExit() {
    if (left.fetch_sub(1) == 1) t->complete_ns = m.Now();
    q->ProducerDone();
  }
};

void FinishNode(ExecutionState* st, RowQueue& q, NodeTrace* t) {
  t->complete_ns = st->metrics.Now();
  q.ProducerDone();
}

class Builder {
 public:
  Builder(ExecutionState& state, std::shared_ptr<const Catalog> catalog, const EngineConfig& config)
      : state_(state), catalog_(std::move(catalog)), config_(config) {}

  Built Build(const QetNode& node, int depth) {
    auto trace = std::make_unique<NodeTrace>();
    trace->kind = node.kind;
    trace->depth = depth;
    NodeTrace* t = trace.get();
    state_.metrics.traces.push_back(std::move(trace));

    Built self;
    self.out = state_.MakeQueue<Row>(config_.stream_bound);
    std::vector<Built> kids;
    for (const auto& c : node.children) kids.push_back(Build(c, depth + 1));
    for (auto& k : kids) {
      self.subtree.insert(self.subtree.end(), k.subtree.begin(), k.subtree.end());
    }
    self.subtree.push_back(self.out);

    switch (node.kind) {
      case QetKind::kScan:
        StartScan(node.scan, self.out, t);
        break;
      case QetKind::kUnion:
        StartUnion(kids, self.out, t);
        break;
      case QetKind::kIntersect:
      case QetKind::kExcept:
        StartSetFilter(node.kind, kids, self.out, t);
        break;
      case QetKind::kSort:
        StartSort(node, kids.front(), self.out, t);
        break;
      case QetKind::kLimit:
        StartLimit(node.limit, kids.front(), self.out, t);
        break;
      case QetKind::kAggregate:
        StartAggregate(node.aggregates, kids.front(), self.out, t);
        break;
      case QetKind::kProject:
        StartProject(node.columns, kids.front(), self.out, t);
        break;
    }
    return self;
  }

  void StartScan(const ScanSpec& spec, const QueuePtr& out, NodeTrace* t) {
    const int workers = std::max(1, config_.workers);
    auto next = std::make_shared<std::atomic<std::size_t>>(0);
    auto shared_spec = std::make_shared<const ScanSpec>(spec);
    auto left = std::make_shared<std::atomic<int>>(workers);
    out->AddProducer(workers);
    for (int w = 0; w < workers; ++w) {
      state_.Spawn([st = &state_, out, t, next, left, shared_spec, catalog = catalog_] {
        auto& m = st->metrics;
        const ScanSpec& s = *shared_spec;
        ProducerExit done{out, t, m, *left};
        while (!out->cancelled()) {
          const std::size_t i = next->fetch_add(1);
          if (i >= s.tasks.size()) break;
          if (s.container_delay.count() > 0) SleepUnlessCancelled(s.container_delay, *out);
          if (out->cancelled()) break;
          const ContainerTask& task = s.tasks[i];
          ContainerReader reader = catalog->OpenContainer(task.container, &m.io);
          for (SkyObject& o : reader.Read(s.projection)) {
            m.records_scanned.fetch_add(1, std::memory_order_relaxed);
            if (!task.full && !s.region.Contains(o.pos)) continue;
            if (!s.residual(o)) continue;
            if (!EmitRow(st, *out, t, Row{std::move(o), {}}, false)) return;
          }
        }
      });
    }
  }

  void StartUnion(std::vector<Built>& kids, const QueuePtr& out, NodeTrace* t) {
    struct Seen {
      std::mutex mu;
      std::unordered_set<std::uint64_t> ids;
    };
    auto seen = std::make_shared<Seen>();
    auto left = std::make_shared<std::atomic<int>>(static_cast<int>(kids.size()));
    out->AddProducer(static_cast<int>(kids.size()));
    for (auto& k : kids) {
      state_.Spawn([st = &state_, in = k.out, out, t, seen, left] {
        ProducerExit done{out, t, st->metrics, *left};
        while (auto row = in->Pop()) {
          {
            std::lock_guard lock(seen->mu);
            if (!seen->ids.insert(row->object.obj_id).second) continue;
          }
          if (!EmitRow(st, *out, t, std::move(*row), false)) return;
        }
      });
    }
  }

  void StartSetFilter(QetKind kind, std::vector<Built>& kids, const QueuePtr& out, NodeTrace* t) {
    std::vector<QueuePtr> ins;
    for (auto& k : kids) ins.push_back(k.out);
    out->AddProducer();
    state_.Spawn([st = &state_, kind, ins, out, t] {
      std::vector<std::unordered_set<std::uint64_t>> sets(ins.size() - 1);
      for (std::size_t i = 1; i < ins.size(); ++i) {
        while (auto row = ins[i]->Pop()) sets[i - 1].insert(row->object.obj_id);
      }
      t->drained_ns = st->metrics.Now();
      std::unordered_set<std::uint64_t> emitted;
      while (auto row = ins[0]->Pop()) {
        const std::uint64_t id = row->object.obj_id;
        bool keep = true;
        if (kind == QetKind::kIntersect) {
          for (const auto& s : sets) keep = keep && s.count(id);
        } else {
          keep = !sets.front().count(id);
        }
        if (!keep || !emitted.insert(id).second) continue;
        if (!EmitRow(st, *out, t, std::move(*row), true)) break;
      }
      FinishNode(st, *out, t);
    });
  }

  void StartSort(const QetNode& node, Built& kid, const QueuePtr& out, NodeTrace* t) {
    out->AddProducer();
    state_.Spawn([st = &state_, key = *node.sort_key, desc = node.descending, in = kid.out, out, t] {
      std::vector<std::pair<double, Row>> rows;
      while (auto row = in->Pop()) {
        const double k = key.Eval(row->object);
        rows.emplace_back(k, std::move(*row));
      }
      t->drained_ns = st->metrics.Now();
      std::sort(rows.begin(), rows.end(), [desc](const auto& a, const auto& b) {
        return SortBefore(a.first, b.first, a.second.object.obj_id, b.second.object.obj_id, desc);
      });
      for (auto& r : rows) {
        if (!EmitRow(st, *out, t, std::move(r.second), true)) break;
      }
      FinishNode(st, *out, t);
    });
  }

  void StartLimit(std::uint64_t n, Built& kid, const QueuePtr& out, NodeTrace* t) {
    out->AddProducer();
    state_.Spawn([st = &state_, n, in = kid.out, subtree = kid.subtree, out, t] {
      std::uint64_t count = 0;
      while (count < n) {
        auto row = in->Pop();
        if (!row) break;
        if (!EmitRow(st, *out, t, std::move(*row), false)) break;
        ++count;
      }
      for (const auto& q : subtree) q->Cancel();
      FinishNode(st, *out, t);
    });
  }

  void StartAggregate(const std::vector<AggregateSpec>& aggs, Built& kid, const QueuePtr& out,
                      NodeTrace* t) {
    out->AddProducer();
    state_.Spawn([st = &state_, aggs, in = kid.out, out, t] {
      std::uint64_t count = 0;
      std::vector<double> acc(aggs.size(), 0.0);
      std::vector<std::uint64_t> n(aggs.size(), 0);
      while (auto row = in->Pop()) {
        ++count;
        for (std::size_t i = 0; i < aggs.size(); ++i) {
          if (aggs[i].fn == AggregateFn::kCount) continue;
          const double v = aggs[i].term.Eval(row->object);
          if (std::isnan(v)) continue;
          if (n[i] == 0) {
            acc[i] = v;
          } else if (aggs[i].fn == AggregateFn::kMin) {
            acc[i] = std::min(acc[i], v);
          } else if (aggs[i].fn == AggregateFn::kMax) {
            acc[i] = std::max(acc[i], v);
          } else {
            acc[i] += v;
          }
          ++n[i];
        }
      }
      t->drained_ns = st->metrics.Now();
      if (st->cancelled()) return FinishNode(st, *out, t);
      Row result;
      for (std::size_t i = 0; i < aggs.size(); ++i) {
        if (aggs[i].fn == AggregateFn::kCount) {
          result.cells.emplace_back(count);
        } else if (n[i] == 0) {
          result.cells.emplace_back(std::monostate{});
        } else if (aggs[i].fn == AggregateFn::kAvg) {
          result.cells.emplace_back(acc[i] / static_cast<double>(n[i]));
        } else {
          result.cells.emplace_back(acc[i]);
        }
      }
      EmitRow(st, *out, t, std::move(result), true);
      FinishNode(st, *out, t);
    });
  }

  void StartProject(const std::vector<OutputColumn>& columns, Built& kid, const QueuePtr& out,
                    NodeTrace* t) {
    out->AddProducer();
    state_.Spawn([st = &state_, columns, in = kid.out, out, t] {
      while (auto row = in->Pop()) {
        row->cells = ProjectRow(row->object, columns);
        if (!EmitRow(st, *out, t, std::move(*row), false)) break;
      }
      FinishNode(st, *out, t);
    });
  }

 private:
  ExecutionState& state_;
  std::shared_ptr<const Catalog> catalog_;
  const EngineConfig& config_;
};

}  // namespace

void EngineConfig::Validate() const {
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (stream_bound < 1) throw ConfigError("stream bound must be at least 1");
  if (bucket_level && (*bucket_level < 0 || *bucket_level > kMaxLevel)) {
    throw ConfigError("bucket level must lie in [0, " + std::to_string(kMaxLevel) + "]");
  }
}

std::string ExecMetrics::Trailer() const {
  auto ms = [](std::int64_t ns) { return ns < 0 ? -1.0 : static_cast<double>(ns) / 1e6; };
  std::ostringstream os;
  os << "#metrics containers_opened=" << io.containers_opened << " tag_bytes=" << io.tag_bytes
     << " full_bytes=" << io.full_bytes << " header_bytes=" << io.header_bytes
     << " records_scanned=" << records_scanned << " pairs_compared=" << pairs_compared
     << " first_record_ms=" << ms(first_record_ns) << " total_ms=" << ms(total_ns);
  return os.str();
}

std::vector<Cell> ProjectRow(const SkyObject& object, const std::vector<OutputColumn>& columns) {
  std::vector<Cell> cells;
  cells.reserve(columns.size());
  for (const auto& c : columns) {
    switch (c.kind) {
      case OutputColumn::Kind::kObjId:
        cells.emplace_back(object.obj_id);
        break;
      case OutputColumn::Kind::kClass:
        cells.emplace_back(std::string(ClassName(object.cls)));
        break;
      case OutputColumn::Kind::kNumber: {
        const double v = c.term.Eval(object);
        if (std::isnan(v)) {
          cells.emplace_back(std::monostate{});
        } else {
          cells.emplace_back(v);
        }
        break;
      }
    }
  }
  return cells;
}

RecordStream Execute(const QueryPlan& plan, const Catalog& catalog, const EngineConfig& config) {
  config.Validate();
  auto state = std::make_unique<ExecutionState>();
  Builder builder(*state, std::make_shared<const Catalog>(catalog), config);
  QueuePtr out = builder.Build(plan.root, 0).out;
  return RecordStream(std::move(state), std::move(out));
}

RecordStream ScanEngine(const Catalog& catalog, Predicate predicate, Projection projection,
                        const EngineConfig& config) {
  QueryPlan plan;
  plan.root.kind = QetKind::kScan;
  ScanSpec& s = plan.root.scan;
  s.coverage = WholeSkyCoverage(catalog.storage_depth());
  s.tasks = PlanContainers(catalog, s.coverage);
  s.residual = std::move(predicate);
  s.projection = projection;
  return Execute(plan, catalog, config);
}

}  // namespace skyq
