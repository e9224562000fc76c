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

// Query planning: AST -> query execution tree (QET).

#ifndef SKYQ_PLAN_H_
#define SKYQ_PLAN_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skyq/catalog.h"
#include "skyq/htm.h"
#include "skyq/query.h"
#include "skyq/scan.h"

namespace skyq {

enum class QetKind { kScan, kUnion, kIntersect, kExcept, kSort, kLimit, kAggregate, kProject };

std::string_view QetKindName(QetKind kind);

struct ScanSpec {
  // Spatial envelope of the predicate; records in partial containers are
  // tested against it.
  Region region = Region::Whole();
  Coverage coverage;
  std::vector<ContainerTask> tasks;
  Predicate residual = Predicate::True();
  Projection projection = Projection::kTag;
  bool indexed = false;
  // Test hook: sleep this long before each container is read.
  std::chrono::microseconds container_delay{0};
};

struct OutputColumn {
  enum class Kind { kObjId, kClass, kNumber };
  std::string name;
  Kind kind = Kind::kNumber;
  BoundTerm term;  // kNumber
};

struct AggregateSpec {
  AggregateFn fn = AggregateFn::kCount;
  BoundTerm term;  // unused for COUNT
  std::string name;
};

struct QetNode {
  QetKind kind = QetKind::kScan;
  std::vector<QetNode> children;

  ScanSpec scan;                      // kScan
  std::optional<BoundTerm> sort_key;  // kSort
  bool descending = false;            // kSort
  std::uint64_t limit = 0;            // kLimit
  std::vector<AggregateSpec> aggregates;  // kAggregate
  std::vector<OutputColumn> columns;      // kProject
};

struct PlanOptions {
  // Coverage classification level; storage depth + 2 when unset.
  std::optional<int> level;
  // Whole-sky coverage with the full predicate as residual.
  bool no_index = false;
  const FrameRegistry* frames = nullptr;  // built-in frames when null
  // Test hook copied into every SCAN whose coverage is the whole sky.
  std::chrono::microseconds unpruned_scan_delay{0};
};

inline constexpr std::size_t kMaxDisjuncts = 64;

struct QueryPlan {
  QetNode root;
  std::vector<std::string> columns;
};

// Throws PlanError for unknown attributes, type mismatches, unknown frames,
// invalid set-op chains and DNF blow-up beyond kMaxDisjuncts.
QueryPlan Plan(const QueryAst& ast, const Catalog& catalog, const PlanOptions& options = {});

// Spatial envelope of `expr`: a region containing every point where `expr`
// can hold. Whole sky when a spatial atom sits under NOT or some branch has
// no spatial constraint.
Region SpatialEnvelope(const Expr& expr, const FrameRegistry& frames);

// Pre-order list of nodes, one line each, indented by depth.
std::string Explain(const QueryPlan& plan, const Catalog& catalog);

// Selectivity bracket of a SCAN; the lower bound is 0 when a residual
// applies beyond the region.
SelectivityEstimate EstimateScan(const ScanSpec& scan, const Catalog& catalog);

// Columns of TAG / FULL projections.
std::vector<OutputColumn> TagColumns();
std::vector<OutputColumn> FullColumns(const Schema& schema);

}  // namespace skyq

#endif  // SKYQ_PLAN_H_
