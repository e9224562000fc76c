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

#include <algorithm>
#include <sstream>

#include "skyq/error.h"
#include "skyq/plan.h"

namespace skyq {

namespace {

const FrameRegistry& DefaultFrames() {
  static const FrameRegistry frames;
  return frames;
}

// nullopt means unconstrained.
using Envelope = std::optional<Region>;

void CheckSize(const Region& r, const SourcePos& pos) {
  if (r.convexes.size() > kMaxDisjuncts) {
    throw PlanError("spatial predicate expands to " + std::to_string(r.convexes.size()) +
                        " disjuncts; the limit is " + std::to_string(kMaxDisjuncts),
                    pos.line, pos.column);
  }
}

Envelope EnvelopeOf(const Expr& e, const FrameRegistry& frames) {
  switch (e.kind) {
    case Expr::Kind::kSpatial:
      return Region::Of(SpatialToConvex(e.spatial, frames, e.pos));
    case Expr::Kind::kCompare:
    case Expr::Kind::kNot:
      return std::nullopt;
    case Expr::Kind::kAnd: {
      Envelope acc;
      for (const auto& c : e.children) {
        Envelope sub = EnvelopeOf(c, frames);
        if (!sub) continue;
        acc = acc ? RegionIntersection(*acc, *sub) : std::move(sub);
        CheckSize(*acc, e.pos);
      }
      return acc;
    }
    case Expr::Kind::kOr: {
      Region acc = Region::Empty();
      for (const auto& c : e.children) {
        Envelope sub = EnvelopeOf(c, frames);
        if (!sub) return std::nullopt;
        acc = RegionUnion(acc, *sub);
        CheckSize(acc, e.pos);
      }
      return acc;
    }
  }
  return std::nullopt;
}

// Only AND/OR over spatial atoms.
bool IsPureSpatial(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kSpatial:
      return true;
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr:
      return std::all_of(e.children.begin(), e.children.end(), IsPureSpatial);
    default:
      return false;
  }
}

// Part of `where` left to test once records are restricted to its spatial
// envelope. nullopt means nothing is left.
std::optional<Expr> ResidualOf(const Expr& where) {
  if (!where.HasSpatial()) return where;
  if (IsPureSpatial(where)) return std::nullopt;
  if (where.kind != Expr::Kind::kAnd) return where;
  std::vector<Expr> rest;
  for (const auto& c : where.children) {
    if (IsPureSpatial(c)) continue;
    if (c.HasSpatial()) return where;
    rest.push_back(c);
  }
  if (rest.size() == 1) return rest.front();
  Expr e;
  e.kind = Expr::Kind::kAnd;
  e.pos = where.pos;
  e.children = std::move(rest);
  return e;
}

std::optional<AttributeRef> SingleAttribute(const Term& t, const Schema& schema) {
  if (t.minus || t.first.is_number) return std::nullopt;
  return ResolveAttribute(schema, t.first.ident);
}

OutputColumn ItemColumn(const Term& term, const Schema& schema) {
  OutputColumn col;
  col.name = ToText(term);
  if (auto ref = SingleAttribute(term, schema)) {
    if (ref->kind == AttributeRef::Kind::kClass) {
      col.kind = OutputColumn::Kind::kClass;
      return col;
    }
    if (ref->kind == AttributeRef::Kind::kObjId) {
      col.kind = OutputColumn::Kind::kObjId;
      return col;
    }
  }
  col.kind = OutputColumn::Kind::kNumber;
  col.term = BindTerm(term, schema);
  return col;
}

bool ColumnsNeedFull(const std::vector<OutputColumn>& cols) {
  return std::any_of(cols.begin(), cols.end(), [](const OutputColumn& c) {
    return c.kind == OutputColumn::Kind::kNumber && !c.term.IsTag();
  });
}

struct SelectPlan {
  QetNode node;
  bool needs_full = false;
};

class Planner {
 public:
  Planner(const Catalog& catalog, const PlanOptions& options)
      : catalog_(catalog),
        options_(options),
        frames_(options.frames ? *options.frames : DefaultFrames()) {}

  QueryPlan Run(const QueryAst& ast) {
    if (ast.selects.empty()) throw PlanError("empty query");
    const ProjectionSpec& proj = ast.selects.front().projection;
    for (const auto& s : ast.selects) {
      if (!(s.projection == proj)) {
        throw PlanError("all SELECTs of a set operation must share one projection", s.pos.line,
                        s.pos.column);
      }
    }

    QueryPlan plan;
    QetNode top;
    bool projection_full = proj.kind == ProjectionSpec::Kind::kFull;
    if (proj.IsAggregate()) {
      top.kind = QetKind::kAggregate;
      for (const auto& item : proj.items) {
        if (!item.aggregate) {
          const auto& p = ast.selects.front().pos;
          throw PlanError("cannot mix aggregates and plain columns", p.line, p.column);
        }
        AggregateSpec spec;
        spec.fn = *item.aggregate;
        if (spec.fn == AggregateFn::kCount) {
          spec.name = "count";
        } else {
          spec.term = BindTerm(item.term, schema());
          projection_full |= !spec.term.IsTag();
          std::string fn(AggregateName(spec.fn));
          std::transform(fn.begin(), fn.end(), fn.begin(), ::tolower);
          spec.name = fn + "(" + ToText(item.term) + ")";
        }
        plan.columns.push_back(spec.name);
        top.aggregates.push_back(std::move(spec));
      }
    } else {
      top.kind = QetKind::kProject;
      switch (proj.kind) {
        case ProjectionSpec::Kind::kTag:
          top.columns = TagColumns();
          break;
        case ProjectionSpec::Kind::kFull:
          top.columns = FullColumns(schema());
          break;
        case ProjectionSpec::Kind::kItems:
          for (const auto& item : proj.items) top.columns.push_back(ItemColumn(item.term, schema()));
          break;
      }
      projection_full |= ColumnsNeedFull(top.columns);
      for (const auto& c : top.columns) plan.columns.push_back(c.name);
    }

    std::vector<SelectPlan> selects;
    bool any_full = projection_full;
    for (const auto& s : ast.selects) {
      selects.push_back(PlanSelect(s));
      any_full |= selects.back().needs_full;
    }
    if (any_full) {
      for (auto& s : selects) SetProjection(s.node, Projection::kFull);
    }

    QetNode chain = std::move(selects.front().node);
    for (std::size_t i = 1; i < selects.size(); ++i) {
      const QetKind kind = ast.setops[i - 1] == SetOp::kUnion       ? QetKind::kUnion
                           : ast.setops[i - 1] == SetOp::kIntersect ? QetKind::kIntersect
                                                                     : QetKind::kExcept;
      if (kind != QetKind::kExcept && chain.kind == kind && chain_is_setop_) {
        chain.children.push_back(std::move(selects[i].node));
        continue;
      }
      QetNode n;
      n.kind = kind;
      n.children.push_back(std::move(chain));
      n.children.push_back(std::move(selects[i].node));
      chain = std::move(n);
      chain_is_setop_ = true;
    }
    top.children.push_back(std::move(chain));
    plan.root = std::move(top);
    return plan;
  }

 private:
  const Schema& schema() const { return catalog_.schema(); }

  static void SetProjection(QetNode& n, Projection p) {
    if (n.kind == QetKind::kScan) n.scan.projection = p;
    for (auto& c : n.children) SetProjection(c, p);
  }

  SelectPlan PlanSelect(const SelectAst& s) {
    SelectPlan out;
    // Binding the whole expression surfaces attribute and type errors even
    // when the residual drops parts of it.
    Predicate full = Predicate::Compile(s.where, schema(), frames_);
    out.needs_full = full.NeedsFull();

    ScanSpec scan;
    const int level = options_.level.value_or(std::min(catalog_.storage_depth() + 2, kMaxLevel));
    if (level < 0 || level > kMaxLevel) {
      throw PlanError("coverage level must lie in [0, " + std::to_string(kMaxLevel) + "]");
    }
    Envelope env = EnvelopeOf(s.where, frames_);
    if (options_.no_index || !env || env->IsWholeSky()) {
      scan.region = Region::Whole();
      scan.coverage = WholeSkyCoverage(level);
      scan.residual = std::move(full);
      scan.indexed = false;
      scan.container_delay = options_.unpruned_scan_delay;
    } else {
      scan.region = std::move(*env);
      scan.coverage = Classify(scan.region, level);
      std::optional<Expr> residual = ResidualOf(s.where);
      scan.residual = residual ? Predicate::Compile(*residual, schema(), frames_) : Predicate::True();
      scan.indexed = true;
    }
    scan.tasks = PlanContainers(catalog_, scan.coverage);
    scan.projection = Projection::kTag;

    QetNode node;
    node.kind = QetKind::kScan;
    node.scan = std::move(scan);
    if (s.order_by) {
      QetNode sort;
      sort.kind = QetKind::kSort;
      sort.sort_key = BindTerm(*s.order_by, schema());
      sort.descending = s.descending;
      out.needs_full |= !sort.sort_key->IsTag();
      sort.children.push_back(std::move(node));
      node = std::move(sort);
    }
    if (s.limit) {
      QetNode lim;
      lim.kind = QetKind::kLimit;
      lim.limit = *s.limit;
      lim.children.push_back(std::move(node));
      node = std::move(lim);
    }
    out.node = std::move(node);
    return out;
  }

  const Catalog& catalog_;
  const PlanOptions& options_;
  const FrameRegistry& frames_;
  bool chain_is_setop_ = false;
};

std::string FormatDouble(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void ExplainNode(const QetNode& n, const Catalog& catalog, int depth, std::ostringstream& out) {
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << QetKindName(n.kind);
  switch (n.kind) {
    case QetKind::kScan: {
      const ScanSpec& s = n.scan;
      out << " projection=" << (s.projection == Projection::kTag ? "TAG" : "FULL")
          << (s.indexed ? " indexed" : " unindexed") << " level=" << s.coverage.level
          << " full=" << s.coverage.full.size() << " partial=" << s.coverage.partial.size()
          << " containers=" << s.tasks.size();
      const SelectivityEstimate e = EstimateScan(s, catalog);
      out << " estimate=(" << e.min << ", " << FormatDouble(e.expected) << ", " << e.max << ")";
      out << " residual=" << (s.residual.IsTrue() ? "true" : s.residual.text());
      break;
    }
    case QetKind::kSort:
      out << " by=" << n.sort_key->text << (n.descending ? " DESC" : " ASC");
      break;
    case QetKind::kLimit:
      out << " n=" << n.limit;
      break;
    case QetKind::kAggregate:
      for (std::size_t i = 0; i < n.aggregates.size(); ++i) {
        out << (i == 0 ? " " : ", ") << n.aggregates[i].name;
      }
      break;
    case QetKind::kProject:
      out << " columns=" << n.columns.size();
      break;
    default:
      out << " children=" << n.children.size();
      break;
  }
  out << "\n";
  for (const auto& c : n.children) ExplainNode(c, catalog, depth + 1, out);
}

}  // namespace

std::string_view QetKindName(QetKind kind) {
  switch (kind) {
    case QetKind::kScan:
      return "SCAN";
    case QetKind::kUnion:
      return "UNION";
    case QetKind::kIntersect:
      return "INTERSECT";
    case QetKind::kExcept:
      return "EXCEPT";
    case QetKind::kSort:
      return "SORT";
    case QetKind::kLimit:
      return "LIMIT";
    case QetKind::kAggregate:
      return "AGGREGATE";
    case QetKind::kProject:
      return "PROJECT";
  }
  return "?";
}

std::vector<OutputColumn> TagColumns() {
  std::vector<OutputColumn> cols;
  const Schema empty;
  for (const auto& name : CoreAttributeNames()) {
    Term t;
    t.first.ident = name;
    cols.push_back(ItemColumn(t, empty));
  }
  return cols;
}

std::vector<OutputColumn> FullColumns(const Schema& schema) {
  std::vector<OutputColumn> cols = TagColumns();
  for (const auto& name : schema.extras) {
    Term t;
    t.first.ident = name;
    cols.push_back(ItemColumn(t, schema));
  }
  return cols;
}

Region SpatialEnvelope(const Expr& expr, const FrameRegistry& frames) {
  Envelope env = EnvelopeOf(expr, frames);
  return env ? *env : Region::Whole();
}

QueryPlan Plan(const QueryAst& ast, const Catalog& catalog, const PlanOptions& options) {
  return Planner(catalog, options).Run(ast);
}

SelectivityEstimate EstimateScan(const ScanSpec& scan, const Catalog& catalog) {
  const TrixelCounts& counts = catalog.meta().fine_counts;
  SelectivityEstimate e;
  if (!scan.indexed) {
    e.min = e.max = counts.Total();
    e.expected = static_cast<double>(e.max);
  } else if (scan.coverage.level <= counts.level()) {
    e = EstimateSelectivity(scan.coverage, counts);
  } else {
    e = EstimateSelectivity(Classify(scan.region, counts.level()), counts);
  }
  if (!scan.residual.IsTrue()) e.min = 0;
  return e;
}

std::string Explain(const QueryPlan& plan, const Catalog& catalog) {
  std::ostringstream out;
  ExplainNode(plan.root, catalog, 0, out);
  return out.str();
}

}  // namespace skyq
