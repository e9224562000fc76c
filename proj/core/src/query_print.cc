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

#include <charconv>
#include <sstream>

#include "skyq/query.h"

namespace skyq {

namespace {

std::string Number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string OperandText(const Operand& o) { return o.is_number ? Number(o.number) : o.ident; }

std::string SpatialText(const SpatialAtom& atom) {
  std::string out;
  switch (atom.kind) {
    case SpatialAtom::Kind::kCircle:
      out = "CIRCLE(";
      break;
    case SpatialAtom::Kind::kLatBand:
      out = "LATBAND(" + atom.frame + ", ";
      break;
    case SpatialAtom::Kind::kHalfSpace:
      out = "HALFSPACE(";
      break;
  }
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (i > 0) out += ", ";
    out += Number(atom.args[i]);
  }
  return out + ")";
}

bool IsJunction(const Expr& e) { return e.kind == Expr::Kind::kAnd || e.kind == Expr::Kind::kOr; }

std::string ItemText(const SelectItem& item) {
  if (!item.aggregate) return ToText(item.term);
  if (*item.aggregate == AggregateFn::kCount) return "COUNT";
  return std::string(AggregateName(*item.aggregate)) + "(" + ToText(item.term) + ")";
}

std::string ProjectionText(const ProjectionSpec& p) {
  switch (p.kind) {
    case ProjectionSpec::Kind::kTag:
      return "TAG";
    case ProjectionSpec::Kind::kFull:
      return "FULL";
    case ProjectionSpec::Kind::kItems:
      break;
  }
  std::string out;
  for (std::size_t i = 0; i < p.items.size(); ++i) {
    if (i > 0) out += ", ";
    out += ItemText(p.items[i]);
  }
  return out;
}

std::string_view SetOpName(SetOp op) {
  switch (op) {
    case SetOp::kUnion:
      return "UNION";
    case SetOp::kIntersect:
      return "INTERSECT";
    case SetOp::kExcept:
      return "EXCEPT";
  }
  return "?";
}

void DumpExpr(const Expr& e, int indent, std::ostringstream& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (e.kind) {
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr:
    case Expr::Kind::kNot:
      out << pad << (e.kind == Expr::Kind::kAnd ? "and" : e.kind == Expr::Kind::kOr ? "or" : "not")
          << ":\n";
      for (const auto& c : e.children) DumpExpr(c, indent + 1, out);
      return;
    case Expr::Kind::kCompare:
      out << pad << "compare: " << ToText(e.lhs) << " " << CompareOpText(e.op) << " "
          << ToText(e.rhs) << "\n";
      return;
    case Expr::Kind::kSpatial:
      out << pad << "spatial: " << SpatialText(e.spatial) << "\n";
      return;
  }
}

}  // namespace

std::string_view CompareOpText(CompareOp op) {
  switch (op) {
    case CompareOp::kLt:
      return "<";
    case CompareOp::kLe:
      return "<=";
    case CompareOp::kGt:
      return ">";
    case CompareOp::kGe:
      return ">=";
    case CompareOp::kEq:
      return "=";
    case CompareOp::kNe:
      return "!=";
  }
  return "?";
}

std::string_view AggregateName(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::kCount:
      return "COUNT";
    case AggregateFn::kMin:
      return "MIN";
    case AggregateFn::kMax:
      return "MAX";
    case AggregateFn::kAvg:
      return "AVG";
  }
  return "?";
}

std::string ToText(const Term& term) {
  std::string out = OperandText(term.first);
  if (term.minus) out += " - " + OperandText(*term.minus);
  return out;
}

std::string ToText(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr: {
      std::string out;
      const char* sep = e.kind == Expr::Kind::kAnd ? " AND " : " OR ";
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i > 0) out += sep;
        const Expr& c = e.children[i];
        out += IsJunction(c) ? "(" + ToText(c) + ")" : ToText(c);
      }
      return out;
    }
    case Expr::Kind::kNot: {
      const Expr& c = e.children.front();
      return IsJunction(c) ? "NOT (" + ToText(c) + ")" : "NOT " + ToText(c);
    }
    case Expr::Kind::kCompare:
      return ToText(e.lhs) + " " + std::string(CompareOpText(e.op)) + " " + ToText(e.rhs);
    case Expr::Kind::kSpatial:
      return SpatialText(e.spatial);
  }
  return {};
}

std::string ToText(const QueryAst& ast) {
  std::string out;
  for (std::size_t i = 0; i < ast.selects.size(); ++i) {
    if (i > 0) out += " " + std::string(SetOpName(ast.setops[i - 1])) + " ";
    const SelectAst& s = ast.selects[i];
    out += "SELECT " + ProjectionText(s.projection) + " FROM " + s.catalog + " WHERE " +
           ToText(s.where);
    if (s.order_by) {
      out += " ORDER BY " + ToText(*s.order_by);
      if (s.descending) out += " DESC";
    }
    if (s.limit) out += " LIMIT " + std::to_string(*s.limit);
  }
  return out;
}

std::string DumpAst(const QueryAst& ast) {
  std::ostringstream out;
  out << "query:\n";
  for (std::size_t i = 0; i < ast.selects.size(); ++i) {
    if (i > 0) out << "  setop: " << SetOpName(ast.setops[i - 1]) << "\n";
    const SelectAst& s = ast.selects[i];
    out << "  select:\n";
    out << "    projection: " << ProjectionText(s.projection) << "\n";
    out << "    catalog: " << s.catalog << "\n";
    out << "    where:\n";
    DumpExpr(s.where, 3, out);
    if (s.order_by) {
      out << "    order_by: " << ToText(*s.order_by) << (s.descending ? " DESC" : " ASC") << "\n";
    }
    if (s.limit) out << "    limit: " << *s.limit << "\n";
  }
  return out.str();
}

}  // namespace skyq
