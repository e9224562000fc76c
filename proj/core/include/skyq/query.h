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

// Query language front end: lexer, parser, AST printer and predicate binder.
//
//   query      := select { setop select }
//   setop      := UNION | INTERSECT | EXCEPT
//   select     := SELECT proj FROM ident WHERE expr [ORDER BY term [ASC|DESC]] [LIMIT int]
//   proj       := TAG | FULL | item { "," item }
//   item       := COUNT | (MIN|MAX|AVG) "(" term ")" | term
//   expr       := and { OR and }
//   and        := unary { AND unary }
//   unary      := NOT unary | "(" expr ")" | spatial | term cmp term
//   spatial    := CIRCLE "(" ra, dec, radius_arcsec ")"
//               | LATBAND "(" frame, lo_deg, hi_deg ")"
//               | HALFSPACE "(" nx, ny, nz, d ")"
//   term       := operand [ "-" operand ]          (g - r is a color)
//   operand    := ident | number | "-" number
//   cmp        := < | <= | > | >= | = | !=
//
// Keywords are case-insensitive. Errors carry a 1-based line:column; an
// unexpected end of input is reported at the last token read.

#ifndef SKYQ_QUERY_H_
#define SKYQ_QUERY_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skyq/record.h"
#include "skyq/sphere.h"

namespace skyq {

// Source position; ignored by AST equality.
struct SourcePos {
  int line = 0;
  int column = 0;
  bool operator==(const SourcePos&) const { return true; }
};

struct Operand {
  bool is_number = false;
  double number = 0;
  std::string ident;
  SourcePos pos;
  bool operator==(const Operand&) const = default;
};

struct Term {
  Operand first;
  std::optional<Operand> minus;  // first - minus
  bool operator==(const Term&) const = default;
};

enum class CompareOp { kLt, kLe, kGt, kGe, kEq, kNe };

struct SpatialAtom {
  enum class Kind { kCircle, kLatBand, kHalfSpace };
  Kind kind = Kind::kCircle;
  std::string frame;  // kLatBand only
  std::vector<double> args;
  bool operator==(const SpatialAtom&) const = default;
};

struct Expr {
  enum class Kind { kAnd, kOr, kNot, kCompare, kSpatial };
  Kind kind = Kind::kCompare;
  std::vector<Expr> children;  // kAnd/kOr: >= 2, kNot: 1
  Term lhs, rhs;
  CompareOp op = CompareOp::kEq;
  SpatialAtom spatial;
  SourcePos pos;

  bool operator==(const Expr& o) const;
  bool HasSpatial() const;
};

enum class AggregateFn { kCount, kMin, kMax, kAvg };

struct SelectItem {
  std::optional<AggregateFn> aggregate;
  Term term;  // unused for COUNT
  bool operator==(const SelectItem&) const = default;
};

struct ProjectionSpec {
  enum class Kind { kTag, kFull, kItems };
  Kind kind = Kind::kTag;
  std::vector<SelectItem> items;
  bool operator==(const ProjectionSpec&) const = default;

  bool IsAggregate() const;
};

struct SelectAst {
  ProjectionSpec projection;
  std::string catalog;
  Expr where;
  std::optional<Term> order_by;
  bool descending = false;
  std::optional<std::uint64_t> limit;
  SourcePos pos;
  bool operator==(const SelectAst&) const = default;
};

enum class SetOp { kUnion, kIntersect, kExcept };

struct QueryAst {
  std::vector<SelectAst> selects;
  std::vector<SetOp> setops;  // setops[i] joins selects[i] and selects[i + 1]
  bool operator==(const QueryAst&) const = default;
};

// Throws ParseError.
QueryAst Parse(std::string_view text);
// A bare boolean expression (used for join filters). Throws ParseError.
Expr ParseExpression(std::string_view text);

// Canonical query text; Parse(ToText(ast)) == ast.
std::string ToText(const QueryAst& ast);
std::string ToText(const Expr& expr);
std::string ToText(const Term& term);
// Stable key: value rendering used by --dump-ast.
std::string DumpAst(const QueryAst& ast);

std::string_view CompareOpText(CompareOp op);
std::string_view AggregateName(AggregateFn fn);

// A term resolved against a schema: value = plus - minus + constant, where
// absent attributes contribute nothing.
struct BoundTerm {
  double constant = 0;
  std::optional<AttributeRef> plus, minus;
  std::string text;

  double Eval(const SkyObject& o) const;
  bool IsConstant() const { return !plus && !minus; }
  bool IsTag() const;
};

// Throws PlanError for unknown attributes or class used as a number.
BoundTerm BindTerm(const Term& term, const Schema& schema);

// Compiled boolean predicate over records.
class Predicate {
 public:
  struct Node;

  bool operator()(const SkyObject& o) const;
  // Attribute names the predicate reads.
  const std::vector<std::string>& attributes() const { return attributes_; }
  bool NeedsFull() const { return needs_full_; }
  bool IsTrue() const { return !root_; }
  const std::string& text() const { return text_; }

  // Throws PlanError (with position) for unknown attributes, unknown frames,
  // type mismatches and out-of-domain spatial arguments.
  static Predicate Compile(const Expr& expr, const Schema& schema, const FrameRegistry& frames);
  static Predicate True();

 private:
  std::shared_ptr<const Node> root_;
  std::vector<std::string> attributes_;
  bool needs_full_ = false;
  std::string text_;
};

// Converts a spatial atom to its half-space conjunction. Throws PlanError.
Convex SpatialToConvex(const SpatialAtom& atom, const FrameRegistry& frames, SourcePos pos = {});

}  // namespace skyq

#endif  // SKYQ_QUERY_H_
