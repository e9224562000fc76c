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
#include <limits>
#include <utility>

#include "query_lexer.h"
#include "skyq/error.h"
#include "skyq/query.h"

namespace skyq {

using internal::Token;
using internal::TokenKind;

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(internal::Tokenize(text)) {}

  QueryAst ParseQuery() {
    QueryAst ast;
    ast.selects.push_back(ParseSelect());
    while (true) {
      if (AcceptKeyword("UNION")) {
        ast.setops.push_back(SetOp::kUnion);
      } else if (AcceptKeyword("INTERSECT")) {
        ast.setops.push_back(SetOp::kIntersect);
      } else if (AcceptKeyword("EXCEPT")) {
        ast.setops.push_back(SetOp::kExcept);
      } else {
        break;
      }
      ast.selects.push_back(ParseSelect());
    }
    ExpectEnd();
    return ast;
  }

  Expr ParseBareExpression() {
    Expr e = ParseOr();
    ExpectEnd();
    return e;
  }

 private:
  const Token& Peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& Next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void Fail(const std::string& expected) const {
    const Token& t = Peek();
    if (t.kind == TokenKind::kEnd) {
      if (pos_ == 0) throw ParseError("empty query; expected " + expected, t.line, t.column);
      const Token& last = tokens_[pos_ - 1];
      throw ParseError("unexpected end of input after '" + last.text + "'; expected " + expected,
                       last.line, last.column);
    }
    throw ParseError("expected " + expected + ", found '" + t.text + "'", t.line, t.column);
  }

  bool IsKeyword(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = Peek(ahead);
    return t.kind == TokenKind::kKeyword && t.text == kw;
  }
  bool AcceptKeyword(std::string_view kw) {
    if (!IsKeyword(kw)) return false;
    Next();
    return true;
  }
  const Token& ExpectKeyword(std::string_view kw) {
    if (!IsKeyword(kw)) Fail(std::string(kw));
    return Next();
  }
  bool Accept(TokenKind kind) {
    if (Peek().kind != kind) return false;
    Next();
    return true;
  }
  const Token& Expect(TokenKind kind, const char* what) {
    if (Peek().kind != kind) Fail(what);
    return Next();
  }
  void ExpectEnd() {
    if (Peek().kind != TokenKind::kEnd) Fail("end of query");
  }

  SelectAst ParseSelect() {
    SelectAst s;
    const Token& kw = ExpectKeyword("SELECT");
    s.pos = {kw.line, kw.column};
    s.projection = ParseProjection();
    ExpectKeyword("FROM");
    s.catalog = Expect(TokenKind::kIdent, "catalog name").text;
    ExpectKeyword("WHERE");
    s.where = ParseOr();
    if (AcceptKeyword("ORDER")) {
      ExpectKeyword("BY");
      s.order_by = ParseTerm();
      if (AcceptKeyword("DESC")) {
        s.descending = true;
      } else {
        AcceptKeyword("ASC");
      }
    }
    if (AcceptKeyword("LIMIT")) {
      const Token& n = Peek();
      if (n.kind != TokenKind::kNumber || n.number < 0 || n.number != static_cast<double>(
              static_cast<std::uint64_t>(n.number)) ||
          n.text.find_first_of(".eE") != std::string::npos) {
        Fail("non-negative integer LIMIT");
      }
      s.limit = static_cast<std::uint64_t>(n.number);
      Next();
    }
    return s;
  }

  ProjectionSpec ParseProjection() {
    ProjectionSpec p;
    if (AcceptKeyword("TAG")) {
      p.kind = ProjectionSpec::Kind::kTag;
      return p;
    }
    if (AcceptKeyword("FULL")) {
      p.kind = ProjectionSpec::Kind::kFull;
      return p;
    }
    p.kind = ProjectionSpec::Kind::kItems;
    do {
      p.items.push_back(ParseItem());
    } while (Accept(TokenKind::kComma));
    return p;
  }

  SelectItem ParseItem() {
    SelectItem item;
    if (AcceptKeyword("COUNT")) {
      item.aggregate = AggregateFn::kCount;
      // COUNT(*) is accepted as a synonym.
      if (Accept(TokenKind::kLParen)) {
        Expect(TokenKind::kStar, "'*'");
        Expect(TokenKind::kRParen, "')'");
      }
      return item;
    }
    for (auto [kw, fn] : {std::pair{"MIN", AggregateFn::kMin}, std::pair{"MAX", AggregateFn::kMax},
                          std::pair{"AVG", AggregateFn::kAvg}}) {
      if (AcceptKeyword(kw)) {
        item.aggregate = fn;
        Expect(TokenKind::kLParen, "'('");
        item.term = ParseTerm();
        Expect(TokenKind::kRParen, "')'");
        return item;
      }
    }
    if (Peek().kind == TokenKind::kIdent && Peek(1).kind == TokenKind::kLParen) {
      const Token& t = Peek();
      throw ParseError("unknown function '" + t.text + "'", t.line, t.column);
    }
    item.term = ParseTerm();
    return item;
  }

  Expr ParseOr() {
    Expr first = ParseAnd();
    if (!IsKeyword("OR")) return first;
    Expr e;
    e.kind = Expr::Kind::kOr;
    e.pos = first.pos;
    e.children.push_back(std::move(first));
    while (AcceptKeyword("OR")) e.children.push_back(ParseAnd());
    return e;
  }

  Expr ParseAnd() {
    Expr first = ParseUnary();
    if (!IsKeyword("AND")) return first;
    Expr e;
    e.kind = Expr::Kind::kAnd;
    e.pos = first.pos;
    e.children.push_back(std::move(first));
    while (AcceptKeyword("AND")) e.children.push_back(ParseUnary());
    return e;
  }

  Expr ParseUnary() {
    const Token& t = Peek();
    const SourcePos pos{t.line, t.column};
    if (AcceptKeyword("NOT")) {
      Expr e;
      e.kind = Expr::Kind::kNot;
      e.pos = pos;
      e.children.push_back(ParseUnary());
      return e;
    }
    if (Accept(TokenKind::kLParen)) {
      Expr e = ParseOr();
      Expect(TokenKind::kRParen, "')'");
      return e;
    }
    if (IsKeyword("CIRCLE") || IsKeyword("LATBAND") || IsKeyword("HALFSPACE")) {
      return ParseSpatial();
    }
    if (t.kind == TokenKind::kIdent && Peek(1).kind == TokenKind::kLParen) {
      throw ParseError("unknown function '" + t.text + "'", t.line, t.column);
    }
    if (t.kind != TokenKind::kIdent && t.kind != TokenKind::kNumber &&
        t.kind != TokenKind::kMinus) {
      Fail("a comparison, spatial function, NOT or '('");
    }
    Expr e;
    e.kind = Expr::Kind::kCompare;
    e.pos = pos;
    e.lhs = ParseTerm();
    switch (Peek().kind) {
      case TokenKind::kLt:
        e.op = CompareOp::kLt;
        break;
      case TokenKind::kLe:
        e.op = CompareOp::kLe;
        break;
      case TokenKind::kGt:
        e.op = CompareOp::kGt;
        break;
      case TokenKind::kGe:
        e.op = CompareOp::kGe;
        break;
      case TokenKind::kEq:
        e.op = CompareOp::kEq;
        break;
      case TokenKind::kNe:
        e.op = CompareOp::kNe;
        break;
      default:
        Fail("comparison operator");
    }
    Next();
    e.rhs = ParseTerm();
    return e;
  }

  Expr ParseSpatial() {
    const Token& kw = Next();
    Expr e;
    e.kind = Expr::Kind::kSpatial;
    e.pos = {kw.line, kw.column};
    std::size_t arity = 0;
    if (kw.text == "CIRCLE") {
      e.spatial.kind = SpatialAtom::Kind::kCircle;
      arity = 3;
    } else if (kw.text == "LATBAND") {
      e.spatial.kind = SpatialAtom::Kind::kLatBand;
      arity = 2;
    } else {
      e.spatial.kind = SpatialAtom::Kind::kHalfSpace;
      arity = 4;
    }
    Expect(TokenKind::kLParen, "'('");
    if (e.spatial.kind == SpatialAtom::Kind::kLatBand) {
      e.spatial.frame = Expect(TokenKind::kIdent, "frame name").text;
      Expect(TokenKind::kComma, "','");
    }
    for (std::size_t i = 0; i < arity; ++i) {
      if (i > 0) Expect(TokenKind::kComma, "','");
      e.spatial.args.push_back(ParseSignedNumber());
    }
    Expect(TokenKind::kRParen, "')'");
    return e;
  }

  double ParseSignedNumber() {
    const bool negative = Accept(TokenKind::kMinus);
    const double v = Expect(TokenKind::kNumber, "number").number;
    return negative ? -v : v;
  }

  Operand ParseOperand() {
    const Token& t = Peek();
    Operand o;
    o.pos = {t.line, t.column};
    if (t.kind == TokenKind::kIdent) {
      o.ident = Next().text;
      return o;
    }
    if (t.kind == TokenKind::kNumber || t.kind == TokenKind::kMinus) {
      o.is_number = true;
      o.number = ParseSignedNumber();
      return o;
    }
    Fail("attribute or number");
  }

  Term ParseTerm() {
    Term term;
    term.first = ParseOperand();
    if (Accept(TokenKind::kMinus)) term.minus = ParseOperand();
    return term;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Expr::operator==(const Expr& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::kAnd:
    case Kind::kOr:
    case Kind::kNot:
      return children == o.children;
    case Kind::kCompare:
      return lhs == o.lhs && op == o.op && rhs == o.rhs;
    case Kind::kSpatial:
      return spatial == o.spatial;
  }
  return false;
}

bool Expr::HasSpatial() const {
  if (kind == Kind::kSpatial) return true;
  for (const auto& c : children) {
    if (c.HasSpatial()) return true;
  }
  return false;
}

bool ProjectionSpec::IsAggregate() const {
  if (kind != Kind::kItems) return false;
  for (const auto& item : items) {
    if (item.aggregate) return true;
  }
  return false;
}

QueryAst Parse(std::string_view text) { return Parser(text).ParseQuery(); }

Expr ParseExpression(std::string_view text) { return Parser(text).ParseBareExpression(); }

}  // namespace skyq
