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

#include <random>

#include "fixtures.h"
#include "skyq/error.h"
#include "skyq/query.h"

namespace skyq {
namespace {

std::string ErrorOf(std::string_view text) {
  try {
    Parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseTest, CountQuery) {
  const QueryAst ast = Parse("SELECT COUNT FROM cat WHERE r < 22");
  ASSERT_EQ(ast.selects.size(), 1u);
  const SelectAst& s = ast.selects[0];
  ASSERT_EQ(s.projection.kind, ProjectionSpec::Kind::kItems);
  ASSERT_EQ(s.projection.items.size(), 1u);
  EXPECT_EQ(s.projection.items[0].aggregate, AggregateFn::kCount);
  EXPECT_TRUE(s.projection.IsAggregate());
  EXPECT_EQ(s.catalog, "cat");
  EXPECT_EQ(s.where.kind, Expr::Kind::kCompare);
  EXPECT_EQ(s.where.op, CompareOp::kLt);
  EXPECT_EQ(s.where.lhs.first.ident, "r");
  EXPECT_DOUBLE_EQ(s.where.rhs.first.number, 22);
}

TEST(ParseTest, SpatialAndClassTest) {
  const QueryAst ast = Parse("SELECT TAG FROM cat WHERE CIRCLE(185.0, 2.0, 3600) AND class = QSO");
  const Expr& w = ast.selects[0].where;
  ASSERT_EQ(w.kind, Expr::Kind::kAnd);
  ASSERT_EQ(w.children.size(), 2u);
  EXPECT_EQ(w.children[0].kind, Expr::Kind::kSpatial);
  EXPECT_EQ(w.children[0].spatial.kind, SpatialAtom::Kind::kCircle);
  EXPECT_EQ(w.children[0].spatial.args, (std::vector<double>{185.0, 2.0, 3600}));
  EXPECT_EQ(w.children[1].kind, Expr::Kind::kCompare);
  EXPECT_EQ(w.children[1].rhs.first.ident, "QSO");
  EXPECT_TRUE(w.HasSpatial());
}

TEST(ParseTest, ErrorAtEndOfInput) {
  const std::string e = ErrorOf("SELECT TAG FROM cat WHERE r <");
  EXPECT_EQ(e.rfind("1:29:", 0), 0u) << e;
  EXPECT_NE(e.find("'<'"), std::string::npos) << e;
}

TEST(ParseTest, ErrorPositions) {
  EXPECT_EQ(ErrorOf("SELECT TAG FROM cat\nWHERE r < 22 AND AND").rfind("2:18:", 0), 0u);
  EXPECT_EQ(ErrorOf("SELECT TAG FROM cat WHERE SPHERE(1, 2)").rfind("1:27:", 0), 0u);
  EXPECT_NE(ErrorOf("SELECT TAG FROM cat WHERE SPHERE(1, 2)").find("unknown function"),
            std::string::npos);
  EXPECT_EQ(ErrorOf("SELECT TAG FROM cat WHERE (r < 22").rfind("1:32:", 0), 0u);
  EXPECT_EQ(ErrorOf("SELECT TAG cat WHERE r < 22").rfind("1:12:", 0), 0u);
  EXPECT_EQ(ErrorOf("SELECT TAG FROM cat WHERE r < 22 LIMIT 2.5").rfind("1:40:", 0), 0u);
  EXPECT_EQ(ErrorOf("SELECT TAG FROM cat WHERE r # 22").rfind("1:29:", 0), 0u);
  EXPECT_EQ(ErrorOf("SELECT TAG FROM cat WHERE CIRCLE(1, 2) ").rfind("1:38:", 0), 0u);
  EXPECT_FALSE(ErrorOf("").empty());
}

TEST(ParseTest, KeywordsAreCaseInsensitive) {
  EXPECT_EQ(Parse("select tag from cat where r < 22 order by g desc limit 5"),
            Parse("SELECT TAG FROM cat WHERE r < 22 ORDER BY g DESC LIMIT 5"));
}

TEST(ParseTest, PrecedenceAndNesting) {
  const Expr e = ParseExpression("a < 1 OR b < 2 AND NOT (c < 3 OR d < 4)");
  ASSERT_EQ(e.kind, Expr::Kind::kOr);
  ASSERT_EQ(e.children.size(), 2u);
  EXPECT_EQ(e.children[1].kind, Expr::Kind::kAnd);
  EXPECT_EQ(e.children[1].children[1].kind, Expr::Kind::kNot);
  EXPECT_EQ(e.children[1].children[1].children[0].kind, Expr::Kind::kOr);
  // Chains flatten to n-ary junctions.
  EXPECT_EQ(ParseExpression("a < 1 AND b < 2 AND c < 3").children.size(), 3u);
}

TEST(ParseTest, ColorsAggregatesAndSetOps) {
  const QueryAst ast = Parse(
      "SELECT obj_id, g - r, MIN(r) FROM cat WHERE g - r > 0.4 "
      "UNION SELECT obj_id, g - r, MIN(r) FROM cat WHERE u < 18 "
      "EXCEPT SELECT obj_id, g - r, MIN(r) FROM cat WHERE size > -1");
  ASSERT_EQ(ast.selects.size(), 3u);
  EXPECT_EQ(ast.setops, (std::vector<SetOp>{SetOp::kUnion, SetOp::kExcept}));
  const auto& items = ast.selects[0].projection.items;
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[1].term.minus->ident, "r");
  EXPECT_EQ(items[2].aggregate, AggregateFn::kMin);
  EXPECT_TRUE(ast.selects[0].where.lhs.minus.has_value());
  EXPECT_DOUBLE_EQ(ast.selects[2].where.rhs.first.number, -1);
}

TEST(ParseTest, DumpAstIsStable) {
  const std::string dump = DumpAst(Parse("SELECT COUNT FROM cat WHERE r < 22"));
  EXPECT_NE(dump.find("query:"), std::string::npos);
  EXPECT_NE(dump.find("projection:"), std::string::npos);
  EXPECT_NE(dump.find("compare:"), std::string::npos);
  EXPECT_EQ(dump, DumpAst(Parse("select count from cat where r<22")));
}

// Random ASTs for the print/parse round trip.
class AstGen {
 public:
  explicit AstGen(std::uint64_t seed) : rng_(seed) {}

  QueryAst Query() {
    QueryAst q;
    const int n = Pick(3) + 1;
    const ProjectionSpec proj = Projection();
    for (int i = 0; i < n; ++i) {
      SelectAst s;
      s.projection = proj;
      s.catalog = "cat";
      s.where = ExprOf(3);
      if (n == 1 && Pick(3) == 0) {
        s.order_by = TermOf();
        s.descending = Pick(2) == 0;
      }
      if (n == 1 && Pick(3) == 0) s.limit = static_cast<std::uint64_t>(Pick(1000));
      q.selects.push_back(std::move(s));
      if (i > 0) q.setops.push_back(static_cast<SetOp>(Pick(3)));
    }
    return q;
  }

 private:
  int Pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  double Num() {
    const double raw = std::uniform_real_distribution<double>(-400, 400)(rng_);
    return Pick(2) ? std::round(raw) : raw;
  }
  Operand Attr() {
    static const char* kNames[] = {"r", "g", "u", "size", "obj_id", "ra", "dec", "x0"};
    Operand o;
    o.ident = kNames[Pick(8)];
    return o;
  }
  Term TermOf() {
    Term t;
    t.first = Attr();
    if (Pick(3) == 0) t.minus = Attr();
    return t;
  }
  ProjectionSpec Projection() {
    ProjectionSpec p;
    p.kind = static_cast<ProjectionSpec::Kind>(Pick(3));
    if (p.kind == ProjectionSpec::Kind::kItems) {
      const int n = Pick(3) + 1;
      for (int i = 0; i < n; ++i) {
        SelectItem item;
        const int k = Pick(5);
        if (k < 4) item.aggregate = static_cast<AggregateFn>(k);
        if (k != 0) item.term = TermOf();
        p.items.push_back(item);
      }
    }
    return p;
  }
  Expr ExprOf(int depth) {
    Expr e;
    const int k = depth > 0 ? Pick(6) : 3 + Pick(3);
    if (k <= 1) {
      e.kind = k == 0 ? Expr::Kind::kAnd : Expr::Kind::kOr;
      const int n = 2 + Pick(2);
      for (int i = 0; i < n; ++i) {
        Expr c = ExprOf(depth - 1);
        // A same-kind child would flatten on re-parse.
        if (c.kind == e.kind) {
          Expr wrapped;
          wrapped.kind = Expr::Kind::kNot;
          wrapped.children.push_back(std::move(c));
          c = std::move(wrapped);
        }
        e.children.push_back(std::move(c));
      }
    } else if (k == 2) {
      e.kind = Expr::Kind::kNot;
      e.children.push_back(ExprOf(depth - 1));
    } else if (k == 3 || k == 4) {
      e.kind = Expr::Kind::kCompare;
      e.lhs = TermOf();
      e.op = static_cast<CompareOp>(Pick(6));
      if (Pick(2)) {
        e.rhs.first.is_number = true;
        e.rhs.first.number = Num();
      } else {
        e.rhs = TermOf();
      }
    } else {
      e.kind = Expr::Kind::kSpatial;
      e.spatial.kind = static_cast<SpatialAtom::Kind>(Pick(3));
      switch (e.spatial.kind) {
        case SpatialAtom::Kind::kCircle:
          e.spatial.args = {Num(), Num() / 5, std::abs(Num())};
          break;
        case SpatialAtom::Kind::kLatBand:
          e.spatial.frame = Pick(2) ? "EQUATORIAL" : "GALACTIC";
          e.spatial.args = {-std::abs(Num()) / 5, std::abs(Num()) / 5};
          break;
        case SpatialAtom::Kind::kHalfSpace:
          e.spatial.args = {Num(), Num(), Num(), Num() / 400};
          break;
      }
    }
    return e;
  }

  std::mt19937_64 rng_;
};

TEST(RoundTripTest, PrintThenParseIsIdentity) {
  AstGen gen(21);
  for (int i = 0; i < 2000; ++i) {
    const QueryAst ast = gen.Query();
    const std::string text = ToText(ast);
    QueryAst back;
    ASSERT_NO_THROW(back = Parse(text)) << text;
    ASSERT_EQ(back, ast) << text;
    EXPECT_EQ(ToText(back), text);
  }
}

TEST(RoundTripTest, NumbersKeepFullPrecision) {
  const Expr e = ParseExpression("r < 0.1 AND g > 1e-300 AND u < 123456789.123456789");
  EXPECT_EQ(ParseExpression(ToText(e)), e);
  EXPECT_EQ(ParseExpression(ToText(e)).children[1].rhs.first.number, 1e-300);
}

class BindTest : public ::testing::Test {
 protected:
  Schema schema_ = testing::MakeSchema(2);
  FrameRegistry frames_;

  Predicate Compile(std::string_view text) {
    return Predicate::Compile(ParseExpression(text), schema_, frames_);
  }
  std::string PlanErrorOf(std::string_view text) {
    try {
      Compile(text);
    } catch (const PlanError& e) {
      return e.what();
    }
    return "";
  }
};

TEST_F(BindTest, EvaluatesAgainstRecords) {
  SkyObject o;
  o.pos = FromLonLat(185, 2);
  o.mag = {20, 19, 18, 17.5, 17};
  o.cls = ObjectClass::kQso;
  o.extras = {3, 4};
  EXPECT_TRUE(Compile("CIRCLE(185.0, 2.0, 3600) AND class = QSO")(o));
  EXPECT_FALSE(Compile("class != QSO")(o));
  EXPECT_TRUE(Compile("g - r > 0.99 AND g - r < 1.01")(o));
  EXPECT_TRUE(Compile("x1 - x0 = 1")(o));
  EXPECT_TRUE(Compile("NOT r > 18")(o));
  EXPECT_FALSE(Compile("CIRCLE(5, 2, 3600)")(o));
  EXPECT_TRUE(Compile("LATBAND(equatorial, 1.9, 2.1)")(o));
  EXPECT_TRUE(Compile("HALFSPACE(0, 0, 1, 0)")(o));
  EXPECT_FALSE(Compile("HALFSPACE(0, 0, -2, 0)")(o));
  EXPECT_TRUE(Compile("22 > r")(o));
}

TEST_F(BindTest, NeedsFullOnlyForExtras) {
  EXPECT_FALSE(Compile("r < 22 AND class = STAR").NeedsFull());
  EXPECT_TRUE(Compile("r < 22 OR x0 > 1").NeedsFull());
  const auto attrs = Compile("r < 22 AND g - u > 0").attributes();
  EXPECT_NE(std::find(attrs.begin(), attrs.end(), "u"), attrs.end());
}

TEST_F(BindTest, ErrorsCarryPosition) {
  EXPECT_EQ(PlanErrorOf("r < 22 AND redshift > 1").rfind("1:12:", 0), 0u);
  EXPECT_NE(PlanErrorOf("class < 3").find("1:"), std::string::npos);
  EXPECT_FALSE(PlanErrorOf("class = 3").empty());
  EXPECT_FALSE(PlanErrorOf("r = QSO").empty());
  EXPECT_FALSE(PlanErrorOf("LATBAND(ECLIPTIC, 0, 10)").empty());
  EXPECT_FALSE(PlanErrorOf("LATBAND(GALACTIC, 10, 0)").empty());
  EXPECT_FALSE(PlanErrorOf("CIRCLE(0, 95, 10)").empty());
  EXPECT_FALSE(PlanErrorOf("CIRCLE(0, 0, -1)").empty());
  EXPECT_FALSE(PlanErrorOf("HALFSPACE(0, 0, 0, 0)").empty());
  EXPECT_FALSE(PlanErrorOf("HALFSPACE(0, 0, 1, 2)").empty());
}

TEST_F(BindTest, SpatialConversion) {
  const Convex cap = SpatialToConvex(ParseExpression("CIRCLE(10, 20, 60)").spatial, frames_);
  ASSERT_EQ(cap.constraints.size(), 1u);
  EXPECT_NEAR(cap.constraints[0].offset, std::cos(ArcsecToRadians(60)), 1e-15);
  const Convex band = SpatialToConvex(ParseExpression("LATBAND(GALACTIC, 40, 90)").spatial, frames_);
  EXPECT_EQ(band.constraints.size(), 2u);
  const Convex h = SpatialToConvex(ParseExpression("HALFSPACE(0, 0, 2, 1)").spatial, frames_);
  EXPECT_NEAR(h.constraints[0].offset, 0.5, 1e-15);
}

}  // namespace
}  // namespace skyq
