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

#include "skyq/error.h"
#include "skyq/query.h"

namespace skyq {

struct Predicate::Node {
  enum class Kind { kAnd, kOr, kNot, kCompare, kClass, kRegion };
  Kind kind = Kind::kCompare;
  std::vector<Node> children;
  BoundTerm lhs, rhs;
  CompareOp op = CompareOp::kEq;
  ObjectClass cls = ObjectClass::kUnknown;
  Convex convex;

  bool Eval(const SkyObject& o) const {
    switch (kind) {
      case Kind::kAnd:
        for (const auto& c : children) {
          if (!c.Eval(o)) return false;
        }
        return true;
      case Kind::kOr:
        for (const auto& c : children) {
          if (c.Eval(o)) return true;
        }
        return false;
      case Kind::kNot:
        return !children.front().Eval(o);
      case Kind::kCompare: {
        const double a = lhs.Eval(o);
        const double b = rhs.Eval(o);
        switch (op) {
          case CompareOp::kLt:
            return a < b;
          case CompareOp::kLe:
            return a <= b;
          case CompareOp::kGt:
            return a > b;
          case CompareOp::kGe:
            return a >= b;
          case CompareOp::kEq:
            return a == b;
          case CompareOp::kNe:
            return a != b;
        }
        return false;
      }
      case Kind::kClass:
        return (o.cls == cls) == (op == CompareOp::kEq);
      case Kind::kRegion:
        return convex.Contains(o.pos);
    }
    return false;
  }
};

namespace {

[[noreturn]] void Fail(const std::string& msg, const SourcePos& pos) {
  throw PlanError(msg, pos.line, pos.column);
}

AttributeRef BindOperand(const Operand& o, const Schema& schema) {
  auto ref = ResolveAttribute(schema, o.ident);
  if (!ref) Fail("unknown attribute '" + o.ident + "'", o.pos);
  if (!ref->IsNumeric()) {
    Fail("type mismatch: '" + o.ident + "' is not numeric", o.pos);
  }
  return *ref;
}

bool IsClassOperand(const Term& t, const Schema& schema) {
  if (t.minus || t.first.is_number) return false;
  auto ref = ResolveAttribute(schema, t.first.ident);
  return ref && ref->kind == AttributeRef::Kind::kClass;
}

class Binder {
 public:
  Binder(const Schema& schema, const FrameRegistry& frames) : schema_(schema), frames_(frames) {}

  Predicate::Node Bind(const Expr& e) {
    Predicate::Node n;
    switch (e.kind) {
      case Expr::Kind::kAnd:
      case Expr::Kind::kOr:
      case Expr::Kind::kNot:
        n.kind = e.kind == Expr::Kind::kAnd   ? Predicate::Node::Kind::kAnd
                 : e.kind == Expr::Kind::kOr ? Predicate::Node::Kind::kOr
                                             : Predicate::Node::Kind::kNot;
        for (const auto& c : e.children) n.children.push_back(Bind(c));
        return n;
      case Expr::Kind::kSpatial:
        n.kind = Predicate::Node::Kind::kRegion;
        n.convex = SpatialToConvex(e.spatial, frames_, e.pos);
        return n;
      case Expr::Kind::kCompare:
        break;
    }
    const bool lclass = IsClassOperand(e.lhs, schema_);
    const bool rclass = IsClassOperand(e.rhs, schema_);
    if (lclass || rclass) {
      if (lclass && rclass) Fail("type mismatch: class compared to class", e.pos);
      const Term& other = lclass ? e.rhs : e.lhs;
      if (other.minus || other.first.is_number) {
        Fail("type mismatch: class compared to a number", other.first.pos);
      }
      auto cls = ParseClass(other.first.ident);
      if (!cls) Fail("unknown class '" + other.first.ident + "'", other.first.pos);
      if (e.op != CompareOp::kEq && e.op != CompareOp::kNe) {
        Fail("class supports only = and !=", e.pos);
      }
      Note("class");
      n.kind = Predicate::Node::Kind::kClass;
      n.cls = *cls;
      n.op = e.op;
      return n;
    }
    n.kind = Predicate::Node::Kind::kCompare;
    n.lhs = BindTerm(e.lhs, schema_);
    n.rhs = BindTerm(e.rhs, schema_);
    n.op = e.op;
    NoteTerm(n.lhs);
    NoteTerm(n.rhs);
    return n;
  }

  std::vector<std::string> attributes;
  bool needs_full = false;

 private:
  void Note(const std::string& name) {
    if (std::find(attributes.begin(), attributes.end(), name) == attributes.end()) {
      attributes.push_back(name);
    }
  }
  void NoteRef(const AttributeRef& ref) {
    Note(AttributeName(schema_, ref));
    if (!ref.IsTag()) needs_full = true;
  }
  void NoteTerm(const BoundTerm& t) {
    if (t.plus) NoteRef(*t.plus);
    if (t.minus) NoteRef(*t.minus);
  }

  const Schema& schema_;
  const FrameRegistry& frames_;
};

}  // namespace

double BoundTerm::Eval(const SkyObject& o) const {
  double v = constant;
  if (plus) v += AttributeValue(o, *plus);
  if (minus) v -= AttributeValue(o, *minus);
  return v;
}

bool BoundTerm::IsTag() const { return (!plus || plus->IsTag()) && (!minus || minus->IsTag()); }

BoundTerm BindTerm(const Term& term, const Schema& schema) {
  BoundTerm t;
  t.text = ToText(term);
  if (term.first.is_number) {
    t.constant = term.first.number;
  } else {
    t.plus = BindOperand(term.first, schema);
  }
  if (term.minus) {
    if (term.minus->is_number) {
      t.constant -= term.minus->number;
    } else {
      t.minus = BindOperand(*term.minus, schema);
    }
  }
  return t;
}

Convex SpatialToConvex(const SpatialAtom& atom, const FrameRegistry& frames, SourcePos pos) {
  try {
    switch (atom.kind) {
      case SpatialAtom::Kind::kCircle:
        return Convex{{Cap(FromLonLat(atom.args[0], atom.args[1]), atom.args[2])}};
      case SpatialAtom::Kind::kLatBand: {
        if (!frames.Contains(atom.frame)) Fail("unknown frame '" + atom.frame + "'", pos);
        return LatitudeBand(frames.Find(atom.frame), atom.args[0], atom.args[1]);
      }
      case SpatialAtom::Kind::kHalfSpace: {
        const Vec3 n{atom.args[0], atom.args[1], atom.args[2]};
        const double norm = n.Norm();
        if (!(norm > 0) || !std::isfinite(norm)) Fail("HALFSPACE normal must be non-zero", pos);
        const double d = atom.args[3] / norm;
        if (!(d >= -1 && d <= 1)) Fail("HALFSPACE offset must lie in [-|n|, |n|]", pos);
        return Convex{{HalfSpace{UnitVec::Normalize(n), d}}};
      }
    }
  } catch (const DomainError& e) {
    Fail(e.what(), pos);
  }
  return {};
}

bool Predicate::operator()(const SkyObject& o) const { return !root_ || root_->Eval(o); }

Predicate Predicate::Compile(const Expr& expr, const Schema& schema, const FrameRegistry& frames) {
  Binder binder(schema, frames);
  Predicate p;
  p.root_ = std::make_shared<const Node>(binder.Bind(expr));
  p.attributes_ = std::move(binder.attributes);
  p.needs_full_ = binder.needs_full;
  p.text_ = ToText(expr);
  return p;
}

Predicate Predicate::True() {
  Predicate p;
  p.text_ = "true";
  return p;
}

}  // namespace skyq
