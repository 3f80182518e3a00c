#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "heapinv/model.hpp"
#include "heapinv/types.hpp"
#include "heapinv/value.hpp"

namespace heapinv {

/// A spatial term: nil or a (stack or existential) variable.
struct Term {
  bool is_nil = true;
  std::string var;

  static Term nil() { return Term{}; }
  static Term variable(std::string name) { return Term{false, std::move(name)}; }

  bool operator==(const Term& o) const {
    return is_nil == o.is_nil && var == o.var;
  }
  bool operator<(const Term& o) const {
    if (is_nil != o.is_nil) return is_nil;
    return var < o.var;
  }
  std::string str() const { return is_nil ? "nil" : var; }
};

// -- Pure formulae ----------------------------------------------------------

struct PureExpr;
using PureExprPtr = std::shared_ptr<const PureExpr>;

/// e ::= k | x | nil | -e | e1 + e2 | k * e
struct PureExpr {
  enum class Kind { Int, Var, Nil, Neg, Add, Scale };
  Kind kind = Kind::Nil;
  std::int64_t k = 0;   // Int literal or Scale coefficient
  std::string var;      // Var
  PureExprPtr a, b;     // operands

  static PureExprPtr nil();
  static PureExprPtr integer(std::int64_t v);
  static PureExprPtr variable(std::string name);
  static PureExprPtr neg(PureExprPtr e);
  static PureExprPtr add(PureExprPtr l, PureExprPtr r);
  static PureExprPtr scale(std::int64_t c, PureExprPtr e);

  std::string str() const;
  void collect_vars(std::set<std::string>& out) const;
};

struct PureAtom {
  enum class Op { Eq, Lt };
  Op op = Op::Eq;
  bool negated = false;
  PureExprPtr lhs, rhs;

  static PureAtom eq_terms(const Term& l, const Term& r);

  std::string str() const;
};

/// A conjunction of (possibly negated) atoms.
using PureFormula = std::vector<PureAtom>;

using Valuation = std::map<std::string, Value>;

/// Standard boolean evaluation under a total valuation.
/// Throws EvalError on unbound variables or integer arithmetic over addresses.
bool eval_pure(const PureFormula& pi, const Valuation& val);
bool eval_pure_atom(const PureAtom& atom, const Valuation& val);
Value eval_pure_expr(const PureExpr& e, const Valuation& val);

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- Spatial formulae -------------------------------------------------------

struct SpatialAtom {
  enum class Kind { Emp, PointsTo, Pred };
  Kind kind = Kind::Emp;
  // PointsTo: `base -> type { fields... }`; args in declared field order.
  // Pred: `name(args...)`.
  Term base;         // PointsTo only
  std::string name;  // type name (PointsTo) or predicate name (Pred)
  std::vector<Term> args;

  static SpatialAtom emp() { return SpatialAtom{}; }
  static SpatialAtom points_to(Term b, std::string type, std::vector<Term> a) {
    SpatialAtom s;
    s.kind = Kind::PointsTo;
    s.base = std::move(b);
    s.name = std::move(type);
    s.args = std::move(a);
    return s;
  }
  static SpatialAtom pred(std::string n, std::vector<Term> a) {
    SpatialAtom s;
    s.kind = Kind::Pred;
    s.name = std::move(n);
    s.args = std::move(a);
    return s;
  }

  std::string str() const;
};

/// Symbolic heap: existentials over spatial atoms (joined by *) and a pure
/// conjunction.
struct Formula {
  std::vector<std::string> existentials;
  std::vector<SpatialAtom> spatial;
  PureFormula pure;

  std::string str() const;
  std::set<std::string> free_vars() const;
  bool is_existential(const std::string& v) const;

  /// Renames existentials to u1, u2, ... in first-occurrence order
  /// (skipping any name already free in the formula) and sorts pure
  /// equalities, so equal formulae print identically. When `rename_out`
  /// is given it receives the old-name -> new-name map.
  Formula canonical(std::map<std::string, std::string>* rename_out = nullptr) const;
};

// -- Predicate definitions ---------------------------------------------------

struct Clause {
  std::vector<std::string> existentials;
  std::vector<SpatialAtom> spatial;
  PureFormula pure;
};

struct PredicateDef {
  std::string name;
  std::vector<std::pair<std::string, FieldType>> params;  // (name, type)
  std::vector<Clause> clauses;

  std::string str() const;
};

class PredEnv {
public:
  void add(PredicateDef p) { defs_.push_back(std::move(p)); }
  const PredicateDef* find(const std::string& name) const {
    for (const auto& d : defs_)
      if (d.name == name) return &d;
    return nullptr;
  }
  const std::vector<PredicateDef>& all() const { return defs_; }

private:
  std::vector<PredicateDef> defs_;
};

/// Total map from a formula's existentials to the values certifying one model.
using Instantiation = std::map<std::string, Value>;

}  // namespace heapinv
