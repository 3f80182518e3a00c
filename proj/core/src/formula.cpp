#include "heapinv/formula.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace heapinv {

std::string Value::str() const {
  switch (kind_) {
    case Kind::Nil: return "nil";
    case Kind::Int: return std::to_string(int_value());
    case Kind::Addr: {
      std::ostringstream os;
      os << "0x" << std::hex << bits_;
      return os.str();
    }
  }
  return "?";
}

void validate_model(const StackHeapModel& m, const TypeEnv& types) {
  for (const auto& [addr, cell] : m.heap) {
    const TypeDecl* td = types.find(cell.type);
    std::ostringstream where;
    where << "cell 0x" << std::hex << addr;
    if (!td)
      throw std::runtime_error("unknown type '" + cell.type + "' at " + where.str());
    if (cell.fields.size() != td->fields.size())
      throw std::runtime_error("arity mismatch at " + where.str() + ": type '" +
                               cell.type + "' declares " +
                               std::to_string(td->fields.size()) + " fields, got " +
                               std::to_string(cell.fields.size()));
    for (std::size_t i = 0; i < cell.fields.size(); ++i) {
      const bool ptr_field = td->fields[i].second.is_pointer;
      if (ptr_field && cell.fields[i].is_int())
        throw std::runtime_error("integer value in pointer field '" +
                                 td->fields[i].first + "' at " + where.str());
      if (!ptr_field && !cell.fields[i].is_int())
        throw std::runtime_error("pointer value in integer field '" +
                                 td->fields[i].first + "' at " + where.str());
    }
  }
}

// -- PureExpr ----------------------------------------------------------------

PureExprPtr PureExpr::nil() {
  auto e = std::make_shared<PureExpr>();
  e->kind = Kind::Nil;
  return e;
}
PureExprPtr PureExpr::integer(std::int64_t v) {
  auto e = std::make_shared<PureExpr>();
  e->kind = Kind::Int;
  e->k = v;
  return e;
}
PureExprPtr PureExpr::variable(std::string name) {
  auto e = std::make_shared<PureExpr>();
  e->kind = Kind::Var;
  e->var = std::move(name);
  return e;
}
PureExprPtr PureExpr::neg(PureExprPtr x) {
  auto e = std::make_shared<PureExpr>();
  e->kind = Kind::Neg;
  e->a = std::move(x);
  return e;
}
PureExprPtr PureExpr::add(PureExprPtr l, PureExprPtr r) {
  auto e = std::make_shared<PureExpr>();
  e->kind = Kind::Add;
  e->a = std::move(l);
  e->b = std::move(r);
  return e;
}
PureExprPtr PureExpr::scale(std::int64_t c, PureExprPtr x) {
  auto e = std::make_shared<PureExpr>();
  e->kind = Kind::Scale;
  e->k = c;
  e->a = std::move(x);
  return e;
}

std::string PureExpr::str() const {
  switch (kind) {
    case Kind::Int: return std::to_string(k);
    case Kind::Var: return var;
    case Kind::Nil: return "nil";
    case Kind::Neg: return "-(" + a->str() + ")";
    case Kind::Add: return a->str() + " + " + b->str();
    case Kind::Scale: return std::to_string(k) + " * " + a->str();
  }
  return "?";
}

void PureExpr::collect_vars(std::set<std::string>& out) const {
  switch (kind) {
    case Kind::Var: out.insert(var); break;
    case Kind::Neg:
    case Kind::Scale: a->collect_vars(out); break;
    case Kind::Add:
      a->collect_vars(out);
      b->collect_vars(out);
      break;
    default: break;
  }
}

PureAtom PureAtom::eq_terms(const Term& l, const Term& r) {
  PureAtom a;
  a.op = Op::Eq;
  a.lhs = l.is_nil ? PureExpr::nil() : PureExpr::variable(l.var);
  a.rhs = r.is_nil ? PureExpr::nil() : PureExpr::variable(r.var);
  return a;
}

std::string PureAtom::str() const {
  std::string core = lhs->str() + (op == Op::Eq ? " = " : " < ") + rhs->str();
  return negated ? "!(" + core + ")" : core;
}

Value eval_pure_expr(const PureExpr& e, const Valuation& val) {
  switch (e.kind) {
    case PureExpr::Kind::Int: return Value::integer(e.k);
    case PureExpr::Kind::Nil: return Value::nil();
    case PureExpr::Kind::Var: {
      auto it = val.find(e.var);
      if (it == val.end()) throw EvalError("unbound variable '" + e.var + "'");
      return it->second;
    }
    case PureExpr::Kind::Neg: {
      Value v = eval_pure_expr(*e.a, val);
      if (!v.is_int()) throw EvalError("negation of non-integer value");
      return Value::integer(-v.int_value());
    }
    case PureExpr::Kind::Add: {
      Value l = eval_pure_expr(*e.a, val);
      Value r = eval_pure_expr(*e.b, val);
      if (!l.is_int() || !r.is_int())
        throw EvalError("addition over non-integer values");
      return Value::integer(l.int_value() + r.int_value());
    }
    case PureExpr::Kind::Scale: {
      Value v = eval_pure_expr(*e.a, val);
      if (!v.is_int()) throw EvalError("scaling of non-integer value");
      return Value::integer(e.k * v.int_value());
    }
  }
  throw EvalError("malformed expression");
}

bool eval_pure_atom(const PureAtom& atom, const Valuation& val) {
  Value l = eval_pure_expr(*atom.lhs, val);
  Value r = eval_pure_expr(*atom.rhs, val);
  bool res;
  if (atom.op == PureAtom::Op::Eq) {
    res = (l == r);
  } else {
    if (!l.is_int() || !r.is_int())
      throw EvalError("'<' applied to non-integer values");
    res = l.int_value() < r.int_value();
  }
  return atom.negated ? !res : res;
}

bool eval_pure(const PureFormula& pi, const Valuation& val) {
  for (const auto& a : pi)
    if (!eval_pure_atom(a, val)) return false;
  return true;
}

// -- Spatial / Formula printing ----------------------------------------------

std::string SpatialAtom::str() const {
  switch (kind) {
    case Kind::Emp: return "emp";
    case Kind::Pred: {
      std::string s = name + "(";
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) s += ", ";
        s += args[i].str();
      }
      return s + ")";
    }
    case Kind::PointsTo: {
      // Field names are not stored here; print positionally. The parser
      // accepts both named and positional field lists.
      std::string s = base.str() + " -> " + name + " { ";
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) s += ", ";
        s += args[i].str();
      }
      return s + " }";
    }
  }
  return "?";
}

std::string Formula::str() const {
  std::string s;
  if (!existentials.empty()) {
    s += "exists ";
    for (std::size_t i = 0; i < existentials.size(); ++i) {
      if (i) s += ", ";
      s += existentials[i];
    }
    s += " . ";
  }
  if (spatial.empty()) {
    s += "emp";
  } else {
    for (std::size_t i = 0; i < spatial.size(); ++i) {
      if (i) s += " * ";
      s += spatial[i].str();
    }
  }
  for (const auto& p : pure) s += " & " + p.str();
  return s;
}

bool Formula::is_existential(const std::string& v) const {
  return std::find(existentials.begin(), existentials.end(), v) !=
         existentials.end();
}

std::set<std::string> Formula::free_vars() const {
  std::set<std::string> vars;
  for (const auto& a : spatial) {
    if (a.kind == SpatialAtom::Kind::PointsTo && !a.base.is_nil)
      vars.insert(a.base.var);
    for (const auto& t : a.args)
      if (!t.is_nil) vars.insert(t.var);
  }
  for (const auto& p : pure) {
    p.lhs->collect_vars(vars);
    p.rhs->collect_vars(vars);
  }
  for (const auto& e : existentials) vars.erase(e);
  return vars;
}

namespace {

PureExprPtr rename_expr(const PureExprPtr& e,
                        const std::map<std::string, std::string>& ren) {
  switch (e->kind) {
    case PureExpr::Kind::Var: {
      auto it = ren.find(e->var);
      return it == ren.end() ? e : PureExpr::variable(it->second);
    }
    case PureExpr::Kind::Neg: return PureExpr::neg(rename_expr(e->a, ren));
    case PureExpr::Kind::Scale:
      return PureExpr::scale(e->k, rename_expr(e->a, ren));
    case PureExpr::Kind::Add:
      return PureExpr::add(rename_expr(e->a, ren), rename_expr(e->b, ren));
    default: return e;
  }
}

Term rename_term(const Term& t, const std::map<std::string, std::string>& ren) {
  if (t.is_nil) return t;
  auto it = ren.find(t.var);
  return it == ren.end() ? t : Term::variable(it->second);
}

}  // namespace

Formula Formula::canonical(std::map<std::string, std::string>* rename_out) const {
  std::set<std::string> taken = free_vars();
  std::set<std::string> exset(existentials.begin(), existentials.end());
  std::map<std::string, std::string> ren;
  std::vector<std::string> new_ex;
  int counter = 0;
  auto assign = [&](const std::string& v) {
    if (!exset.count(v) || ren.count(v)) return;
    std::string fresh;
    do {
      fresh = "u" + std::to_string(++counter);
    } while (taken.count(fresh));
    taken.insert(fresh);
    ren[v] = fresh;
    new_ex.push_back(fresh);
  };

  for (const auto& a : spatial) {
    if (a.kind == SpatialAtom::Kind::PointsTo && !a.base.is_nil)
      assign(a.base.var);
    for (const auto& t : a.args)
      if (!t.is_nil) assign(t.var);
  }
  for (const auto& p : pure) {
    std::set<std::string> vs;
    p.lhs->collect_vars(vs);
    p.rhs->collect_vars(vs);
    for (const auto& v : vs) assign(v);
  }
  for (const auto& v : existentials) assign(v);  // unused existentials last

  Formula out;
  out.existentials = std::move(new_ex);
  for (const auto& a : spatial) {
    SpatialAtom na = a;
    na.base = rename_term(a.base, ren);
    for (auto& t : na.args) t = rename_term(t, ren);
    out.spatial.push_back(std::move(na));
  }
  for (const auto& p : pure) {
    PureAtom np = p;
    np.lhs = rename_expr(p.lhs, ren);
    np.rhs = rename_expr(p.rhs, ren);
    out.pure.push_back(std::move(np));
  }
  std::stable_sort(out.pure.begin(), out.pure.end(),
                   [](const PureAtom& x, const PureAtom& y) {
                     return x.str() < y.str();
                   });
  if (rename_out) *rename_out = std::move(ren);
  return out;
}

std::string PredicateDef::str() const {
  std::string s = "pred " + name + "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) s += ", ";
    s += params[i].first + ": " +
         (params[i].second.is_pointer ? params[i].second.pointee + "*" : "int");
  }
  s += ") :=\n";
  for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
    const Clause& c = clauses[ci];
    s += ci ? "  | " : "    ";
    if (!c.existentials.empty()) {
      s += "exists ";
      for (std::size_t i = 0; i < c.existentials.size(); ++i) {
        if (i) s += ", ";
        s += c.existentials[i];
      }
      s += " . ";
    }
    if (c.spatial.empty()) {
      s += "emp";
    } else {
      for (std::size_t i = 0; i < c.spatial.size(); ++i) {
        if (i) s += " * ";
        s += c.spatial[i].str();
      }
    }
    for (const auto& p : c.pure) s += " & " + p.str();
    s += "\n";
  }
  s += "  ;";
  return s;
}

}  // namespace heapinv
