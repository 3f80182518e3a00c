#include "heapinv/checker.hpp"

#include <algorithm>
#include <set>

namespace heapinv {

namespace {

Term subst_term(const Term& t, const std::map<std::string, Term>& sub) {
  if (t.is_nil) return t;
  auto it = sub.find(t.var);
  return it == sub.end() ? t : it->second;
}

PureExprPtr subst_expr(const PureExprPtr& e,
                       const std::map<std::string, Term>& sub) {
  switch (e->kind) {
    case PureExpr::Kind::Var: {
      auto it = sub.find(e->var);
      if (it == sub.end()) return e;
      return it->second.is_nil ? PureExpr::nil()
                               : PureExpr::variable(it->second.var);
    }
    case PureExpr::Kind::Neg: return PureExpr::neg(subst_expr(e->a, sub));
    case PureExpr::Kind::Scale:
      return PureExpr::scale(e->k, subst_expr(e->a, sub));
    case PureExpr::Kind::Add:
      return PureExpr::add(subst_expr(e->a, sub), subst_expr(e->b, sub));
    default: return e;
  }
}

class Searcher {
public:
  Searcher(const StackHeapModel& m, const Formula& f, const Definitions& defs)
      : model_(m), formula_(f), defs_(defs) {
    for (const auto& v : f.existentials) unbound_ok_.insert(v);
    for (const auto& [var, val] : m.stack)
      if (!unbound_ok_.count(var)) env_[var] = val;  // existentials shadow
    for (const auto& v : f.free_vars())
      if (!env_.count(v))
        throw CheckError("unbound free variable '" + v + "'");

    // Candidate values for existential instantiation: everything observable
    // in the model (Def. 1 only needs *some* value; shape formulae over a
    // finite model never need values outside it).
    std::set<Value> cand{Value::nil()};
    for (const auto& [var, val] : m.stack) cand.insert(val);
    for (const auto& [addr, cell] : m.heap) {
      cand.insert(Value::addr(addr));
      for (const auto& fv : cell.fields) cand.insert(fv);
    }
    candidates_.assign(cand.begin(), cand.end());

    unfold_cap_ = static_cast<int>(2 * m.heap.size() + f.spatial.size() + 4);
  }

  CheckOutcome run() {
    std::vector<SpatialAtom> goals;
    for (const auto& a : formula_.spatial)
      if (a.kind != SpatialAtom::Kind::Emp) goals.push_back(a);
    bool ok = true;
    for (const auto& p : formula_.pure)
      if (!add_pure(p)) ok = false;
    if (ok) solve(goals);

    CheckOutcome out;
    if (!found_) {
      out.satisfied = false;
      out.residual = model_.heap;
      return out;
    }
    out.satisfied = true;
    for (const auto& [addr, cell] : model_.heap)
      if (!best_consumed_.count(addr)) out.residual[addr] = cell;
    out.instantiation = best_inst_;
    return out;
  }

private:
  struct Mark {
    std::size_t binds, dones, pending;
    int unfolds;
  };

  Mark mark() const {
    return {bind_trail_.size(), done_trail_.size(), pending_.size(), unfolds_};
  }

  void restore(const Mark& mk) {
    while (bind_trail_.size() > mk.binds) {
      env_.erase(bind_trail_.back());
      bind_trail_.pop_back();
    }
    while (done_trail_.size() > mk.dones) {
      done_[done_trail_.back()] = false;
      done_trail_.pop_back();
    }
    pending_.resize(mk.pending);
    done_.resize(mk.pending);
    unfolds_ = mk.unfolds;
  }

  bool is_bindable(const std::string& v) const {
    return unbound_ok_.count(v) > 0;
  }

  const Value* lookup(const Term& t) const {
    static const Value kNil = Value::nil();
    if (t.is_nil) return &kNil;
    auto it = env_.find(t.var);
    return it == env_.end() ? nullptr : &it->second;
  }

  bool bind(const std::string& v, const Value& val) {
    env_[v] = val;
    bind_trail_.push_back(v);
    return propagate();
  }

  bool add_pure(const PureAtom& a) {
    pending_.push_back(a);
    done_.push_back(false);
    return propagate();
  }

  // Evaluates every pending atom whose variables are all bound; unit-
  // propagates non-negated equalities with exactly one unbound side.
  // Returns false on contradiction.
  bool propagate() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < pending_.size(); ++i) {
        if (done_[i]) continue;
        const PureAtom& a = pending_[i];
        std::set<std::string> vars;
        a.lhs->collect_vars(vars);
        a.rhs->collect_vars(vars);
        std::vector<std::string> unbound;
        for (const auto& v : vars)
          if (!env_.count(v)) unbound.push_back(v);
        if (unbound.empty()) {
          done_[i] = true;
          done_trail_.push_back(i);
          try {
            if (!eval_pure_atom(a, env_)) return false;
          } catch (const EvalError&) {
            return false;  // ill-typed under this assignment: branch fails
          }
          changed = true;
          continue;
        }
        if (unbound.size() == 1 && a.op == PureAtom::Op::Eq && !a.negated) {
          // v = e or e = v with e fully bound: bind v.
          const PureExprPtr& l = a.lhs;
          const PureExprPtr& r = a.rhs;
          const PureExprPtr* var_side = nullptr;
          const PureExprPtr* val_side = nullptr;
          if (l->kind == PureExpr::Kind::Var && l->var == unbound[0]) {
            var_side = &l;
            val_side = &r;
          } else if (r->kind == PureExpr::Kind::Var && r->var == unbound[0]) {
            var_side = &r;
            val_side = &l;
          }
          if (var_side) {
            // the other side must itself be fully bound (e.g. not v = v)
            std::set<std::string> val_vars;
            (*val_side)->collect_vars(val_vars);
            if (val_vars.count(unbound[0])) continue;
            done_[i] = true;
            done_trail_.push_back(i);
            Value v;
            try {
              v = eval_pure_expr(**val_side, env_);
            } catch (const EvalError&) {
              return false;
            }
            env_[(*var_side)->var] = v;
            bind_trail_.push_back((*var_side)->var);
            changed = true;
          }
        }
      }
    }
    return true;
  }

  void solve(const std::vector<SpatialAtom>& goals) {
    if (goals.empty()) {
      finish();
      return;
    }
    SpatialAtom goal = goals.front();
    std::vector<SpatialAtom> rest(goals.begin() + 1, goals.end());
    if (goal.kind == SpatialAtom::Kind::Emp) {
      solve(rest);
      return;
    }
    if (goal.kind == SpatialAtom::Kind::PointsTo) {
      solve_points_to(goal, rest);
      return;
    }
    solve_pred(goal, rest);
  }

  void solve_points_to(const SpatialAtom& goal,
                       const std::vector<SpatialAtom>& rest) {
    const Value* base = lookup(goal.base);
    if (base) {
      try_cell(*base, goal, rest);
      return;
    }
    if (!is_bindable(goal.base.var))
      throw CheckError("unbound free variable '" + goal.base.var + "'");
    // Unbound existential base: only unconsumed cells of the right type can
    // satisfy it.
    for (const auto& [addr, cell] : model_.heap) {
      if (consumed_.count(addr) || cell.type != goal.name) continue;
      Mark mk = mark();
      if (bind(goal.base.var, Value::addr(addr)))
        try_cell(Value::addr(addr), goal, rest);
      restore(mk);
    }
  }

  void try_cell(const Value& base, const SpatialAtom& goal,
                const std::vector<SpatialAtom>& rest) {
    if (!base.is_addr()) return;
    auto it = model_.heap.find(base.addr_token());
    if (it == model_.heap.end()) return;  // dangling address
    if (consumed_.count(it->first)) return;
    const HeapCell& cell = it->second;
    if (cell.type != goal.name) return;
    if (cell.fields.size() != goal.args.size())
      throw CheckError("field arity mismatch for type '" + goal.name + "'");

    Mark mk = mark();
    bool ok = true;
    for (std::size_t i = 0; i < goal.args.size() && ok; ++i) {
      const Term& t = goal.args[i];
      const Value* tv = lookup(t);
      if (tv) {
        ok = (*tv == cell.fields[i]);
      } else if (is_bindable(t.var)) {
        ok = bind(t.var, cell.fields[i]);
      } else {
        throw CheckError("unbound free variable '" + t.var + "'");
      }
    }
    if (ok) {
      consumed_.insert(it->first);
      solve(rest);
      consumed_.erase(it->first);
    }
    restore(mk);
  }

  void solve_pred(const SpatialAtom& goal,
                  const std::vector<SpatialAtom>& rest) {
    const PredicateDef* pd = defs_.preds.find(goal.name);
    if (!pd) throw CheckError("unknown predicate '" + goal.name + "'");
    if (goal.args.size() != pd->params.size())
      throw CheckError("arity mismatch for predicate '" + goal.name + "'");

    for (std::size_t ci = 0; ci < pd->clauses.size(); ++ci) {
      const Clause& c = pd->clauses[ci];
      bool consuming = false;
      for (const auto& a : c.spatial)
        if (a.kind == SpatialAtom::Kind::PointsTo) consuming = true;
      if (consuming && unfolds_ + 1 > unfold_cap_)
        throw CheckError("internal error: unfolding depth cap exceeded");

      std::map<std::string, Term> sub;
      for (std::size_t i = 0; i < pd->params.size(); ++i)
        sub[pd->params[i].first] = goal.args[i];
      Mark mk = mark();
      if (consuming) ++unfolds_;
      for (const auto& e : c.existentials) {
        std::string fresh = "#" + std::to_string(++fresh_counter_);
        sub[e] = Term::variable(fresh);
        unbound_ok_.insert(fresh);
      }

      // Points-to atoms first so each unfolding consumes before recursing.
      std::vector<SpatialAtom> next;
      for (const auto& a : c.spatial) {
        if (a.kind != SpatialAtom::Kind::PointsTo) continue;
        SpatialAtom na = a;
        na.base = subst_term(a.base, sub);
        for (auto& t : na.args) t = subst_term(t, sub);
        next.push_back(std::move(na));
      }
      for (const auto& a : c.spatial) {
        if (a.kind != SpatialAtom::Kind::Pred) continue;
        SpatialAtom na = a;
        for (auto& t : na.args) t = subst_term(t, sub);
        next.push_back(std::move(na));
      }
      next.insert(next.end(), rest.begin(), rest.end());

      bool ok = true;
      for (const auto& p : c.pure) {
        PureAtom np = p;
        np.lhs = subst_expr(p.lhs, sub);
        np.rhs = subst_expr(p.rhs, sub);
        if (!add_pure(np)) {
          ok = false;
          break;
        }
      }
      clause_sig_.push_back(static_cast<int>(ci));
      if (ok) solve(next);
      clause_sig_.pop_back();
      restore(mk);
    }
  }

  // All spatial goals satisfied: enumerate the existentials still left in
  // pending pure atoms, then record the reduction.
  void finish() {
    std::vector<std::string> open;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      if (done_[i]) continue;
      std::set<std::string> vars;
      pending_[i].lhs->collect_vars(vars);
      pending_[i].rhs->collect_vars(vars);
      for (const auto& v : vars)
        if (!env_.count(v) && seen.insert(v).second) open.push_back(v);
    }
    enumerate_open(open, 0);
  }

  void enumerate_open(const std::vector<std::string>& open, std::size_t idx) {
    if (idx == open.size()) {
      record();
      return;
    }
    for (const Value& v : candidates_) {
      Mark mk = mark();
      if (bind(open[idx], v)) enumerate_open(open, idx + 1);
      restore(mk);
    }
  }

  void record() {
    Instantiation inst;
    for (const auto& e : formula_.existentials) {
      auto it = env_.find(e);
      inst[e] = it == env_.end() ? Value::nil() : it->second;
    }
    if (found_) {
      if (consumed_.size() < best_consumed_.size()) return;
      if (consumed_.size() == best_consumed_.size()) {
        if (best_consumed_ < consumed_) return;
        if (consumed_ == best_consumed_) {
          if (best_sig_ < clause_sig_) return;
          if (clause_sig_ == best_sig_ && !inst_less(inst, best_inst_)) return;
        }
      }
    }
    found_ = true;
    best_consumed_ = consumed_;
    best_sig_ = clause_sig_;
    best_inst_ = std::move(inst);
  }

  bool inst_less(const Instantiation& a, const Instantiation& b) const {
    for (const auto& e : formula_.existentials) {
      const Value& va = a.at(e);
      const Value& vb = b.at(e);
      if (va < vb) return true;
      if (vb < va) return false;
    }
    return false;
  }

  const StackHeapModel& model_;
  const Formula& formula_;
  const Definitions& defs_;

  std::map<std::string, Value> env_;
  std::set<std::string> unbound_ok_;  // existentials (formula + unfolded)
  std::set<Addr> consumed_;
  std::vector<PureAtom> pending_;
  std::vector<char> done_;
  std::vector<std::string> bind_trail_;
  std::vector<std::size_t> done_trail_;
  std::vector<int> clause_sig_;
  std::vector<Value> candidates_;
  int unfolds_ = 0;
  int unfold_cap_ = 0;
  int fresh_counter_ = 0;

  bool found_ = false;
  std::set<Addr> best_consumed_;
  std::vector<int> best_sig_;
  Instantiation best_inst_;
};

}  // namespace

CheckOutcome check(const StackHeapModel& model, const Formula& f,
                   const Definitions& defs) {
  Searcher s(model, f, defs);
  return s.run();
}

SequenceOutcome check_sequence(const std::vector<StackHeapModel>& models,
                               const Formula& f, const Definitions& defs) {
  if (models.empty()) throw CheckError("empty model sequence");
  SequenceOutcome out;
  out.satisfied = true;
  for (const auto& m : models) {
    CheckOutcome one = check(m, f, defs);
    out.satisfied = out.satisfied && one.satisfied;
    out.residuals.push_back(std::move(one.residual));
    out.instantiations.push_back(std::move(one.instantiation));
  }
  return out;
}

}  // namespace heapinv
