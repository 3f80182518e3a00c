#include "heapinv/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include "heapinv/partition.hpp"

namespace heapinv {

namespace {

Term rename_term(const Term& t, const std::map<std::string, std::string>& ren) {
  if (t.is_nil) return t;
  auto it = ren.find(t.var);
  return it == ren.end() ? t : Term::variable(it->second);
}

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

void rename_formula(Formula& f, const std::map<std::string, std::string>& ren) {
  for (auto& a : f.spatial) {
    a.base = rename_term(a.base, ren);
    for (auto& t : a.args) t = rename_term(t, ren);
  }
  for (auto& p : f.pure) {
    p.lhs = rename_expr(p.lhs, ren);
    p.rhs = rename_expr(p.rhs, ren);
  }
}

// Discovery sequence of heap addresses reachable from `start`, preorder,
// pointer fields in declared order.
std::vector<Addr> region(const StackHeapModel& m, const Value& start) {
  std::vector<Addr> seq;
  if (!start.is_addr()) return seq;
  std::set<Addr> visited;
  std::vector<Addr> stack{start.addr_token()};
  while (!stack.empty()) {
    Addr a = stack.back();
    stack.pop_back();
    if (!visited.insert(a).second) continue;
    seq.push_back(a);
    auto it = m.heap.find(a);
    if (it == m.heap.end()) continue;
    const auto& fields = it->second.fields;
    for (auto fit = fields.rbegin(); fit != fields.rend(); ++fit)
      if (fit->is_addr()) stack.push_back(fit->addr_token());
  }
  return seq;
}

}  // namespace

std::vector<std::string> variable_order(
    const std::vector<StackHeapModel>& models,
    const std::vector<std::string>& params) {
  if (models.empty()) return {};

  std::set<std::string> remaining;
  for (const auto& [var, val] : models.front().stack) {
    bool pointer = true;
    for (const auto& m : models) {
      auto it = m.stack.find(var);
      if (it == m.stack.end() || it->second.is_int()) pointer = false;
    }
    if (pointer) remaining.insert(var);
  }
  const bool has_res = remaining.erase("res") > 0;

  std::vector<std::string> order;
  std::vector<std::string> pending;  // discovered, FIFO
  std::size_t param_idx = 0;

  while (!remaining.empty()) {
    std::string v;
    while (!pending.empty() && !remaining.count(pending.front()))
      pending.erase(pending.begin());
    if (!pending.empty()) {
      v = pending.front();
      pending.erase(pending.begin());
    } else {
      while (param_idx < params.size() && !remaining.count(params[param_idx]))
        ++param_idx;
      v = param_idx < params.size() ? params[param_idx++]
                                    : *remaining.begin();
    }
    order.push_back(v);
    remaining.erase(v);

    // Variables valued inside v's reachable region come next, in discovery
    // order (earliest model, earliest position).
    std::map<std::pair<std::size_t, std::size_t>, std::set<std::string>> found;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      auto vit = models[mi].stack.find(v);
      if (vit == models[mi].stack.end()) continue;
      std::vector<Addr> seq = region(models[mi], vit->second);
      std::map<Addr, std::size_t> pos;
      for (std::size_t i = 0; i < seq.size(); ++i) pos.emplace(seq[i], i);
      for (const auto& w : remaining) {
        auto wit = models[mi].stack.find(w);
        if (wit == models[mi].stack.end() || !wit->second.is_addr()) continue;
        auto p = pos.find(wit->second.addr_token());
        if (p != pos.end()) found[{mi, p->second}].insert(w);
      }
    }
    std::set<std::string> queued(pending.begin(), pending.end());
    for (const auto& [key, vars] : found)
      for (const auto& w : vars)
        if (queued.insert(w).second) pending.push_back(w);
  }

  if (has_res) order.push_back("res");
  return order;
}

void infer_pure(InferenceResult& r, const std::vector<std::string>& var_order) {
  const std::size_t n = r.residual_models.size();

  // Value vector per term; integer-valued terms never join (pure inference
  // is over pointer equalities only).
  std::map<std::string, std::vector<Value>> vecs;
  std::set<std::string> stack_vars;
  for (const auto& [var, val] : r.residual_models.front().stack) {
    std::vector<Value> vs;
    bool ok = true;
    for (const auto& m : r.residual_models) {
      auto it = m.stack.find(var);
      if (it == m.stack.end() || it->second.is_int()) {
        ok = false;
        break;
      }
      vs.push_back(it->second);
    }
    if (ok) {
      vecs[var] = std::move(vs);
      stack_vars.insert(var);
    }
  }
  for (const auto& e : r.formula.existentials) {
    std::vector<Value> vs;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = r.instantiations[i].find(e);
      if (it == r.instantiations[i].end() || it->second.is_int()) {
        ok = false;
        break;
      }
      vs.push_back(it->second);
    }
    if (ok) vecs[e] = std::move(vs);
  }
  vecs["nil"] = std::vector<Value>(n, Value::nil());

  std::map<std::vector<Value>, std::vector<std::string>> classes;
  for (const auto& [name, vs] : vecs) classes[vs].push_back(name);

  auto order_pos = [&](const std::string& v) {
    for (std::size_t i = 0; i < var_order.size(); ++i)
      if (var_order[i] == v) return i;
    return var_order.size();
  };
  auto ex_pos = [&](const std::string& e) {
    for (std::size_t i = 0; i < r.formula.existentials.size(); ++i)
      if (r.formula.existentials[i] == e) return i;
    return r.formula.existentials.size();
  };

  PureFormula emitted;
  std::map<std::string, std::string> subst;
  for (const auto& [vs, members] : classes) {
    if (members.size() < 2) continue;
    bool has_nil = false;
    std::vector<std::string> svars, evars;
    for (const auto& m : members) {
      if (m == "nil")
        has_nil = true;
      else if (stack_vars.count(m))
        svars.push_back(m);
      else
        evars.push_back(m);
    }
    std::sort(svars.begin(), svars.end(),
              [&](const std::string& a, const std::string& b) {
                auto pa = order_pos(a), pb = order_pos(b);
                return pa != pb ? pa < pb : a < b;
              });
    std::sort(evars.begin(), evars.end(),
              [&](const std::string& a, const std::string& b) {
                return ex_pos(a) < ex_pos(b);
              });
    if (has_nil) {
      // nil is the representative; existentials equal to nil are kept and
      // the equality is reported, mirroring the u = nil conjuncts.
      for (const auto& v : svars)
        emitted.push_back(PureAtom::eq_terms(Term::variable(v), Term::nil()));
      for (const auto& e : evars)
        emitted.push_back(PureAtom::eq_terms(Term::variable(e), Term::nil()));
    } else if (!svars.empty()) {
      const std::string& rep = svars.front();
      for (std::size_t i = 1; i < svars.size(); ++i)
        emitted.push_back(
            PureAtom::eq_terms(Term::variable(svars[i]), Term::variable(rep)));
      for (const auto& e : evars) subst[e] = rep;  // silently eliminated
    } else {
      const std::string& rep = evars.front();
      for (std::size_t i = 1; i < evars.size(); ++i) subst[evars[i]] = rep;
    }
  }

  r.formula.pure = std::move(emitted);
  if (!subst.empty()) {
    rename_formula(r.formula, subst);
    auto& ex = r.formula.existentials;
    ex.erase(std::remove_if(ex.begin(), ex.end(),
                            [&](const std::string& e) {
                              return subst.count(e) > 0;
                            }),
             ex.end());
    for (auto& inst : r.instantiations)
      for (const auto& [from, to] : subst) inst.erase(from);
  }
}

namespace {

void rank(std::vector<InferenceResult>& rs) {
  std::stable_sort(rs.begin(), rs.end(),
                   [](const InferenceResult& a, const InferenceResult& b) {
                     auto ra = a.total_residual_cells();
                     auto rb = b.total_residual_cells();
                     if (ra != rb) return ra < rb;
                     return a.formula.existentials.size() <
                            b.formula.existentials.size();
                   });
}

void dedup(std::vector<InferenceResult>& rs) {
  std::set<std::string> seen;
  std::vector<InferenceResult> out;
  for (auto& r : rs)
    if (seen.insert(r.formula.canonical().str()).second)
      out.push_back(std::move(r));
  rs = std::move(out);
}

}  // namespace

std::vector<InferenceResult> infer(const std::vector<StackHeapModel>& models,
                                   const Definitions& defs,
                                   const InferOptions& opts) {
  if (models.empty()) throw std::invalid_argument("no models to analyze");
  std::set<std::string> vars;
  for (const auto& [var, val] : models.front().stack) vars.insert(var);
  for (const auto& m : models) {
    if (m.location != models.front().location)
      throw std::invalid_argument("models span multiple locations");
    std::set<std::string> mv;
    for (const auto& [var, val] : m.stack) mv.insert(var);
    if (mv != vars)
      throw std::invalid_argument("inconsistent stacks across models");
  }

  const std::vector<std::string> order = variable_order(models, opts.params);

  std::vector<InferenceResult> R;
  {
    InferenceResult init;
    init.formula.spatial.push_back(SpatialAtom::emp());
    init.residual_models = models;
    init.instantiations.assign(models.size(), {});
    R.push_back(std::move(init));
  }

  FreshNamer fresh;
  for (const auto& v : order) {
    std::vector<InferenceResult> next;
    for (const auto& tup : R) {
      PartitionResult part = split_heap(tup.residual_models, v, defs.types);
      std::vector<AtomResult> atoms =
          infer_atom(v, part.sub_models, part.common_boundary, defs, fresh);
      for (auto& atom : atoms) {
        InferenceResult nr;
        nr.formula = tup.formula;
        nr.formula.existentials.insert(nr.formula.existentials.end(),
                                       atom.formula.existentials.begin(),
                                       atom.formula.existentials.end());
        nr.formula.spatial.insert(nr.formula.spatial.end(),
                                  atom.formula.spatial.begin(),
                                  atom.formula.spatial.end());
        for (std::size_t i = 0; i < models.size(); ++i) {
          StackHeapModel m = part.rest_models[i];
          for (const auto& [addr, cell] : atom.residuals[i])
            m.heap[addr] = cell;
          nr.residual_models.push_back(std::move(m));
          Instantiation inst = tup.instantiations[i];
          inst.insert(atom.instantiations[i].begin(),
                      atom.instantiations[i].end());
          nr.instantiations.push_back(std::move(inst));
        }
        next.push_back(std::move(nr));
      }
    }
    for (auto& t : next) infer_pure(t, order);
    rank(next);
    dedup(next);
    if (next.size() > opts.width) next.resize(opts.width);
    R = std::move(next);
  }

  // Finalization: rebind out-of-scope stack variables as existentials, drop
  // emp conjuncts when real atoms exist, and canonicalize names.
  for (auto& r : R) {
    if (opts.scope_vars) {
      std::set<std::string> scope(opts.scope_vars->begin(),
                                  opts.scope_vars->end());
      for (const auto& v : r.formula.free_vars()) {
        if (scope.count(v) || v == "nil") continue;
        auto it = r.residual_models.front().stack.find(v);
        if (it == r.residual_models.front().stack.end()) continue;
        r.formula.existentials.push_back(v);
        for (std::size_t i = 0; i < r.residual_models.size(); ++i)
          r.instantiations[i][v] = r.residual_models[i].stack.at(v);
      }
    }
    std::vector<SpatialAtom> keep;
    for (const auto& a : r.formula.spatial)
      if (a.kind != SpatialAtom::Kind::Emp) keep.push_back(a);
    if (keep.empty()) keep.push_back(SpatialAtom::emp());
    r.formula.spatial = std::move(keep);

    std::map<std::string, std::string> ren;
    r.formula = r.formula.canonical(&ren);
    for (auto& inst : r.instantiations) {
      Instantiation renamed;
      for (const auto& [name, val] : inst) {
        auto it = ren.find(name);
        renamed[it == ren.end() ? name : it->second] = val;
      }
      inst = std::move(renamed);
    }
  }
  rank(R);
  dedup(R);
  return R;
}

namespace {

bool frame_consistent(
    const InferenceResult& pre,
    const std::vector<std::pair<std::string, const InferenceResult*>>& posts) {
  std::map<std::string, const Heap*> post_residuals;
  for (const auto& [loc, q] : posts)
    for (std::size_t i = 0; i < q->residual_models.size(); ++i) {
      const auto& m = q->residual_models[i];
      if (!post_residuals.emplace(m.test_id, &m.heap).second)
        return false;  // one run must reach exactly one exit
    }
  std::set<std::string> matched;
  for (const auto& m : pre.residual_models) {
    auto it = post_residuals.find(m.test_id);
    if (it == post_residuals.end()) return false;
    if (m.heap != *it->second) return false;
    matched.insert(m.test_id);
  }
  return matched.size() == post_residuals.size();
}

}  // namespace

std::vector<Specification> validate(
    const std::vector<InferenceResult>& pre_results,
    const std::map<std::string, std::vector<InferenceResult>>& post_results,
    std::size_t max_invalid) {
  std::vector<Specification> valid_specs, invalid_specs;
  if (post_results.empty()) return valid_specs;

  std::vector<std::string> locs;
  for (const auto& [loc, rs] : post_results) locs.push_back(loc);

  std::vector<std::pair<std::string, const InferenceResult*>> chosen;
  auto recurse = [&](auto&& self, std::size_t li,
                     const InferenceResult& pre) -> void {
    if (li == locs.size()) {
      bool ok = frame_consistent(pre, chosen);
      if (!ok && invalid_specs.size() >= max_invalid) return;
      Specification s;
      s.pre = pre;
      for (const auto& [loc, q] : chosen) s.posts.emplace_back(loc, *q);
      s.valid = ok;
      (ok ? valid_specs : invalid_specs).push_back(std::move(s));
      return;
    }
    for (const auto& cand : post_results.at(locs[li])) {
      chosen.emplace_back(locs[li], &cand);
      self(self, li + 1, pre);
      chosen.pop_back();
    }
  };
  for (const auto& pre : pre_results) recurse(recurse, 0, pre);

  valid_specs.insert(valid_specs.end(),
                     std::make_move_iterator(invalid_specs.begin()),
                     std::make_move_iterator(invalid_specs.end()));
  return valid_specs;
}

}  // namespace heapinv
