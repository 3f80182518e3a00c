#pragma once

// Formula isomorphism up to existential renaming and equality rewriting:
// two formulae compare equal when, after substituting away existentials
// that are asserted equal to nil / a free variable / another existential,
// their atom multisets match under some bijection of the remaining
// existentials. Used to compare inferred invariants against expected ones
// whose existential names (and u = nil vs. literal nil spellings) differ.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "heapinv/formula.hpp"

namespace heapinv::testing {

namespace iso_detail {

struct UF {
  std::map<std::string, std::string> parent;
  std::string find(std::string x) {
    while (parent.count(x) && parent[x] != x) x = parent[x];
    return x;
  }
  void unite(const std::string& a, const std::string& b) {
    auto ra = find(a), rb = find(b);
    if (ra != rb) {
      parent.try_emplace(ra, ra);
      parent[ra] = rb;
    }
  }
};

inline bool plain(const PureExprPtr& e) {
  return e->kind == PureExpr::Kind::Nil || e->kind == PureExpr::Kind::Var;
}

inline std::string plain_name(const PureExprPtr& e) {
  return e->kind == PureExpr::Kind::Nil ? "nil" : e->var;
}

inline PureExprPtr subst(const PureExprPtr& e,
                         const std::map<std::string, std::string>& s) {
  switch (e->kind) {
    case PureExpr::Kind::Var: {
      auto it = s.find(e->var);
      if (it == s.end()) return e;
      return it->second == "nil" ? PureExpr::nil()
                                 : PureExpr::variable(it->second);
    }
    case PureExpr::Kind::Neg: return PureExpr::neg(subst(e->a, s));
    case PureExpr::Kind::Scale: return PureExpr::scale(e->k, subst(e->a, s));
    case PureExpr::Kind::Add:
      return PureExpr::add(subst(e->a, s), subst(e->b, s));
    default: return e;
  }
}

inline Formula normalize(const Formula& in) {
  Formula f = in.canonical();
  std::set<std::string> ex(f.existentials.begin(), f.existentials.end());

  UF uf;
  for (const auto& p : f.pure)
    if (p.op == PureAtom::Op::Eq && !p.negated && plain(p.lhs) && plain(p.rhs))
      uf.unite(plain_name(p.lhs), plain_name(p.rhs));

  // class representative: nil beats free vars beats existentials
  std::map<std::string, std::vector<std::string>> classes;
  std::set<std::string> seen;
  for (const auto& p : f.pure) {
    if (!(p.op == PureAtom::Op::Eq && !p.negated && plain(p.lhs) &&
          plain(p.rhs)))
      continue;
    for (const auto& n : {plain_name(p.lhs), plain_name(p.rhs)})
      if (seen.insert(n).second) classes[uf.find(n)].push_back(n);
  }
  std::map<std::string, std::string> sub;
  for (auto& [root, members] : classes) {
    std::string rep = members.front();
    for (const auto& m : members) {
      if (m == "nil") { rep = "nil"; break; }
      bool m_free = !ex.count(m), r_free = !ex.count(rep);
      if ((m_free && !r_free) || (m_free == r_free && m < rep)) rep = m;
    }
    for (const auto& m : members)
      if (m != rep) sub[m] = rep;
  }

  auto sub_term = [&](Term& t) {
    if (t.is_nil) return;
    auto it = sub.find(t.var);
    if (it == sub.end()) return;
    if (it->second == "nil")
      t = Term::nil();
    else
      t.var = it->second;
  };
  for (auto& a : f.spatial) {
    sub_term(a.base);
    for (auto& t : a.args) sub_term(t);
  }
  // drop emp next to other atoms
  if (f.spatial.size() > 1) {
    std::erase_if(f.spatial,
                  [](const SpatialAtom& a) { return a.kind == SpatialAtom::Kind::Emp; });
    if (f.spatial.empty()) f.spatial.push_back(SpatialAtom::emp());
  }
  PureFormula pure;
  for (auto& p : f.pure) {
    PureAtom np = p;
    np.lhs = subst(p.lhs, sub);
    np.rhs = subst(p.rhs, sub);
    if (np.op == PureAtom::Op::Eq && !np.negated &&
        np.lhs->str() == np.rhs->str())
      continue;  // now trivially true
    pure.push_back(std::move(np));
  }
  f.pure = std::move(pure);

  std::set<std::string> used = f.free_vars();
  for (const auto& a : f.spatial) {
    if (!a.base.is_nil) used.insert(a.base.var);
    for (const auto& t : a.args)
      if (!t.is_nil) used.insert(t.var);
  }
  for (const auto& p : f.pure) {
    p.lhs->collect_vars(used);
    p.rhs->collect_vars(used);
  }
  std::erase_if(f.existentials,
                [&](const std::string& v) { return !used.count(v); });
  return f.canonical();
}

struct Matcher {
  std::set<std::string> ex1, ex2;
  std::map<std::string, std::string> fwd, bwd;

  bool map_name(const std::string& a, const std::string& b) {
    bool e1 = ex1.count(a) > 0, e2 = ex2.count(b) > 0;
    if (e1 != e2) return false;
    if (!e1) return a == b;
    auto f = fwd.find(a);
    auto g = bwd.find(b);
    if (f != fwd.end()) return f->second == b;
    if (g != bwd.end()) return false;
    fwd[a] = b;
    bwd[b] = a;
    return true;
  }
  void unmap(const std::map<std::string, std::string>& fwd_save,
             const std::map<std::string, std::string>& bwd_save) {
    fwd = fwd_save;
    bwd = bwd_save;
  }

  bool term(const Term& a, const Term& b) {
    if (a.is_nil != b.is_nil) return false;
    if (a.is_nil) return true;
    return map_name(a.var, b.var);
  }
  bool expr(const PureExprPtr& a, const PureExprPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case PureExpr::Kind::Nil: return true;
      case PureExpr::Kind::Int: return a->k == b->k;
      case PureExpr::Kind::Var: return map_name(a->var, b->var);
      case PureExpr::Kind::Neg: return expr(a->a, b->a);
      case PureExpr::Kind::Scale: return a->k == b->k && expr(a->a, b->a);
      case PureExpr::Kind::Add: return expr(a->a, b->a) && expr(a->b, b->b);
    }
    return false;
  }
  bool spatial(const SpatialAtom& a, const SpatialAtom& b) {
    if (a.kind != b.kind || a.name != b.name || a.args.size() != b.args.size())
      return false;
    if (a.kind == SpatialAtom::Kind::PointsTo && !term(a.base, b.base))
      return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (!term(a.args[i], b.args[i])) return false;
    return true;
  }
  bool pure(const PureAtom& a, const PureAtom& b) {
    if (a.op != b.op || a.negated != b.negated) return false;
    return expr(a.lhs, b.lhs) && expr(a.rhs, b.rhs);
  }

  bool match_spatial(const std::vector<SpatialAtom>& xs,
                     const std::vector<SpatialAtom>& ys,
                     std::vector<bool>& used, std::size_t i,
                     const PureFormula& px, const PureFormula& py) {
    if (i == xs.size()) {
      std::vector<bool> pused(py.size(), false);
      return match_pure(px, py, pused, 0);
    }
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (used[j]) continue;
      auto fs = fwd, bs = bwd;
      if (spatial(xs[i], ys[j])) {
        used[j] = true;
        if (match_spatial(xs, ys, used, i + 1, px, py)) return true;
        used[j] = false;
      }
      unmap(fs, bs);
    }
    return false;
  }
  bool match_pure(const PureFormula& xs, const PureFormula& ys,
                  std::vector<bool>& used, std::size_t i) {
    if (i == xs.size()) return true;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (used[j]) continue;
      auto fs = fwd, bs = bwd;
      if (pure(xs[i], ys[j])) {
        used[j] = true;
        if (match_pure(xs, ys, used, i + 1)) return true;
        used[j] = false;
      }
      unmap(fs, bs);
    }
    return false;
  }
};

}  // namespace iso_detail

inline bool isomorphic(const Formula& a, const Formula& b) {
  Formula x = iso_detail::normalize(a);
  Formula y = iso_detail::normalize(b);
  if (x.spatial.size() != y.spatial.size() || x.pure.size() != y.pure.size() ||
      x.existentials.size() != y.existentials.size())
    return false;
  iso_detail::Matcher m;
  m.ex1.insert(x.existentials.begin(), x.existentials.end());
  m.ex2.insert(y.existentials.begin(), y.existentials.end());
  std::vector<bool> used(y.spatial.size(), false);
  return m.match_spatial(x.spatial, y.spatial, used, 0, x.pure, y.pure);
}

}  // namespace heapinv::testing
