#include "heapinv/atom_infer.hpp"

#include <algorithm>

namespace heapinv {

namespace {

// Nominal type of a boundary element, from the cells its value names across
// the sub-models; "" when unknown (dangling, nil, or conflicting).
std::string element_type(const std::string& name,
                         const std::vector<StackHeapModel>& models) {
  if (name == "nil") return "";
  std::string t;
  for (const auto& m : models) {
    auto it = m.stack.find(name);
    if (it == m.stack.end() || !it->second.is_addr()) continue;
    auto h = m.heap.find(it->second.addr_token());
    if (h == m.heap.end()) continue;
    if (t.empty())
      t = h->second.type;
    else if (t != h->second.type)
      return "";
  }
  return t;
}

void combinations(const std::vector<std::string>& pool, std::size_t k,
                  std::size_t start, std::vector<std::string>& cur,
                  std::vector<std::vector<std::string>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < pool.size(); ++i) {
    cur.push_back(pool[i]);
    combinations(pool, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<AtomResult> infer_atom(const std::string& root,
                                   const std::vector<StackHeapModel>& sub_models,
                                   const std::set<std::string>& boundary,
                                   const Definitions& defs, FreshNamer& fresh,
                                   bool use_type_filter) {
  std::vector<AtomResult> results;
  auto emp_result = [&]() {
    AtomResult r;
    r.formula.spatial.push_back(SpatialAtom::emp());
    for (const auto& m : sub_models) {
      r.residuals.push_back(m.heap);
      r.instantiations.emplace_back();
    }
    return r;
  };

  // Nothing reachable from root: emp describes it exactly (also covers a
  // root that is nil everywhere).
  bool all_empty = true;
  for (const auto& m : sub_models)
    if (!m.heap.empty()) all_empty = false;
  if (all_empty) return {emp_result()};

  const std::string root_type = element_type(root, sub_models);

  // Inductive instances.
  if (boundary.count(root)) {
    std::vector<std::string> others;
    for (const auto& b : boundary)
      if (b != root) others.push_back(b);

    std::set<std::string> seen_patterns;
    for (const auto& pd : defs.preds.all()) {
      const std::size_t n = pd.params.size();
      if (n == 0) continue;
      if (use_type_filter) {
        bool any = false;
        for (const auto& [pname, ptype] : pd.params)
          if (ptype.is_pointer &&
              (root_type.empty() || ptype.pointee == root_type))
            any = true;
        if (!any) continue;
      }

      for (std::size_t size = 1; size <= std::min(n, others.size() + 1);
           ++size) {
        std::vector<std::vector<std::string>> combos;
        std::vector<std::string> cur;
        combinations(others, size - 1, 0, cur, combos);
        for (const auto& combo : combos) {
          // Elements: root, the chosen boundary vars, then fresh slots.
          std::vector<std::string> elems{root};
          elems.insert(elems.end(), combo.begin(), combo.end());
          const std::size_t n_fresh = n - elems.size();

          std::vector<std::string> elem_types;
          for (const auto& e : elems)
            elem_types.push_back(element_type(e, sub_models));

          std::vector<int> perm(n);
          for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
          do {
            // perm[pos] = element index; >= elems.size() means a fresh slot.
            bool ok = true;
            for (std::size_t pos = 0; pos < n && ok; ++pos) {
              int ei = perm[pos];
              if (ei >= static_cast<int>(elems.size())) continue;  // fresh
              const FieldType& pt = pd.params[pos].second;
              if (!pt.is_pointer) {
                ok = false;  // int parameters take fresh existentials only
              } else if (use_type_filter) {
                const std::string& et = elem_types[ei];
                ok = et.empty() || et == pt.pointee ||
                     elems[ei] == "nil";
              }
            }
            if (!ok) continue;

            // De-duplicate up to renaming of the (interchangeable) freshes.
            std::string pattern = pd.name;
            std::map<int, int> fresh_order;
            for (std::size_t pos = 0; pos < n; ++pos) {
              int ei = perm[pos];
              if (ei >= static_cast<int>(elems.size())) {
                auto [it, inserted] = fresh_order.emplace(
                    ei, static_cast<int>(fresh_order.size()));
                pattern += "|?" + std::to_string(it->second);
              } else {
                pattern += "|" + elems[ei];
              }
            }
            if (!seen_patterns.insert(pattern).second) continue;

            Formula f;
            std::vector<Term> args(n);
            std::map<int, std::string> fresh_names;
            for (std::size_t pos = 0; pos < n; ++pos) {
              int ei = perm[pos];
              if (ei >= static_cast<int>(elems.size())) {
                auto it = fresh_names.find(ei);
                if (it == fresh_names.end()) {
                  std::string name = fresh.next();
                  f.existentials.push_back(name);
                  it = fresh_names.emplace(ei, std::move(name)).first;
                }
                args[pos] = Term::variable(it->second);
              } else if (elems[ei] == "nil") {
                args[pos] = Term::nil();
              } else {
                args[pos] = Term::variable(elems[ei]);
              }
            }
            f.spatial.push_back(SpatialAtom::pred(pd.name, std::move(args)));

            SequenceOutcome out = check_sequence(sub_models, f, defs);
            if (!out.satisfied) continue;
            (void)n_fresh;
            results.push_back(
                {std::move(f), std::move(out.residuals),
                 std::move(out.instantiations)});
          } while (std::next_permutation(perm.begin(), perm.end()));
        }
      }
    }
  }

  // Singleton points-to: every sub-model is exactly the one cell at root.
  bool singleton = true;
  std::string cell_type;
  for (const auto& m : sub_models) {
    auto it = m.stack.find(root);
    if (it == m.stack.end() || !it->second.is_addr() || m.heap.size() != 1 ||
        m.heap.begin()->first != it->second.addr_token()) {
      singleton = false;
      break;
    }
    const std::string& t = m.heap.begin()->second.type;
    if (cell_type.empty())
      cell_type = t;
    else if (cell_type != t)
      singleton = false;
  }
  if (singleton) {
    const TypeDecl* td = defs.types.find(cell_type);
    if (td) {
      std::vector<std::string> stack_vars;  // name order, for determinism
      for (const auto& [var, val] : sub_models.front().stack)
        stack_vars.push_back(var);

      Formula f;
      std::vector<Term> args;
      for (std::size_t i = 0; i < td->fields.size(); ++i) {
        auto field_val = [&](const StackHeapModel& m) {
          return m.heap.begin()->second.fields[i];
        };
        if (td->fields[i].second.is_pointer) {
          bool all_nil = true;
          for (const auto& m : sub_models)
            if (!field_val(m).is_nil()) all_nil = false;
          if (all_nil) {
            args.push_back(Term::nil());
            continue;
          }
          const std::string* match = nullptr;
          for (const auto& v : stack_vars) {
            bool agrees = true;
            for (const auto& m : sub_models) {
              auto sv = m.stack.find(v);
              if (sv == m.stack.end() || sv->second != field_val(m))
                agrees = false;
            }
            if (agrees) {
              match = &v;
              break;
            }
          }
          if (match) {
            args.push_back(Term::variable(*match));
            continue;
          }
        }
        // Integer fields and unmatched pointer fields: fresh existential,
        // instantiated per model by the checker.
        std::string name = fresh.next();
        f.existentials.push_back(name);
        args.push_back(Term::variable(std::move(name)));
      }
      f.spatial.push_back(SpatialAtom::points_to(Term::variable(root),
                                                 cell_type, std::move(args)));
      SequenceOutcome out = check_sequence(sub_models, f, defs);
      if (out.satisfied)
        results.push_back({std::move(f), std::move(out.residuals),
                           std::move(out.instantiations)});
    }
  }

  if (results.empty()) results.push_back(emp_result());
  return results;
}

}  // namespace heapinv
