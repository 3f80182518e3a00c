#include "heapinv/partition.hpp"

#include <stdexcept>

namespace heapinv {

namespace {

std::set<std::string> split_one(const StackHeapModel& m,
                                const std::string& root, Heap& sub,
                                Heap& rest) {
  auto rit = m.stack.find(root);
  if (rit == m.stack.end())
    throw std::runtime_error("root '" + root + "' not in stack of test " +
                             m.test_id);
  const Value& rv = rit->second;
  if (rv.is_int())
    throw std::runtime_error("root '" + root + "' is integer-valued");

  std::set<std::string> aliases;
  for (const auto& [var, val] : m.stack)
    if (val == rv) aliases.insert(var);

  std::set<Addr> stops;
  for (const auto& [var, val] : m.stack)
    if (val.is_addr() && !aliases.count(var)) stops.insert(val.addr_token());

  // DFS over pointer fields; stop cells are excluded, cycles handled by the
  // visited set. `encountered` collects every address the traversal touched
  // (stop cells and dangling values included) — variables naming any of
  // them delimit the sub-heap.
  std::set<Addr> included;
  std::set<Addr> encountered;
  bool nil_seen = false;
  if (rv.is_addr()) {
    std::vector<Addr> work{rv.addr_token()};
    encountered.insert(rv.addr_token());
    std::set<Addr> visited;
    while (!work.empty()) {
      Addr a = work.back();
      work.pop_back();
      if (!visited.insert(a).second) continue;
      if (stops.count(a)) continue;
      auto hit = m.heap.find(a);
      if (hit == m.heap.end()) continue;  // dangling
      included.insert(a);
      for (const auto& fv : hit->second.fields) {
        if (fv.is_nil()) {
          nil_seen = true;
        } else if (fv.is_addr()) {
          encountered.insert(fv.addr_token());
          work.push_back(fv.addr_token());
        }
      }
    }
  }

  for (const auto& [addr, cell] : m.heap) {
    if (included.count(addr))
      sub[addr] = cell;
    else
      rest[addr] = cell;
  }

  std::set<std::string> boundary = aliases;
  for (const auto& [var, val] : m.stack)
    if (val.is_addr() && encountered.count(val.addr_token()))
      boundary.insert(var);
  if (nil_seen) boundary.insert("nil");
  return boundary;
}

}  // namespace

PartitionResult split_heap(const std::vector<StackHeapModel>& models,
                           const std::string& root, const TypeEnv&) {
  PartitionResult res;
  bool first = true;
  for (const auto& m : models) {
    StackHeapModel sub = m, rest = m;
    sub.heap.clear();
    rest.heap.clear();
    std::set<std::string> boundary = split_one(m, root, sub.heap, rest.heap);
    res.sub_models.push_back(std::move(sub));
    res.rest_models.push_back(std::move(rest));
    if (first) {
      res.common_boundary = std::move(boundary);
      first = false;
    } else {
      std::set<std::string> inter;
      for (const auto& v : res.common_boundary)
        if (boundary.count(v)) inter.insert(v);
      res.common_boundary = std::move(inter);
    }
  }
  return res;
}

}  // namespace heapinv
