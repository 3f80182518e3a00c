#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "heapinv/types.hpp"
#include "heapinv/value.hpp"

namespace heapinv {

using Addr = std::uint64_t;

struct HeapCell {
  std::string type;           // TypeDecl name
  std::vector<Value> fields;  // declared field order

  bool operator==(const HeapCell& o) const {
    return type == o.type && fields == o.fields;
  }
};

/// Ordered map so iteration (and hence everything downstream) is deterministic.
using Heap = std::map<Addr, HeapCell>;

/// One observed program state: a stack valuation plus the reachable heap.
struct StackHeapModel {
  std::string test_id;
  std::string location;
  std::map<std::string, Value> stack;
  Heap heap;

  const Value* lookup(const std::string& var) const {
    auto it = stack.find(var);
    return it == stack.end() ? nullptr : &it->second;
  }
};

/// Checks cell arities and field kinds against the declared types.
/// Throws std::runtime_error naming the offending cell.
void validate_model(const StackHeapModel& m, const TypeEnv& types);

}  // namespace heapinv
