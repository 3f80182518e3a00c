#pragma once

#include <set>
#include <string>
#include <vector>

#include "heapinv/model.hpp"

namespace heapinv {

/// Per-model decomposition of each heap into the root-reachable sub-heap and
/// the remainder, plus the boundary variables common to all models.
struct PartitionResult {
  std::vector<StackHeapModel> sub_models;   // root's sub-heaps, stacks intact
  std::vector<StackHeapModel> rest_models;  // complement heaps
  // Variable names delimiting the sub-heaps; may include the token "nil".
  std::set<std::string> common_boundary;
};

/// Depth-first traversal from `root` over pointer fields, stopping at cells
/// named by non-alias stack variables (those become boundary variables but
/// their cells stay in the rest-heap). Aliases of root do not stop the
/// traversal. Throws std::runtime_error if root is missing from a stack or
/// bound to an integer.
PartitionResult split_heap(const std::vector<StackHeapModel>& models,
                           const std::string& root, const TypeEnv& types);

}  // namespace heapinv
