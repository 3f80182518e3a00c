#pragma once

#include <set>
#include <string>
#include <vector>

#include "heapinv/checker.hpp"
#include "heapinv/formula.hpp"
#include "heapinv/model.hpp"
#include "heapinv/parser.hpp"

namespace heapinv {

/// An accepted atomic formula for one root variable, with the residual heap
/// and certifying instantiation per sub-model.
struct AtomResult {
  Formula formula;
  std::vector<Heap> residuals;
  std::vector<Instantiation> instantiations;
};

/// Generator of globally unique existential names, shared across all atom
/// candidates of one inference run so names never collide.
class FreshNamer {
public:
  std::string next() { return "$" + std::to_string(++n_); }

private:
  int n_ = 0;
};

/// Enumerates atomic predicates describing root's sub-models:
///   1. inductive instances p(k1..kn) with arguments drawn from subsets of
///      the boundary (root included, ascending subset size) padded with
///      fresh existentials, every type-consistent argument permutation;
///   2. a singleton points-to when every sub-model is exactly one cell at
///      root's address;
///   3. emp when the sub-heaps are all empty or nothing else checks.
/// Results are returned in discovery order; every result re-checks against
/// the sub-models with the recorded residuals.
/// `use_type_filter` exists for testing the filter's soundness; leave true.
std::vector<AtomResult> infer_atom(const std::string& root,
                                   const std::vector<StackHeapModel>& sub_models,
                                   const std::set<std::string>& boundary,
                                   const Definitions& defs, FreshNamer& fresh,
                                   bool use_type_filter = true);

}  // namespace heapinv
