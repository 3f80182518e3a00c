#pragma once

#include <stdexcept>
#include <vector>

#include "heapinv/formula.hpp"
#include "heapinv/model.hpp"
#include "heapinv/parser.hpp"

namespace heapinv {

struct CheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Result of checking one model against a formula: the residual heap is the
/// part of the model's heap the formula did not consume.
struct CheckOutcome {
  bool satisfied = false;
  Heap residual;
  Instantiation instantiation;
};

/// Decides whether `model` satisfies `f` by backtracking unfolding of the
/// inductive predicates in `defs`. All satisfying reductions are explored;
/// the returned one has minimal residual cardinality, ties broken by
/// lexicographically smallest consumed-address set, then clause index order,
/// then instantiation values (nil < ints < addresses).
///
/// On failure: satisfied=false, residual = the whole input heap, empty
/// instantiation. Throws CheckError on unbound free variables, unknown
/// predicates, or an exceeded unfolding-depth cap (internal error).
CheckOutcome check(const StackHeapModel& model, const Formula& f,
                   const Definitions& defs);

struct SequenceOutcome {
  bool satisfied = false;
  std::vector<Heap> residuals;            // index-aligned with the models
  std::vector<Instantiation> instantiations;
};

/// check over every model; satisfied iff all models satisfy `f`.
/// Residuals and instantiations are reported even for a failing sequence
/// (failing models carry their full heap as residual).
SequenceOutcome check_sequence(const std::vector<StackHeapModel>& models,
                               const Formula& f, const Definitions& defs);

}  // namespace heapinv
