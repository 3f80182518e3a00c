#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heapinv/atom_infer.hpp"
#include "heapinv/formula.hpp"
#include "heapinv/model.hpp"
#include "heapinv/parser.hpp"

namespace heapinv {

/// One candidate invariant: the formula plus, per input model, the heap it
/// left unconsumed and the certifying existential instantiation.
struct InferenceResult {
  Formula formula;
  std::vector<StackHeapModel> residual_models;
  std::vector<Instantiation> instantiations;

  std::size_t total_residual_cells() const {
    std::size_t n = 0;
    for (const auto& m : residual_models) n += m.heap.size();
    return n;
  }
};

struct InferOptions {
  std::vector<std::string> params;  // declared parameter order, from the trace
  std::optional<std::vector<std::string>> scope_vars;
  std::size_t width = 64;  // result-set cap applied after each variable
};

/// Analysis order for the stack pointer variables: declared parameters first,
/// but a variable discovered inside an already-analyzed variable's reachable
/// region is taken next (in discovery order); stragglers follow in name
/// order; res is always last.
std::vector<std::string> variable_order(
    const std::vector<StackHeapModel>& models,
    const std::vector<std::string>& params);

/// The main inference loop: for each variable in variable_order, partition
/// the residual heaps, infer atomic predicates, conjoin with *, then infer
/// pure equalities. Returns candidates ranked by fewest total residual
/// cells, then fewest existentials.
std::vector<InferenceResult> infer(const std::vector<StackHeapModel>& models,
                                   const Definitions& defs,
                                   const InferOptions& opts);

/// Adds t1 = t2 for every pair of terms (stack variables, existentials, nil)
/// whose values agree in every model; equalities are canonicalized by
/// union-find and existentials equal to a stack variable or to another
/// existential are substituted away. Replaces r.formula.pure.
void infer_pure(InferenceResult& r, const std::vector<std::string>& var_order);

/// A candidate specification: one precondition and one postcondition per
/// exit location, validated by the frame rule (residual comparison).
struct Specification {
  InferenceResult pre;
  std::vector<std::pair<std::string, InferenceResult>> posts;
  bool valid = false;
};

/// Pairs pre and post residuals by test_id and flags each candidate
/// combination valid iff every paired run has identical residual heaps on
/// both sides. Every combination is examined; all valid specifications are
/// returned (first), followed by at most `max_invalid` invalid examples.
std::vector<Specification> validate(
    const std::vector<InferenceResult>& pre_results,
    const std::map<std::string, std::vector<InferenceResult>>& post_results,
    std::size_t max_invalid = 8);

}  // namespace heapinv
