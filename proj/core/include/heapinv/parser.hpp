#pragma once

#include <stdexcept>
#include <string>

#include "heapinv/formula.hpp"
#include "heapinv/types.hpp"

namespace heapinv {

struct ParseError : std::runtime_error {
  int line = 0;
  int column = 0;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

struct Definitions {
  TypeEnv types;
  PredEnv preds;
};

/// Parses the predicate DSL: `type` declarations followed by `pred`
/// definitions, each terminated by `;`. Runs arity and well-foundedness
/// checks (every recursive clause must contain a points-to atom).
Definitions parse_predicates(const std::string& source);

/// Parses a single formula expression, e.g.
///   exists u1, u2 . dll(x, u1, u2, tmp) & res = x
/// Names are resolved against `defs`; variables bound by `exists` become
/// the formula's existentials.
Formula parse_formula(const std::string& source, const Definitions& defs);

}  // namespace heapinv
