#pragma once

#include <string>

#include "heapinv/formula.hpp"

namespace heapinv {

/// Structured-term JSON for formulae (round-trips losslessly).
std::string formula_to_json(const Formula& f);
Formula formula_from_json(const std::string& text);

}  // namespace heapinv
