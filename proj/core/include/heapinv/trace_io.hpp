#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heapinv/model.hpp"
#include "heapinv/parser.hpp"

namespace heapinv {

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceHeader {
  std::string types;  // inline type-declaration DSL, or a path to one
  std::vector<std::string> params;  // declared parameter order
  std::vector<std::string> exits;   // exit location names
};

struct TraceFile {
  TraceHeader header;
  std::vector<StackHeapModel> records;
};

/// Line-oriented JSON: one header object, then one record object per line.
/// Reading validates cell arities and field kinds against the header's type
/// declarations; errors carry the offending line number.
TraceFile read_traces(const std::string& path);
void write_traces(const TraceFile& tf, const std::string& path);
std::string traces_to_string(const TraceFile& tf);
TraceFile traces_from_string(const std::string& text,
                             const std::string& base_dir = ".");

/// Resolves the header's type reference (inline DSL or file path) into
/// declarations.
TypeEnv header_types(const TraceHeader& h, const std::string& base_dir = ".");

/// The DSL source for the shipped types and predicates (sll, dll, srtl,
/// tree). Built-in programs reference these types.
const std::string& builtin_definitions();

struct GenSpec {
  enum class Structure { Sll, Dll, SortedSll, Bst };
  Structure structure = Structure::Sll;
  std::size_t size = 0;
  std::uint64_t seed = 0;
};

/// Generates one data structure into `heap`, allocating sequential addresses
/// starting at next_addr (updated). Returns the root value (nil for size 0).
/// Payloads are drawn uniformly from [0, 100) by a generator seeded with
/// spec.seed.
Value generate_structure(const GenSpec& spec, Heap& heap, Addr& next_addr);

/// Runs an in-memory model of a built-in program over generated inputs,
/// emitting one record per breakpoint in execution order. Programs:
///   dll_concat      (two dll inputs)   entry L1 per call, exits L2/L3
///   sll_reverse     (one sll input)    entry L1, loop head L2, exit L3
///   sorted_insert   (one sorted input) entry L1, exits L2/L3
///   bst_insert      (one bst input)    entry L1, exit L2
///   dll_concat_bug  (two dll inputs)   seeded null dereference: emission
///                                      stops at the crash, no exit records
/// Throws TraceError on unknown program or input arity mismatch.
TraceFile run_builtin(const std::string& program,
                      const std::vector<GenSpec>& inputs);

}  // namespace heapinv
