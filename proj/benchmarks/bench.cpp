#include <benchmark/benchmark.h>

#include "heapinv/checker.hpp"
#include "heapinv/engine.hpp"
#include "heapinv/partition.hpp"
#include "heapinv/trace_io.hpp"

using namespace heapinv;

namespace {

const Definitions& defs() {
  static const Definitions d = parse_predicates(builtin_definitions());
  return d;
}

StackHeapModel list_model(std::size_t n, GenSpec::Structure s) {
  Heap heap;
  Addr next = 1;
  Value root = generate_structure({s, n, 99}, heap, next);
  StackHeapModel m;
  m.stack["head"] = root;
  m.heap = std::move(heap);
  return m;
}

void BM_check_dll(benchmark::State& state) {
  auto m = list_model(static_cast<std::size_t>(state.range(0)),
                      GenSpec::Structure::Dll);
  Formula f = parse_formula("exists u, v . dll(head, nil, v, nil)", defs());
  for (auto _ : state) {
    auto out = check(m, f, defs());
    benchmark::DoNotOptimize(out.satisfied);
  }
}
BENCHMARK(BM_check_dll)->Arg(4)->Arg(8)->Arg(16);

void BM_check_tree(benchmark::State& state) {
  auto m = list_model(static_cast<std::size_t>(state.range(0)),
                      GenSpec::Structure::Bst);
  Formula f = parse_formula("tree(head)", defs());
  for (auto _ : state) {
    auto out = check(m, f, defs());
    benchmark::DoNotOptimize(out.satisfied);
  }
}
BENCHMARK(BM_check_tree)->Arg(4)->Arg(8);

void BM_split_heap(benchmark::State& state) {
  TraceFile tf = run_builtin("dll_concat", {{GenSpec::Structure::Dll, 3, 1},
                                            {GenSpec::Structure::Dll, 2, 2}});
  std::vector<StackHeapModel> l3;
  for (const auto& r : tf.records)
    if (r.location == "L3") l3.push_back(r);
  for (auto _ : state) {
    auto part = split_heap(l3, "x", defs().types);
    benchmark::DoNotOptimize(part.common_boundary.size());
  }
}
BENCHMARK(BM_split_heap);

void BM_infer_concat_L3(benchmark::State& state) {
  TraceFile tf = run_builtin("dll_concat", {{GenSpec::Structure::Dll, 3, 1},
                                            {GenSpec::Structure::Dll, 2, 2}});
  std::vector<StackHeapModel> l3;
  for (const auto& r : tf.records)
    if (r.location == "L3") l3.push_back(r);
  InferOptions opts;
  opts.params = tf.header.params;
  opts.scope_vars = std::vector<std::string>{"x", "y", "res"};
  for (auto _ : state) {
    auto rs = infer(l3, defs(), opts);
    benchmark::DoNotOptimize(rs.size());
  }
}
BENCHMARK(BM_infer_concat_L3);

}  // namespace

BENCHMARK_MAIN();
