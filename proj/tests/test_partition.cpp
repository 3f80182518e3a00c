#include <doctest.h>

#include <random>

#include "heapinv/partition.hpp"
#include "random_gen.hpp"
#include "test_util.hpp"

using namespace heapinv;
using namespace heapinv::testing;

TEST_CASE("concat exit traces split from x as in the worked example") {
  auto l3 = records_at(concat_traces(), "L3");
  REQUIRE(l3.size() == 3);
  auto part = split_heap(l3, "x", builtin_defs().types);

  std::set<std::set<Addr>> sub_domains;
  for (const auto& m : part.sub_models) sub_domains.insert(domain(m.heap));
  CHECK(sub_domains ==
        std::set<std::set<Addr>>{{1}, {1, 2}, {1, 2, 3}});
  CHECK(part.common_boundary ==
        std::set<std::string>{"nil", "res", "tmp", "x"});
}

TEST_CASE("root bound to nil in all models") {
  StackHeapModel m;
  m.stack = {{"x", Value::nil()}, {"y", Value::nil()}, {"z", Value::addr(1)}};
  m.heap[1] = {"Node", {Value::nil(), Value::nil()}};
  auto part = split_heap({m}, "x", builtin_defs().types);
  CHECK(part.sub_models[0].heap.empty());
  CHECK(domain(part.rest_models[0].heap) == std::set<Addr>{1});
  // nil-valued variables are mutual aliases of the root
  CHECK(part.common_boundary == std::set<std::string>{"x", "y"});
}

TEST_CASE("a non-alias variable names a STOP cell") {
  StackHeapModel m;
  m.stack = {{"x", Value::addr(1)}, {"y", Value::addr(2)}};
  m.heap[1] = {"Node", {Value::addr(2), Value::nil()}};
  m.heap[2] = {"Node", {Value::nil(), Value::addr(1)}};
  auto part = split_heap({m}, "x", builtin_defs().types);
  CHECK(domain(part.sub_models[0].heap) == std::set<Addr>{1});
  CHECK(domain(part.rest_models[0].heap) == std::set<Addr>{2});
  CHECK(part.common_boundary == std::set<std::string>{"nil", "x", "y"});
}

TEST_CASE("aliases of root do not stop the traversal") {
  StackHeapModel m;
  m.stack = {{"x", Value::addr(1)}, {"res", Value::addr(1)}};
  m.heap[1] = {"Node", {Value::addr(2), Value::nil()}};
  m.heap[2] = {"Node", {Value::nil(), Value::addr(1)}};
  auto part = split_heap({m}, "x", builtin_defs().types);
  CHECK(domain(part.sub_models[0].heap) == std::set<Addr>{1, 2});
  CHECK(part.common_boundary == std::set<std::string>{"nil", "res", "x"});
}

TEST_CASE("errors: root missing or integer-valued") {
  StackHeapModel m;
  m.stack = {{"x", Value::integer(3)}};
  CHECK_THROWS(split_heap({m}, "x", builtin_defs().types));
  CHECK_THROWS(split_heap({m}, "absent", builtin_defs().types));
}

TEST_CASE("partition properties on random models") {
  std::mt19937_64 rng(19);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    StackHeapModel m = random_model(rng);
    if (!m.stack.at("x").is_addr() && !m.stack.at("x").is_nil()) continue;
    auto part = split_heap({m}, "x", builtin_defs().types);
    ++checked;
    const Heap& sub = part.sub_models[0].heap;
    const Heap& rest = part.rest_models[0].heap;
    // disjoint union reconstructs the input heap
    for (const auto& [a, c] : sub) CHECK_FALSE(rest.count(a));
    Heap merged = sub;
    merged.insert(rest.begin(), rest.end());
    CHECK(merged == m.heap);
    // stacks pass through untouched
    CHECK(part.sub_models[0].stack == m.stack);
    // determinism
    auto again = split_heap({m}, "x", builtin_defs().types);
    CHECK(domain(again.sub_models[0].heap) == domain(sub));
    CHECK(again.common_boundary == part.common_boundary);
  }
  CHECK(checked > 50);
}

TEST_CASE("common boundary is the intersection of per-model boundaries") {
  auto l3 = records_at(concat_traces(), "L3");
  auto all = split_heap(l3, "x", builtin_defs().types);
  for (const auto& m : l3) {
    auto one = split_heap({m}, "x", builtin_defs().types);
    for (const auto& v : all.common_boundary)
      CHECK(one.common_boundary.count(v));
  }
}
