#include <doctest.h>

#include "heapinv/parser.hpp"
#include "heapinv/serialize.hpp"
#include "test_util.hpp"

using namespace heapinv;
using namespace heapinv::testing;

namespace {
const char* kDll = R"(
type Node { next: Node*, prev: Node* }
pred dll(hd: Node*, pr: Node*, tl: Node*, nx: Node*) :=
    emp & hd = nx & pr = tl
  | exists u . hd -> Node { next: u, prev: pr } * dll(u, hd, tl, nx) ;
)";
}

TEST_CASE("dll definition parses to 4 params, 2 clauses, one existential") {
  auto defs = parse_predicates(kDll);
  const PredicateDef* p = defs.preds.find("dll");
  REQUIRE(p);
  CHECK(p->params.size() == 4);
  REQUIRE(p->clauses.size() == 2);
  CHECK(p->clauses[0].existentials.empty());
  CHECK(p->clauses[0].pure.size() == 2);
  REQUIRE(p->clauses[1].existentials.size() == 1);
  CHECK(p->clauses[1].existentials[0] == "u");
  CHECK(p->clauses[1].spatial.size() == 2);
}

TEST_CASE("minimal predicate, no existentials") {
  auto defs = parse_predicates(
      "type Node { next: Node*, prev: Node* }\n"
      "pred p(x: Node*) := emp & x = nil;");
  const PredicateDef* p = defs.preds.find("p");
  REQUIRE(p);
  CHECK(p->clauses.size() == 1);
  CHECK(p->clauses[0].existentials.empty());
}

TEST_CASE("non-well-founded recursion is rejected") {
  CHECK_THROWS_AS(parse_predicates("type Node { next: Node*, prev: Node* }\n"
                                   "pred bad(x: Node*) := bad(x);"),
                  ParseError);
}

TEST_CASE("print / reparse round-trip is structurally identical") {
  auto defs = builtin_defs();
  for (const auto& p : defs.preds.all()) {
    std::string src;
    for (const auto& t : defs.types.all()) {
      src += "type " + t.name + " { ";
      for (std::size_t i = 0; i < t.fields.size(); ++i) {
        if (i) src += ", ";
        src += t.fields[i].first + ": " +
               (t.fields[i].second.is_pointer ? t.fields[i].second.pointee + "*"
                                              : std::string("int"));
      }
      src += " }\n";
    }
    src += p.str();
    auto defs2 = parse_predicates(src);
    const PredicateDef* q = defs2.preds.find(p.name);
    REQUIRE(q);
    CHECK(q->str() == p.str());
  }
}

TEST_CASE("parse errors carry position and reason") {
  CHECK_THROWS_AS(parse_predicates("type Node {"), ParseError);
  // arity mismatch in a predicate call
  CHECK_THROWS_AS(
      parse_predicates("type Node { next: Node*, prev: Node* }\n"
                       "pred p(x: Node*) := emp & x = nil | "
                       "exists u . x -> Node { next: u, prev: nil } * p(u, u);"),
      ParseError);
  // unknown type name
  CHECK_THROWS_AS(parse_predicates("pred p(x: Thing*) := emp & x = nil;"),
                  ParseError);
  // free variable not bound by params or exists
  CHECK_THROWS_AS(parse_predicates("type Node { next: Node*, prev: Node* }\n"
                                   "pred p(x: Node*) := emp & x = z;"),
                  ParseError);
}

TEST_CASE("points-to accepts named and positional fields, rejects mixtures") {
  auto defs = builtin_defs();
  Formula a = parse_formula("x -> Node { next: y, prev: nil }", defs);
  Formula b = parse_formula("x -> Node { y, nil }", defs);
  CHECK(a.str() == b.str());
  // named fields may come in any order
  Formula c = parse_formula("x -> Node { prev: nil, next: y }", defs);
  CHECK(c.str() == a.str());
  CHECK_THROWS_AS(parse_formula("x -> Node { next: y, nil }", defs), ParseError);
  CHECK_THROWS_AS(parse_formula("x -> Node { y }", defs), ParseError);
  CHECK_THROWS_AS(parse_formula("x -> Node { next: y, next: z }", defs),
                  ParseError);
}

TEST_CASE("formula expression parses exists, *, & and comparison atoms") {
  auto defs = builtin_defs();
  Formula f = parse_formula(
      "exists u1, u2 . dll(x, u1, u2, tmp) * sll(y) & res = x & !(u1 = u2)",
      defs);
  CHECK(f.existentials.size() == 2);
  CHECK(f.spatial.size() == 2);
  REQUIRE(f.pure.size() == 2);
  CHECK(f.pure[1].negated);
  // reparse of the printed form is stable
  CHECK(parse_formula(f.str(), defs).str() == f.str());
}

TEST_CASE("formula json round-trip") {
  auto defs = builtin_defs();
  for (const char* src :
       {"emp & x = nil", "exists u . srtl(h, u) & v < u + 3",
        "exists u1, u2 . dll(x, u1, u2, tmp) & res = x",
        "x -> SNode { next: nil, val: u } & !(u = 2 * v + -1)"}) {
    Formula f = parse_formula(src, defs);
    Formula g = formula_from_json(formula_to_json(f));
    CHECK(g.str() == f.str());
  }
}
