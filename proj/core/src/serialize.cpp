#include "heapinv/serialize.hpp"

#include <json.hpp>

namespace heapinv {

namespace {

using json = nlohmann::ordered_json;

json term_to_json(const Term& t) { return t.str(); }

Term term_from_json(const json& j) {
  const std::string s = j.get<std::string>();
  return s == "nil" ? Term::nil() : Term::variable(s);
}

json expr_to_json(const PureExprPtr& e) {
  json j;
  switch (e->kind) {
    case PureExpr::Kind::Int:
      j["kind"] = "int";
      j["value"] = e->k;
      break;
    case PureExpr::Kind::Var:
      j["kind"] = "var";
      j["name"] = e->var;
      break;
    case PureExpr::Kind::Nil: j["kind"] = "nil"; break;
    case PureExpr::Kind::Neg:
      j["kind"] = "neg";
      j["a"] = expr_to_json(e->a);
      break;
    case PureExpr::Kind::Add:
      j["kind"] = "add";
      j["a"] = expr_to_json(e->a);
      j["b"] = expr_to_json(e->b);
      break;
    case PureExpr::Kind::Scale:
      j["kind"] = "scale";
      j["k"] = e->k;
      j["a"] = expr_to_json(e->a);
      break;
  }
  return j;
}

PureExprPtr expr_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "int") return PureExpr::integer(j.at("value").get<std::int64_t>());
  if (kind == "var") return PureExpr::variable(j.at("name").get<std::string>());
  if (kind == "nil") return PureExpr::nil();
  if (kind == "neg") return PureExpr::neg(expr_from_json(j.at("a")));
  if (kind == "add")
    return PureExpr::add(expr_from_json(j.at("a")), expr_from_json(j.at("b")));
  if (kind == "scale")
    return PureExpr::scale(j.at("k").get<std::int64_t>(),
                           expr_from_json(j.at("a")));
  throw std::runtime_error("bad expression kind: " + kind);
}

}  // namespace

std::string formula_to_json(const Formula& f) {
  json j;
  j["existentials"] = f.existentials;
  j["spatial"] = json::array();
  for (const auto& a : f.spatial) {
    json ja;
    switch (a.kind) {
      case SpatialAtom::Kind::Emp: ja["kind"] = "emp"; break;
      case SpatialAtom::Kind::PointsTo:
        ja["kind"] = "points_to";
        ja["base"] = term_to_json(a.base);
        ja["type"] = a.name;
        break;
      case SpatialAtom::Kind::Pred:
        ja["kind"] = "pred";
        ja["name"] = a.name;
        break;
    }
    if (a.kind != SpatialAtom::Kind::Emp) {
      ja["args"] = json::array();
      for (const auto& t : a.args) ja["args"].push_back(term_to_json(t));
    }
    j["spatial"].push_back(std::move(ja));
  }
  j["pure"] = json::array();
  for (const auto& p : f.pure) {
    json jp;
    jp["op"] = p.op == PureAtom::Op::Eq ? "eq" : "lt";
    jp["negated"] = p.negated;
    jp["lhs"] = expr_to_json(p.lhs);
    jp["rhs"] = expr_to_json(p.rhs);
    j["pure"].push_back(std::move(jp));
  }
  return j.dump();
}

Formula formula_from_json(const std::string& text) {
  json j = json::parse(text);
  Formula f;
  f.existentials = j.at("existentials").get<std::vector<std::string>>();
  for (const auto& ja : j.at("spatial")) {
    const std::string kind = ja.at("kind").get<std::string>();
    SpatialAtom a;
    if (kind == "emp") {
      a = SpatialAtom::emp();
    } else {
      std::vector<Term> args;
      for (const auto& t : ja.at("args")) args.push_back(term_from_json(t));
      if (kind == "points_to") {
        a = SpatialAtom::points_to(term_from_json(ja.at("base")),
                                   ja.at("type").get<std::string>(),
                                   std::move(args));
      } else if (kind == "pred") {
        a = SpatialAtom::pred(ja.at("name").get<std::string>(),
                              std::move(args));
      } else {
        throw std::runtime_error("bad spatial kind: " + kind);
      }
    }
    f.spatial.push_back(std::move(a));
  }
  for (const auto& jp : j.at("pure")) {
    PureAtom p;
    p.op = jp.at("op").get<std::string>() == "eq" ? PureAtom::Op::Eq
                                                  : PureAtom::Op::Lt;
    p.negated = jp.at("negated").get<bool>();
    p.lhs = expr_from_json(jp.at("lhs"));
    p.rhs = expr_from_json(jp.at("rhs"));
    f.pure.push_back(std::move(p));
  }
  return f;
}

}  // namespace heapinv
