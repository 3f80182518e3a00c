#include "heapinv/parser.hpp"

#include <cctype>
#include <map>
#include <set>

namespace heapinv {

namespace {

struct Token {
  enum class Kind { Ident, Int, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, tok_.line, tok_.col);
  }

private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      tok_.text.clear();
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        bump();
      tok_.kind = Token::Kind::Ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        bump();
      tok_.kind = Token::Kind::Int;
      tok_.text = src_.substr(start, pos_ - start);
      tok_.value = std::stoll(tok_.text);
      return;
    }
    static const char* two[] = {"->", ":=", "!=", nullptr};
    for (int i = 0; two[i]; ++i) {
      if (src_.compare(pos_, 2, two[i]) == 0) {
        tok_.kind = Token::Kind::Punct;
        tok_.text = two[i];
        bump();
        bump();
        return;
      }
    }
    tok_.kind = Token::Kind::Punct;
    tok_.text = std::string(1, c);
    bump();
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[pos_])))
        bump();
      if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

class Parser {
public:
  explicit Parser(const std::string& src) : lex_(src) {}

  Definitions parse_file() {
    while (lex_.peek().kind != Token::Kind::End) {
      if (is_ident("type")) {
        TypeDecl t = parse_type();
        if (defs_.types.find(t.name))
          lex_.fail("type '" + t.name + "' redefined");
        defs_.types.add(std::move(t));
      } else if (is_ident("pred")) {
        PredicateDef p = parse_pred();
        if (defs_.preds.find(p.name))
          lex_.fail("predicate '" + p.name + "' redefined");
        defs_.preds.add(std::move(p));
      } else {
        lex_.fail("expected 'type' or 'pred'");
      }
    }
    check_predicates();
    return std::move(defs_);
  }

  Formula parse_formula_body(const Definitions& defs) {
    defs_ = defs;
    Formula f;
    if (is_ident("exists")) {
      lex_.next();
      f.existentials.push_back(expect_ident());
      while (accept_punct(","))
        f.existentials.push_back(expect_ident());
      expect_punct(".");
    }
    parse_clause_body(f.spatial, f.pure);
    if (lex_.peek().kind != Token::Kind::End) lex_.fail("trailing input");
    for (const auto& a : f.spatial) check_pred_instance(a, 1, 1);
    return f;
  }

private:
  bool is_ident(const char* kw) const {
    return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == kw;
  }
  bool is_punct(const char* p) const {
    return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
  }
  bool accept_punct(const char* p) {
    if (!is_punct(p)) return false;
    lex_.next();
    return true;
  }
  void expect_punct(const char* p) {
    if (!accept_punct(p)) lex_.fail(std::string("expected '") + p + "'");
  }
  std::string expect_ident() {
    if (lex_.peek().kind != Token::Kind::Ident) lex_.fail("expected identifier");
    return lex_.next().text;
  }

  FieldType parse_field_type() {
    std::string name = expect_ident();
    if (name == "int") return FieldType{false, ""};
    expect_punct("*");
    return FieldType{true, name};
  }

  TypeDecl parse_type() {
    lex_.next();  // 'type'
    TypeDecl t;
    t.name = expect_ident();
    expect_punct("{");
    std::set<std::string> seen;
    for (;;) {
      std::string fname = expect_ident();
      if (!seen.insert(fname).second)
        lex_.fail("duplicate field '" + fname + "'");
      expect_punct(":");
      t.fields.emplace_back(fname, parse_field_type());
      if (!accept_punct(",")) break;
    }
    expect_punct("}");
    accept_punct(";");
    return t;
  }

  PredicateDef parse_pred() {
    lex_.next();  // 'pred'
    PredicateDef p;
    p.name = expect_ident();
    expect_punct("(");
    std::set<std::string> seen;
    for (;;) {
      std::string pname = expect_ident();
      if (!seen.insert(pname).second)
        lex_.fail("duplicate parameter '" + pname + "'");
      expect_punct(":");
      FieldType pt = parse_field_type();
      if (pt.is_pointer && !defs_.types.find(pt.pointee))
        lex_.fail("unknown type '" + pt.pointee + "'");
      p.params.emplace_back(pname, std::move(pt));
      if (!accept_punct(",")) break;
    }
    expect_punct(")");
    expect_punct(":=");
    for (;;) {
      Clause c;
      if (is_ident("exists")) {
        lex_.next();
        c.existentials.push_back(expect_ident());
        while (accept_punct(","))
          c.existentials.push_back(expect_ident());
        expect_punct(".");
      }
      parse_clause_body(c.spatial, c.pure);
      check_clause_vars(p, c);
      p.clauses.push_back(std::move(c));
      if (accept_punct(";")) break;
      expect_punct("|");
    }
    return p;
  }

  void parse_clause_body(std::vector<SpatialAtom>& spatial, PureFormula& pure) {
    spatial.push_back(parse_spatial_atom());
    while (accept_punct("*")) spatial.push_back(parse_spatial_atom());
    while (accept_punct("&")) pure.push_back(parse_pure_atom());
  }

  static Term ident_term(const std::string& id) {
    return id == "nil" ? Term::nil() : Term::variable(id);
  }

  SpatialAtom parse_spatial_atom() {
    if (is_ident("emp")) {
      lex_.next();
      return SpatialAtom::emp();
    }
    if (lex_.peek().kind != Token::Kind::Ident)
      lex_.fail("expected spatial atom");
    Token head = lex_.next();
    if (accept_punct("(")) {
      std::vector<Term> args;
      if (!is_punct(")")) {
        args.push_back(ident_term(expect_ident()));
        while (accept_punct(",")) args.push_back(ident_term(expect_ident()));
      }
      expect_punct(")");
      return SpatialAtom::pred(head.text, std::move(args));
    }
    if (accept_punct("->")) return parse_points_to(ident_term(head.text));
    lex_.fail("expected '(' or '->' after identifier");
  }

  SpatialAtom parse_points_to(Term base) {
    Token tname = lex_.next();
    if (tname.kind != Token::Kind::Ident)
      throw ParseError("expected type name", tname.line, tname.col);
    const TypeDecl* td = defs_.types.find(tname.text);
    if (!td)
      throw ParseError("unknown type '" + tname.text + "'", tname.line,
                       tname.col);
    expect_punct("{");
    // Accepts `next: u, prev: pr` (named, any order) or `u, pr` (positional,
    // declared order). Mixing the two styles is an error.
    std::vector<Term> ordered(td->fields.size());
    std::vector<bool> set(td->fields.size(), false);
    std::vector<Term> positional;
    bool named = false, first = true;
    for (;;) {
      Token id = lex_.next();
      if (id.kind != Token::Kind::Ident)
        throw ParseError("expected field value", id.line, id.col);
      if (is_punct(":")) {
        if (!first && !named)
          throw ParseError("mixed field list styles", id.line, id.col);
        named = true;
        lex_.next();
        auto idx = td->field_index(id.text);
        if (!idx)
          throw ParseError("type '" + tname.text + "' has no field '" +
                               id.text + "'",
                           id.line, id.col);
        if (set[*idx])
          throw ParseError("field '" + id.text + "' set twice", id.line,
                           id.col);
        set[*idx] = true;
        ordered[*idx] = ident_term(expect_ident());
      } else {
        if (named) throw ParseError("mixed field list styles", id.line, id.col);
        positional.push_back(ident_term(id.text));
      }
      first = false;
      if (!accept_punct(",")) break;
    }
    expect_punct("}");
    if (named) {
      for (std::size_t i = 0; i < set.size(); ++i)
        if (!set[i])
          lex_.fail("missing field '" + td->fields[i].first + "' of '" +
                    tname.text + "'");
      return SpatialAtom::points_to(std::move(base), tname.text,
                                    std::move(ordered));
    }
    if (positional.size() != td->fields.size())
      lex_.fail("type '" + tname.text + "' declares " +
                std::to_string(td->fields.size()) + " fields, got " +
                std::to_string(positional.size()));
    return SpatialAtom::points_to(std::move(base), tname.text,
                                  std::move(positional));
  }

  PureAtom parse_pure_atom() {
    if (accept_punct("!")) {
      expect_punct("(");
      PureAtom a = parse_pure_atom();
      expect_punct(")");
      a.negated = !a.negated;
      return a;
    }
    PureAtom a;
    a.lhs = parse_pure_expr();
    if (accept_punct("=")) {
      a.op = PureAtom::Op::Eq;
    } else if (accept_punct("<")) {
      a.op = PureAtom::Op::Lt;
    } else if (accept_punct("!=")) {
      a.op = PureAtom::Op::Eq;
      a.negated = true;
    } else {
      lex_.fail("expected '=', '<' or '!='");
    }
    a.rhs = parse_pure_expr();
    return a;
  }

  PureExprPtr parse_pure_expr() {
    PureExprPtr e = parse_pure_term();
    while (is_punct("+") || is_punct("-")) {
      bool plus = lex_.next().text == "+";
      PureExprPtr r = parse_pure_term();
      e = PureExpr::add(std::move(e), plus ? r : PureExpr::neg(r));
    }
    return e;
  }

  PureExprPtr parse_pure_term() {
    if (lex_.peek().kind == Token::Kind::Int) {
      std::int64_t k = lex_.next().value;
      if (accept_punct("*")) return PureExpr::scale(k, parse_pure_factor());
      return PureExpr::integer(k);
    }
    return parse_pure_factor();
  }

  PureExprPtr parse_pure_factor() {
    if (accept_punct("-")) return PureExpr::neg(parse_pure_factor());
    if (accept_punct("(")) {
      PureExprPtr e = parse_pure_expr();
      expect_punct(")");
      return e;
    }
    if (lex_.peek().kind == Token::Kind::Int)
      return PureExpr::integer(lex_.next().value);
    std::string id = expect_ident();
    if (id == "nil") return PureExpr::nil();
    return PureExpr::variable(id);
  }

  // -- checks -----------------------------------------------------------------

  void check_clause_vars(const PredicateDef& p, const Clause& c) {
    std::set<std::string> allowed;
    for (const auto& [n, t] : p.params) allowed.insert(n);
    for (const auto& e : c.existentials) allowed.insert(e);
    Formula probe;
    probe.spatial = c.spatial;
    probe.pure = c.pure;
    for (const auto& v : probe.free_vars())
      if (!allowed.count(v))
        lex_.fail("unbound variable '" + v + "' in clause of '" + p.name + "'");
  }

  void check_pred_instance(const SpatialAtom& a, int line, int col) {
    if (a.kind != SpatialAtom::Kind::Pred) return;
    const PredicateDef* pd = defs_.preds.find(a.name);
    if (!pd) throw ParseError("unknown predicate '" + a.name + "'", line, col);
    if (a.args.size() != pd->params.size())
      throw ParseError("arity mismatch for predicate '" + a.name +
                           "': wanted " + std::to_string(pd->params.size()) +
                           " args, got " + std::to_string(a.args.size()),
                       line, col);
  }

  void check_predicates() {
    // Predicate instances may forward-reference, so resolve after parsing.
    for (const auto& p : defs_.preds.all())
      for (const auto& c : p.clauses)
        for (const auto& a : c.spatial) check_pred_instance(a, 1, 1);

    // Well-foundedness: a clause that can recurse back to its own predicate
    // must contain a points-to atom so every unfolding consumes heap.
    std::map<std::string, std::set<std::string>> calls;
    for (const auto& p : defs_.preds.all())
      for (const auto& c : p.clauses)
        for (const auto& a : c.spatial)
          if (a.kind == SpatialAtom::Kind::Pred) calls[p.name].insert(a.name);
    auto reaches = [&](const std::string& from, const std::string& to) {
      std::set<std::string> seen;
      std::vector<std::string> work{from};
      while (!work.empty()) {
        std::string cur = work.back();
        work.pop_back();
        if (!seen.insert(cur).second) continue;
        if (cur == to) return true;
        for (const auto& nxt : calls[cur]) work.push_back(nxt);
      }
      return false;
    };
    for (const auto& p : defs_.preds.all()) {
      for (const auto& c : p.clauses) {
        bool recursive = false, has_pts = false;
        for (const auto& a : c.spatial) {
          if (a.kind == SpatialAtom::Kind::Pred && reaches(a.name, p.name))
            recursive = true;
          if (a.kind == SpatialAtom::Kind::PointsTo) has_pts = true;
        }
        if (recursive && !has_pts)
          throw ParseError("non-well-founded recursive clause in predicate '" +
                               p.name + "'",
                           1, 1);
      }
    }
  }

  Lexer lex_;
  Definitions defs_;
};

}  // namespace

Definitions parse_predicates(const std::string& source) {
  Parser p(source);
  return p.parse_file();
}

Formula parse_formula(const std::string& source, const Definitions& defs) {
  Parser p(source);
  return p.parse_formula_body(defs);
}

}  // namespace heapinv
