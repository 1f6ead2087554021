#include "dpsp/parser.hpp"

#include <cctype>
#include <set>

namespace dpsp {

namespace {

enum class Tok { Ident, Int, Real, Punct, Annot, End };

struct Token {
  Tok kind;
  std::string text;
  Span span;
};

const std::set<std::string> kKeywords = {
    "decl", "in",     "range", "pred",   "pre",    "target", "skip",   "if",   "then",   "else",
    "while", "do",    "return", "assert", "true",  "false",  "forall", "exists", "div", "mod",
    "abs",  "hd",     "tl",    "length", "Lap",    "Exp",    "dom",    "maxgap", "min", "max"};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", {line_, col_, line_, col_}});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(peek()))) advance();
      if (peek() == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (peek() == '/' && peek(1) == '*') {
        const Span start{line_, col_, line_, col_ + 2};
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        if (pos_ >= src_.size()) throw ParseError("unterminated comment", start);
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  Token next() {
    const int l = line_, c = col_;
    auto finish = [&](Tok k, std::string text) { return Token{k, std::move(text), {l, c, line_, col_}}; };
    const char ch = peek();
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::string s;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
        s += peek();
        advance();
      }
      return finish(Tok::Ident, s);
    }
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::string s;
      bool real = false;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        s += peek();
        advance();
      }
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        real = true;
        s += peek();
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          s += peek();
          advance();
        }
      }
      if ((peek() == 'e' || peek() == 'E') &&
          (std::isdigit(static_cast<unsigned char>(peek(1))) ||
           ((peek(1) == '-' || peek(1) == '+') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
        real = true;
        s += peek();
        advance();
        if (peek() == '-' || peek() == '+') {
          s += peek();
          advance();
        }
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          s += peek();
          advance();
        }
      }
      return finish(real ? Tok::Real : Tok::Int, s);
    }
    if (ch == '@') {
      advance();
      std::string s = "@";
      while (std::isalpha(static_cast<unsigned char>(peek()))) {
        s += peek();
        advance();
      }
      if (s.size() == 1) throw ParseError("expected annotation name after '@'", {l, c, line_, col_});
      return finish(Tok::Annot, s);
    }
    static const char* multi[] = {"==>", "<=>", ":=", "::", "==", "!=", "<=", ">=", "&&", "||", ".."};
    for (const char* m : multi) {
      const std::string ms(m);
      if (src_.compare(pos_, ms.size(), ms) == 0) {
        for (std::size_t i = 0; i < ms.size(); ++i) advance();
        return finish(Tok::Punct, ms);
      }
    }
    static const std::string single = "+-*/<>!()[]{},;:=";
    if (single.find(ch) != std::string::npos) {
      advance();
      return finish(Tok::Punct, std::string(1, ch));
    }
    advance();
    throw ParseError(std::string("unexpected character '") + ch + "'", {l, c, line_, col_});
  }
};

Span join(Span a, Span b) { return {a.line, a.col, b.end_line, b.end_col}; }

class Parser {
 public:
  explicit Parser(const std::string& text, bool bare_loops = false)
      : toks_(Lexer(text).run()), bare_loops_(bare_loops) {}

  Unit unit() {
    Unit u;
    std::set<std::string> names;
    bool seen_pre = false;
    for (;;) {
      if (is_kw("decl")) {
        const Span s = take().span;
        VarDecl d;
        const Token& id = expect_ident();
        d.name = id.text;
        check_decl_name(d.name, id.span);
        expect(":");
        d.type = type();
        if (accept_kw("in")) d.domain = domain();
        d.span = join(s, prev_span());
        expect(";");
        if (!names.insert(d.name).second) throw ParseError("duplicate declaration of '" + d.name + "'", d.span);
        u.vars.push_back(std::move(d));
      } else if (is_kw("range")) {
        const Span s = take().span;
        RangeDecl r;
        r.name = expect_ident().text;
        expect("=");
        expect("[");
        if (!is("]")) {
          do r.values.push_back(literal_value());
          while (accept(","));
        }
        expect("]");
        r.span = join(s, prev_span());
        expect(";");
        if (!names.insert(r.name).second) throw ParseError("duplicate declaration of '" + r.name + "'", r.span);
        u.ranges.push_back(std::move(r));
      } else if (is_kw("pred")) {
        const Span s = take().span;
        PredDecl p;
        p.name = expect_ident().text;
        expect("(");
        if (!is(")")) {
          do {
            auto pn = expect_ident().text;
            expect(":");
            p.params.emplace_back(std::move(pn), type());
          } while (accept(","));
        }
        expect(")");
        expect("=");
        p.body = formula();
        p.span = join(s, prev_span());
        expect(";");
        if (!names.insert(p.name).second) throw ParseError("duplicate declaration of '" + p.name + "'", p.span);
        u.preds.push_back(std::move(p));
      } else if (is_kw("pre")) {
        const Span s = take().span;
        if (seen_pre) throw ParseError("duplicate pre declaration", s);
        seen_pre = true;
        expect("{");
        u.pre = formula();
        expect("}");
        u.pre_span = join(s, prev_span());
        expect(";");
      } else if (is_kw("target")) {
        const Span s = take().span;
        if (u.target) throw ParseError("duplicate target declaration", s);
        expect("(");
        PrivacyTarget t;
        t.eps = rational();
        expect(",");
        t.delta = rational();
        expect(")");
        expect(";");
        u.target = t;
      } else {
        break;
      }
    }
    u.body = stmts();
    if (!at_end()) fail("expected ';' or end of input");
    return u;
  }

  ExprPtr whole_expr() {
    auto e = formula();
    if (!at_end()) fail("unexpected trailing input");
    return e;
  }

  DomainSpec whole_domain() {
    auto d = domain();
    if (!at_end()) fail("unexpected trailing input");
    return d;
  }

  Value whole_value() {
    auto v = literal_value();
    if (!at_end()) fail("unexpected trailing input");
    return v;
  }

  CmdPtr whole_cmd() {
    auto c = stmts();
    if (!at_end()) fail("unexpected trailing input");
    return c;
  }

  Type whole_type() {
    auto t = type();
    if (!at_end()) fail("unexpected trailing input");
    return t;
  }

 private:
  std::vector<Token> toks_;
  bool bare_loops_ = false;
  std::size_t i_ = 0;

  const Token& cur() const { return toks_[i_]; }
  const Token& ahead(std::size_t k) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool at_end() const { return cur().kind == Tok::End; }
  Span prev_span() const { return i_ > 0 ? toks_[i_ - 1].span : cur().span; }
  const Token& take() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

  bool is(const std::string& p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool is_kw(const std::string& k) const { return cur().kind == Tok::Ident && cur().text == k; }
  bool accept(const std::string& p) {
    if (!is(p)) return false;
    take();
    return true;
  }
  bool accept_kw(const std::string& k) {
    if (!is_kw(k)) return false;
    take();
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const std::string got = at_end() ? "end of input" : "'" + cur().text + "'";
    throw ParseError(msg + ", found " + got, cur().span);
  }

  void expect(const std::string& p) {
    if (!accept(p)) fail("expected '" + p + "'");
  }
  void expect_kw(const std::string& k) {
    if (!accept_kw(k)) fail("expected '" + k + "'");
  }

  const Token& expect_ident() {
    if (cur().kind != Tok::Ident || kKeywords.count(cur().text)) fail("expected identifier");
    return take();
  }

  void check_decl_name(const std::string& name, Span s) {
    if (name.rfind("__", 0) == 0) {
      if (!is_ghost(name)) throw ParseError("names starting with '__' are reserved", s);
      return;
    }
    if (split_tag(name).second != 0)
      throw ParseError("declared names may not end in _1 or _2 (reserved for tagged copies)", s);
  }

  // ---- types, domains, literals ----

  Type type() {
    const Token& t = cur();
    if (t.kind != Tok::Ident) fail("expected a type");
    take();
    if (t.text == "int") return Type::integer();
    if (t.text == "real") return Type::real();
    if (t.text == "bool") return Type::boolean();
    if (t.text == "list") return Type::list();
    if (t.text == "map") {
      expect("<");
      auto k = type();
      expect(",");
      auto v = type();
      expect(">");
      return Type::map(std::move(k), std::move(v));
    }
    throw ParseError("unknown type '" + t.text + "'", t.span);
  }

  std::int64_t signed_int() {
    const bool neg = accept("-");
    if (cur().kind != Tok::Int) fail("expected an integer");
    const Token& t = take();
    std::int64_t v = 0;
    for (char ch : t.text) v = checked_mul(v, 10) + (ch - '0');
    return neg ? -v : v;
  }

  Rational rational() {
    if (cur().kind != Tok::Int && cur().kind != Tok::Real) fail("expected a rational number");
    const Token& t = take();
    std::string text = t.text;
    if (accept("/")) {
      if (cur().kind != Tok::Int && cur().kind != Tok::Real) fail("expected a denominator");
      text += "/" + take().text;
    }
    try {
      return Rational::parse(text);
    } catch (const Error& e) {
      throw ParseError(e.message(), t.span);
    }
  }

  Value number_value(bool neg) {
    const Token& t = take();
    if (t.kind == Tok::Int) {
      std::int64_t v = 0;
      for (char ch : t.text) v = checked_add(checked_mul(v, 10), ch - '0');
      return Value(neg ? -v : v);
    }
    const double d = std::stod(t.text);
    return Value(neg ? -d : d);
  }

  Value literal_value() {
    if (accept("-")) {
      if (cur().kind != Tok::Int && cur().kind != Tok::Real) fail("expected a number");
      return number_value(true);
    }
    if (cur().kind == Tok::Int || cur().kind == Tok::Real) return number_value(false);
    if (accept_kw("true")) return Value(true);
    if (accept_kw("false")) return Value(false);
    if (accept("[")) {
      IntList l;
      if (!is("]")) {
        do l.push_back(signed_int());
        while (accept(","));
      }
      expect("]");
      return Value(std::move(l));
    }
    if (accept("{")) {
      MapEntries m;
      if (!is("}")) {
        do {
          auto k = literal_value();
          expect(":");
          auto v = literal_value();
          m.emplace(std::move(k), std::move(v));
        } while (accept(","));
      }
      expect("}");
      return Value(std::move(m));
    }
    fail("expected a literal value");
  }

  DomainSpec domain() {
    DomainSpec d;
    if (cur().kind == Tok::Ident && cur().text == "lists") {
      take();
      expect("(");
      d.kind = DomainSpec::Kind::Lists;
      d.min_len = signed_int();
      expect("..");
      d.max_len = signed_int();
      expect(",");
      expect("{");
      d.lo = signed_int();
      expect("..");
      d.hi = signed_int();
      expect("}");
      expect(")");
      return d;
    }
    if (cur().kind == Tok::Ident && cur().text == "histograms") {
      take();
      expect("(");
      d.kind = DomainSpec::Kind::Histograms;
      d.size = signed_int();
      expect(",");
      d.lo = signed_int();
      expect("..");
      d.hi = signed_int();
      expect(")");
      return d;
    }
    if (cur().kind == Tok::Ident && cur().text == "graphs") {
      take();
      expect("(");
      d.kind = DomainSpec::Kind::Graphs;
      d.size = signed_int();
      if (d.size < 0 || d.size > 4) fail("graphs(n) supports 0 <= n <= 4");
      expect(")");
      return d;
    }
    expect("{");
    // {lo..hi} or {v1, v2, ...}
    std::size_t k = 0;
    if (ahead(0).kind == Tok::Punct && ahead(0).text == "-") k = 1;
    if (ahead(k).kind == Tok::Int && ahead(k + 1).kind == Tok::Punct && ahead(k + 1).text == "..") {
      d.kind = DomainSpec::Kind::Interval;
      d.lo = signed_int();
      expect("..");
      d.hi = signed_int();
      expect("}");
      return d;
    }
    d.kind = DomainSpec::Kind::Set;
    if (!is("}")) {
      do d.values.push_back(literal_value());
      while (accept(","));
    }
    expect("}");
    return d;
  }

  // ---- statements ----

  CmdPtr stmts() {
    const Span s = cur().span;
    std::vector<CmdPtr> out;
    out.push_back(stmt());
    while (accept(";")) {
      if (at_end() || is("}")) break;
      out.push_back(stmt());
    }
    return make_seq(std::move(out), join(s, prev_span()));
  }

  CmdPtr stmt() {
    std::optional<ExprPtr> inv, var;
    std::optional<LapSpec> lapspec;
    Span annot_span;
    while (cur().kind == Tok::Annot) {
      const Token& a = take();
      if (!annot_span.valid()) annot_span = a.span;
      expect("{");
      if (a.text == "@invariant") {
        if (inv) throw ParseError("duplicate @invariant", a.span);
        inv = formula();
      } else if (a.text == "@variant") {
        if (var) throw ParseError("duplicate @variant", a.span);
        var = formula();
      } else if (a.text == "@lapspec") {
        if (lapspec) throw ParseError("duplicate @lapspec", a.span);
        LapSpec ls;
        if (cur().kind == Tok::Ident && cur().text == "pure") {
          take();
        } else if (cur().kind == Tok::Ident && cur().text == "accuracy") {
          take();
          expect("(");
          ls.accuracy = true;
          ls.delta = rational();
          if (!ls.delta.positive()) throw ParseError("accuracy budget must be positive", prev_span());
          expect(")");
        } else {
          fail("expected 'pure' or 'accuracy(delta)'");
        }
        lapspec = ls;
      } else {
        throw ParseError("unknown annotation '" + a.text + "'", a.span);
      }
      expect("}");
    }
    const Span start = cur().span;
    CmdPtr c = core_stmt();
    const bool is_loop = c->as<Cmd::While>() != nullptr;
    if ((inv || var) && !is_loop)
      throw ParseError("loop annotation attached to a non-loop statement", annot_span);
    if (lapspec) {
      Cmd copy = *c;
      if (auto l = std::get_if<Cmd::Lap>(&copy.node)) l->spec = *lapspec;
      else if (auto lp = std::get_if<Cmd::LapPair>(&copy.node)) lp->spec = *lapspec;
      else throw ParseError("@lapspec attached to a non-Laplace statement", annot_span);
      c = std::make_shared<const Cmd>(std::move(copy));
    }
    if (is_loop && !(bare_loops_ && !inv && !var)) {
      if (!inv || !var) throw ParseError("missing loop annotation", start);
      Cmd copy = *c;
      std::get<Cmd::While>(copy.node).annot = LoopAnnot{*inv, *var, annot_span};
      c = std::make_shared<const Cmd>(std::move(copy));
    }
    return c;
  }

  CmdPtr block() {
    if (is("{")) {
      const Span s = take().span;
      if (accept("}")) return make_cmd(Cmd::Skip{}, join(s, prev_span()));
      auto c = stmts();
      expect("}");
      return c;
    }
    return stmt();
  }

  CmdPtr core_stmt() {
    const Span s = cur().span;
    auto done = [&](Cmd::Node n) { return make_cmd(std::move(n), join(s, prev_span())); };
    if (accept_kw("skip")) return done(Cmd::Skip{});
    if (is("{")) return block();
    if (accept_kw("if")) {
      auto g = formula();
      expect_kw("then");
      auto t = block();
      CmdPtr e = make_cmd(Cmd::Skip{}, prev_span());
      if (accept_kw("else")) e = block();
      return done(Cmd::If{g, t, e});
    }
    if (accept_kw("while")) {
      auto g = formula();
      expect_kw("do");
      auto b = block();
      return done(Cmd::While{g, b, std::nullopt});
    }
    if (accept_kw("return")) {
      if (is("(")) {
        const auto save = i_;
        take();
        auto a = formula();
        if (accept(",")) {
          auto b = formula();
          expect(")");
          return done(Cmd::ReturnPair{a, b});
        }
        i_ = save;
      }
      return done(Cmd::Return{formula()});
    }
    if (accept_kw("assert")) {
      expect("(");
      auto phi = formula();
      expect(")");
      return done(Cmd::Assert{phi});
    }
    if (accept("(")) {
      auto x1 = expect_ident().text;
      expect(",");
      auto x2 = expect_ident().text;
      expect(")");
      expect(":=");
      const Token& m = cur();
      if (m.kind != Tok::Ident) fail("expected a paired mechanism");
      take();
      expect("<");
      expect(">");
      expect("[");
      auto eps = rational();
      expect("]");
      auto args = call_args();
      if (m.text == "Lap") {
        if (args.size() != 2) throw ParseError("Lap<> takes two arguments", m.span);
        return done(Cmd::LapPair{x1, x2, eps, args[0], args[1], {}});
      }
      if (m.text == "Exp") {
        if (args.size() != 4) throw ParseError("Exp<> takes four arguments", m.span);
        return done(Cmd::ExpPair{x1, x2, eps, args[0], args[1], args[2], args[3]});
      }
      if (args.size() % 2 != 0) throw ParseError("paired mechanism needs an even argument count", m.span);
      std::vector<ExprPtr> a1(args.begin(), args.begin() + static_cast<long>(args.size() / 2));
      std::vector<ExprPtr> a2(args.begin() + static_cast<long>(args.size() / 2), args.end());
      return done(Cmd::MechPair{x1, x2, m.text, eps, a1, a2});
    }
    if (cur().kind == Tok::Ident && !kKeywords.count(cur().text)) {
      auto x = take().text;
      expect(":=");
      if (accept_kw("Lap")) {
        expect("[");
        auto eps = rational();
        expect("]");
        auto args = call_args();
        if (args.size() != 1) throw ParseError("Lap takes one argument", prev_span());
        if (!eps.positive()) throw ParseError("mechanism parameter must be positive", prev_span());
        return done(Cmd::Lap{x, eps, args[0], {}});
      }
      if (accept_kw("Exp")) {
        expect("[");
        auto eps = rational();
        expect("]");
        auto args = call_args();
        if (args.size() != 2) throw ParseError("Exp takes a score and an input", prev_span());
        if (!eps.positive()) throw ParseError("mechanism parameter must be positive", prev_span());
        return done(Cmd::Exp{x, eps, args[0], args[1]});
      }
      // name[eps](args) is a custom mechanism; an index expression is never followed by '('.
      if (cur().kind == Tok::Ident && !kKeywords.count(cur().text) && ahead(1).text == "[" &&
          (ahead(2).kind == Tok::Int || ahead(2).kind == Tok::Real) && mechanism_bracket_end()) {
        auto name = take().text;
        expect("[");
        auto eps = rational();
        expect("]");
        auto args = call_args();
        return done(Cmd::Mech{x, name, eps, args});
      }
      return done(Cmd::Assign{x, formula()});
    }
    fail("expected a statement");
  }

  // After `name [ num` checks for `] (` or `/ num ] (`.
  bool mechanism_bracket_end() const {
    std::size_t k = 3;
    if (ahead(k).text == "/") k += 2;
    return ahead(k).text == "]" && ahead(k + 1).text == "(";
  }

  std::vector<ExprPtr> call_args() {
    expect("(");
    std::vector<ExprPtr> args;
    if (!is(")")) {
      do args.push_back(formula());
      while (accept(","));
    }
    expect(")");
    return args;
  }

  // ---- expressions ----

  ExprPtr formula() { return iff(); }

  ExprPtr iff() {
    auto a = implication();
    while (is("<=>")) {
      take();
      auto b = implication();
      a = ex::bin(BinOp::Iff, a, b, join(a->span, b->span));
    }
    return a;
  }

  ExprPtr implication() {
    auto a = disj();
    if (is("==>")) {
      take();
      auto b = implication();
      return ex::bin(BinOp::Implies, a, b, join(a->span, b->span));
    }
    return a;
  }

  ExprPtr disj() {
    auto a = conj();
    while (is("||")) {
      take();
      auto b = conj();
      a = ex::bin(BinOp::Or, a, b, join(a->span, b->span));
    }
    return a;
  }

  ExprPtr conj() {
    auto a = negation();
    while (is("&&")) {
      take();
      auto b = negation();
      a = ex::bin(BinOp::And, a, b, join(a->span, b->span));
    }
    return a;
  }

  ExprPtr negation() {
    if (is("!")) {
      const Span s = take().span;
      auto a = negation();
      return ex::un(UnOp::Not, a, join(s, a->span));
    }
    return comparison();
  }

  ExprPtr comparison() {
    auto a = cons();
    static const std::pair<const char*, BinOp> ops[] = {{"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<=", BinOp::Le},
                                                        {">=", BinOp::Ge}, {"<", BinOp::Lt},  {">", BinOp::Gt}};
    for (const auto& [t, op] : ops) {
      if (is(t)) {
        take();
        auto b = cons();
        return ex::bin(op, a, b, join(a->span, b->span));
      }
    }
    return a;
  }

  ExprPtr cons() {
    auto a = additive();
    if (is("::")) {
      take();
      auto b = cons();
      return ex::bin(BinOp::Cons, a, b, join(a->span, b->span));
    }
    return a;
  }

  ExprPtr additive() {
    auto a = multiplicative();
    for (;;) {
      BinOp op;
      if (is("+")) op = BinOp::Add;
      else if (is("-")) op = BinOp::Sub;
      else return a;
      take();
      auto b = multiplicative();
      a = ex::bin(op, a, b, join(a->span, b->span));
    }
  }

  ExprPtr multiplicative() {
    auto a = unary();
    for (;;) {
      BinOp op;
      if (is("*")) op = BinOp::Mul;
      else if (is("/")) op = BinOp::Div;
      else if (is_kw("div")) op = BinOp::IDiv;
      else if (is_kw("mod")) op = BinOp::Mod;
      else return a;
      take();
      auto b = unary();
      a = ex::bin(op, a, b, join(a->span, b->span));
    }
  }

  ExprPtr unary() {
    const Span s = cur().span;
    if (is("-")) {
      take();
      if (cur().kind == Tok::Int || cur().kind == Tok::Real) {
        auto v = number_value(true);
        return postfix(ex::lit(std::move(v), join(s, prev_span())));
      }
      auto a = unary();
      return ex::un(UnOp::Neg, a, join(s, a->span));
    }
    static const std::pair<const char*, UnOp> ops[] = {
        {"abs", UnOp::Abs}, {"hd", UnOp::Hd}, {"tl", UnOp::Tl}, {"length", UnOp::Length}};
    for (const auto& [k, op] : ops) {
      if (is_kw(k)) {
        take();
        auto a = unary();
        return ex::un(op, a, join(s, a->span));
      }
    }
    return postfix(primary());
  }

  ExprPtr postfix(ExprPtr e) {
    while (is("[")) {
      take();
      auto k = formula();
      if (accept(",")) {
        auto r = formula();
        expect("]");
        e = ex::score(e, k, r, join(e->span, prev_span()));
      } else {
        expect("]");
        e = ex::index(e, k, join(e->span, prev_span()));
      }
    }
    return e;
  }

  QDomain qdomain() {
    QDomain d;
    if (is_kw("dom")) {
      take();
      expect("(");
      d.kind = QDomain::Kind::DomOf;
      d.name = expect_ident().text;
      expect(")");
      return d;
    }
    if (cur().kind == Tok::Ident && !kKeywords.count(cur().text) && ahead(1).text == ":") {
      d.kind = QDomain::Kind::Range;
      d.name = take().text;
      return d;
    }
    d.kind = QDomain::Kind::Interval;
    d.lo = additive();
    expect("..");
    d.hi = additive();
    return d;
  }

  ExprPtr primary() {
    const Token& t = cur();
    const Span s = t.span;
    if (t.kind == Tok::Int || t.kind == Tok::Real) return ex::lit(number_value(false), s);
    if (accept_kw("true")) return ex::lit(Value(true), s);
    if (accept_kw("false")) return ex::lit(Value(false), s);
    if (is_kw("forall") || is_kw("exists")) {
      const Quant q = take().text == "forall" ? Quant::Forall : Quant::Exists;
      auto v = expect_ident().text;
      expect_kw("in");
      auto dom = qdomain();
      expect(":");
      auto body = formula();
      return ex::quant(q, v, dom, body, join(s, body->span));
    }
    if (is("(")) {
      take();
      auto e = formula();
      expect(")");
      return e;
    }
    if (is("[") || is("{")) {
      auto v = literal_value();
      return ex::lit(std::move(v), join(s, prev_span()));
    }
    if (is_kw("min") || is_kw("max")) {
      const BinOp op = take().text == "min" ? BinOp::Min : BinOp::Max;
      auto args = call_args();
      if (args.size() != 2) throw ParseError("min/max take two arguments", s);
      return ex::bin(op, args[0], args[1], join(s, prev_span()));
    }
    if (is_kw("maxgap")) {
      take();
      auto args = call_args();
      if (args.size() != 3) throw ParseError("maxgap takes a score and two inputs", s);
      return ex::maxgap(args[0], args[1], args[2], join(s, prev_span()));
    }
    if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
      take();
      if (is("(")) {
        auto args = call_args();
        return ex::call(t.text, std::move(args), join(s, prev_span()));
      }
      return ex::var(t.text, s);
    }
    fail("expected an expression");
  }
};

}  // namespace

Unit parse_unit(const std::string& text) { return Parser(text).unit(); }
ExprPtr parse_expr(const std::string& text) { return Parser(text).whole_expr(); }
CmdPtr parse_cmd(const std::string& text, bool bare_loops) { return Parser(text, bare_loops).whole_cmd(); }
Type parse_type(const std::string& text) { return Parser(text).whole_type(); }
DomainSpec parse_domain(const std::string& text) { return Parser(text).whole_domain(); }
Value parse_value(const std::string& text) { return Parser(text).whole_value(); }

}  // namespace dpsp
