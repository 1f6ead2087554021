#include "dpsp/smtlib.hpp"

#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "dpsp/eval.hpp"
#include "dpsp/typecheck.hpp"

namespace dpsp {

namespace {

std::string sort_of(const Type& t) {
  switch (t.kind) {
    case Kind::Int: return "Int";
    case Kind::Real: return "Real";
    case Kind::Bool: return "Bool";
    case Kind::List: return "(Seq Int)";
    case Kind::Map: return "(Array " + sort_of(t.key()) + " " + sort_of(t.value()) + ")";
  }
  return "Int";
}

std::string smt_int(std::int64_t v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

std::string smt_real(double r) {
  if (!std::isfinite(r)) throw SmtError("non-finite real literal");
  std::string s = format_real(std::fabs(r));
  if (s.find_first_of("eE") != std::string::npos) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(20) << std::fabs(r);
    s = os.str();
    while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  }
  if (s.find('.') == std::string::npos) s += ".0";
  return r < 0 ? "(- " + s + ")" : s;
}

std::string default_smt(const Type& t) {
  switch (t.kind) {
    case Kind::Int: return "0";
    case Kind::Real: return "0.0";
    case Kind::Bool: return "false";
    case Kind::List: return "(as seq.empty (Seq Int))";
    case Kind::Map: return "((as const " + sort_of(t) + ") " + default_smt(t.value()) + ")";
  }
  return "0";
}

std::string smt_value(const Value& v, const Type& t) {
  switch (v.kind()) {
    case Kind::Int: return t.kind == Kind::Real ? smt_real(static_cast<double>(v.as_int())) : smt_int(v.as_int());
    case Kind::Real: return smt_real(v.as_real());
    case Kind::Bool: return v.as_bool() ? "true" : "false";
    case Kind::List: {
      const auto& l = v.as_list();
      if (l.empty()) return "(as seq.empty (Seq Int))";
      if (l.size() == 1) return "(seq.unit " + smt_int(l[0]) + ")";
      std::string s = "(seq.++";
      for (auto x : l) s += " (seq.unit " + smt_int(x) + ")";
      return s + ")";
    }
    case Kind::Map: {
      const Type kt = t.kind == Kind::Map ? t.key() : Type::integer();
      const Type vt = t.kind == Kind::Map ? t.value() : Type::real();
      std::string s = default_smt(t.kind == Kind::Map ? t : Type::map(kt, vt));
      for (const auto& [k, x] : v.as_map()) s = "(store " + s + " " + smt_value(k, kt) + " " + smt_value(x, vt) + ")";
      return s;
    }
  }
  return "0";
}

struct Term {
  std::string s;
  Type t;
};

class Translator {
 public:
  Translator(const Unit& u, const SmtOptions& opt) : u_(u), opt_(opt) {
    ctx_.unit = &u;
    ctx_.reg = opt.reg;
  }

  std::set<std::string> free_consts;
  std::map<std::string, std::string> funs;  // builtin name -> declaration

  Term tr(const ExprPtr& e) {
    return std::visit([&](const auto& x) -> Term { return go(x, e); }, e->node);
  }

  std::string boolean(const ExprPtr& e) {
    Term t = tr(e);
    if (t.t.kind != Kind::Bool) throw SmtError("formula is not boolean", e->span);
    return t.s;
  }

  Type var_type(const std::string& name) const {
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
      if (it->first == name) return it->second;
    if (is_ghost(name)) return Type::real();
    if (const VarDecl* d = u_.find_var(name)) return d->type;
    throw SmtError("variable '" + name + "' has no known type");
  }

  void push_param(const std::string& n, Type t) { bound_.emplace_back(n, std::move(t)); }
  void pop_param() { bound_.pop_back(); }

 private:
  const Unit& u_;
  const SmtOptions& opt_;
  EvalCtx ctx_;
  std::vector<std::pair<std::string, Type>> bound_;
  int gap_names_ = 0;

  bool is_bound(const std::string& n) const {
    for (const auto& [k, _] : bound_)
      if (k == n) return true;
    return false;
  }

  static std::string as_real(const Term& t) { return t.t.kind == Kind::Int ? "(to_real " + t.s + ")" : t.s; }

  static Type join(const Term& a, const Term& b) {
    return a.t.kind == Kind::Real || b.t.kind == Kind::Real ? Type::real() : Type::integer();
  }

  std::pair<std::string, std::string> numeric_pair(const Term& a, const Term& b) {
    if (join(a, b).kind == Kind::Real) return {as_real(a), as_real(b)};
    return {a.s, b.s};
  }

  Term go(const Expr::Var& x, const ExprPtr&) {
    const Type t = var_type(x.name);
    if (!is_bound(x.name)) free_consts.insert(x.name);
    return {x.name, t};
  }

  Term go(const Expr::Lit& x, const ExprPtr&) {
    const Type t = type_of_value(x.value);
    return {smt_value(x.value, t), t};
  }

  Term go(const Expr::Unary& x, const ExprPtr&) {
    Term a = tr(x.a);
    switch (x.op) {
      case UnOp::Neg: return {"(- " + a.s + ")", a.t};
      case UnOp::Not: return {"(not " + a.s + ")", Type::boolean()};
      case UnOp::Abs: {
        const std::string zero = a.t.kind == Kind::Real ? "0.0" : "0";
        return {"(ite (< " + a.s + " " + zero + ") (- " + a.s + ") " + a.s + ")", a.t};
      }
      case UnOp::Hd:
        return {"(ite (= (seq.len " + a.s + ") 0) 0 (seq.nth " + a.s + " 0))", Type::integer()};
      case UnOp::Tl: return {"(seq.extract " + a.s + " 1 (- (seq.len " + a.s + ") 1))", Type::list()};
      case UnOp::Length: return {"(seq.len " + a.s + ")", Type::integer()};
    }
    return a;
  }

  Term go(const Expr::Binary& x, const ExprPtr& e) {
    Term a = tr(x.a), b = tr(x.b);
    auto bin = [](const char* op, const std::string& l, const std::string& r) {
      return std::string("(") + op + " " + l + " " + r + ")";
    };
    switch (x.op) {
      case BinOp::And: return {bin("and", a.s, b.s), Type::boolean()};
      case BinOp::Or: return {bin("or", a.s, b.s), Type::boolean()};
      case BinOp::Implies: return {bin("=>", a.s, b.s), Type::boolean()};
      case BinOp::Iff: return {bin("=", a.s, b.s), Type::boolean()};
      case BinOp::Cons: return {"(seq.++ (seq.unit " + a.s + ") " + b.s + ")", Type::list()};
      case BinOp::Eq:
      case BinOp::Ne: {
        std::string l = a.s, r = b.s;
        if (a.t.numeric() && b.t.numeric()) std::tie(l, r) = numeric_pair(a, b);
        const std::string eq = bin("=", l, r);
        return {x.op == BinOp::Eq ? eq : "(not " + eq + ")", Type::boolean()};
      }
      case BinOp::Lt:
      case BinOp::Le:
      case BinOp::Gt:
      case BinOp::Ge: {
        auto [l, r] = numeric_pair(a, b);
        return {bin(op_name(x.op), l, r), Type::boolean()};
      }
      case BinOp::Div: return {bin("/", as_real(a), as_real(b)), Type::real()};
      case BinOp::IDiv: return {bin("div", a.s, b.s), Type::integer()};
      case BinOp::Mod: return {bin("mod", a.s, b.s), Type::integer()};
      case BinOp::Min:
      case BinOp::Max: {
        auto [l, r] = numeric_pair(a, b);
        const char* cmp = x.op == BinOp::Min ? "<=" : ">=";
        return {"(ite (" + std::string(cmp) + " " + l + " " + r + ") " + l + " " + r + ")", join(a, b)};
      }
      case BinOp::Add:
      case BinOp::Sub:
      case BinOp::Mul: {
        auto [l, r] = numeric_pair(a, b);
        return {bin(op_name(x.op), l, r), join(a, b)};
      }
    }
    throw SmtError("unsupported operator", e->span);
  }

  Term go(const Expr::Call& x, const ExprPtr& e) {
    if (x.name == "acc" && x.args.size() == 2) {
      auto l0 = x.args[0]->as<Expr::Lit>(), l1 = x.args[1]->as<Expr::Lit>();
      if (l0 && l1) return {smt_real(accuracy_radius(l0->value.as_real(), l1->value.as_real())), Type::real()};
    }
    std::vector<Type> params;
    Type result;
    if (const PredDecl* p = u_.find_pred(x.name)) {
      for (const auto& [_, t] : p->params) params.push_back(t);
      result = Type::boolean();
    } else if (const Builtin* b = opt_.reg->find(x.name)) {
      params = b->params;
      result = b->result;
      std::string decl = "(declare-fun " + x.name + " (";
      for (std::size_t i = 0; i < params.size(); ++i) decl += (i ? " " : "") + sort_of(params[i]);
      funs[x.name] = decl + ") " + sort_of(result) + ")";
    } else {
      throw SmtError("unknown function '" + x.name + "'", e->span);
    }
    if (params.size() != x.args.size()) throw SmtError("arity mismatch for '" + x.name + "'", e->span);
    std::string s = "(" + x.name;
    for (std::size_t i = 0; i < x.args.size(); ++i) {
      Term a = tr(x.args[i]);
      s += " " + (params[i].kind == Kind::Real ? as_real(a) : a.s);
    }
    if (x.args.empty()) s = x.name;
    else s += ")";
    return {s, result};
  }

  Term go(const Expr::Index& x, const ExprPtr& e) {
    Term b = tr(x.base), k = tr(x.key);
    if (b.t.kind == Kind::List) return {"(seq.nth " + b.s + " " + k.s + ")", Type::integer()};
    if (b.t.kind != Kind::Map) throw SmtError("index into a non-collection", e->span);
    return {"(select " + b.s + " " + (b.t.key().kind == Kind::Real ? as_real(k) : k.s) + ")", b.t.value()};
  }

  Term score_cell(const Term& s, const std::string& input, const std::string& r) {
    return {"(select (select " + s.s + " " + input + ") " + r + ")", s.t.value().value()};
  }

  Term go(const Expr::Score& x, const ExprPtr& e) {
    Term s = tr(x.score), in = tr(x.input), r = tr(x.r);
    if (s.t.kind != Kind::Map || s.t.value().kind != Kind::Map) throw SmtError("score is not a table", e->span);
    return score_cell(s, in.s, r.s);
  }

  Term go(const Expr::MaxGap& x, const ExprPtr& e) {
    if (u_.ranges.size() != 1) throw SmtError("maxgap needs exactly one declared range", e->span);
    Term s = tr(x.score), a = tr(x.e1), b = tr(x.e2);
    if (s.t.kind != Kind::Map || s.t.value().kind != Kind::Map) throw SmtError("score is not a table", e->span);
    // One let-bound gap per range element, then an n-way max over them.
    const auto& range = u_.ranges.front().values;
    std::string binds;
    std::vector<std::string> g;
    for (const auto& r : range) {
      const std::string rs = smt_value(r, s.t.value().key());
      Term c1 = score_cell(s, a.s, rs), c2 = score_cell(s, b.s, rs);
      const std::string d = "(- " + as_real(c1) + " " + as_real(c2) + ")";
      g.push_back("__gap" + std::to_string(gap_names_++));
      binds += " (" + g.back() + " (ite (< " + d + " 0.0) (- " + d + ") " + d + "))";
    }
    std::string acc = g.empty() ? "0.0" : g.back();
    for (std::size_t i = g.size(); i-- > 1;) {
      std::string cond;
      for (std::size_t j = i; j < g.size(); ++j) cond += " (>= " + g[i - 1] + " " + g[j] + ")";
      if (g.size() - i > 1) cond = " (and" + cond + ")";
      acc = "(ite" + cond + " " + g[i - 1] + " " + acc + ")";
    }
    if (!g.empty()) acc = "(let (" + binds.substr(1) + ") " + acc + ")";
    return {acc, Type::real()};
  }

  Term go(const Expr::Quantified& x, const ExprPtr& e) {
    Type vt = Type::integer();
    std::vector<Value> values;
    std::string guard;
    bool finite = false;
    switch (x.dom.kind) {
      case QDomain::Kind::Interval: {
        Term lo = tr(x.dom.lo), hi = tr(x.dom.hi);
        guard = "(and (<= " + lo.s + " " + x.var + ") (<= " + x.var + " " + hi.s + "))";
        auto l = x.dom.lo->as<Expr::Lit>(), h = x.dom.hi->as<Expr::Lit>();
        if (l && h) {
          for (auto v = l->value.as_int(); v <= h->value.as_int(); ++v) values.emplace_back(v);
          finite = true;
        }
        break;
      }
      case QDomain::Kind::Range: {
        const RangeDecl* r = u_.find_range(x.dom.name);
        if (!r) throw SmtError("unknown range '" + x.dom.name + "'", e->span);
        values = r->values;
        finite = true;
        guard = "(or";
        for (const auto& v : values) guard += " (= " + x.var + " " + smt_value(v, vt) + ")";
        guard += ")";
        break;
      }
      case QDomain::Kind::DomOf: {
        vt = var_type(x.dom.name);
        try {
          values = ctx_.domain_of(x.dom.name);
          finite = true;
        } catch (const EvalError&) {
        }
        break;
      }
    }
    const bool forall = x.q == Quant::Forall;
    if (opt_.expand_quantifiers && finite) {
      std::string s = forall ? "(and true" : "(or false";
      for (const auto& v : values) {
        push_param(x.var, vt);
        Term body = tr(subst_value(x.body, x.var, v));
        pop_param();
        s += " " + body.s;
      }
      return {s + ")", Type::boolean()};
    }
    push_param(x.var, vt);
    Term body = tr(x.body);
    pop_param();
    std::string inner = body.s;
    if (!guard.empty()) inner = forall ? "(=> " + guard + " " + inner + ")" : "(and " + guard + " " + inner + ")";
    return {std::string("(") + (forall ? "forall" : "exists") + " ((" + x.var + " " + sort_of(vt) + ")) " + inner + ")",
            Type::boolean()};
  }

  Term go(const Expr::Labeled& x, const ExprPtr&) { return tr(x.body); }

  static ExprPtr subst_value(const ExprPtr& body, const std::string& var, const Value& v) {
    return subst(body, var, ex::lit(v));
  }
};

}  // namespace

std::string emit_smtlib(const Unit& u, const std::vector<Obligation>& obs, const SmtOptions& opt) {
  Translator tr(u, opt);
  std::vector<std::string> preds;
  for (const auto& p : u.preds) {
    for (const auto& [n, t] : p.params) tr.push_param(n, t);
    const std::string body = tr.boolean(p.body);
    for (std::size_t i = 0; i < p.params.size(); ++i) tr.pop_param();
    std::string s = "(define-fun " + p.name + " (";
    for (std::size_t i = 0; i < p.params.size(); ++i)
      s += (i ? " " : "") + std::string("(") + p.params[i].first + " " + sort_of(p.params[i].second) + ")";
    preds.push_back(s + ") Bool " + body + ")");
  }
  std::vector<std::string> blocks;
  for (const auto& ob : obs) {
    tr.free_consts.clear();
    const std::string f = tr.boolean(ob.formula);
    std::ostringstream os;
    os << "; " << ob.id << ": " << ob.rule << (ob.span.valid() ? " (" + ob.span.str() + ")" : "") << "\n";
    os << "(push 1)\n";
    for (const auto& c : tr.free_consts) os << "(declare-const " << c << " " << sort_of(tr.var_type(c)) << ")\n";
    os << "(assert (not " << f << "))\n(check-sat)\n(pop 1)\n";
    blocks.push_back(os.str());
  }
  std::ostringstream out;
  out << "(set-logic ALL)\n";
  for (const auto& [_, d] : tr.funs) out << d << "\n";
  for (const auto& p : preds) out << p << "\n";
  for (const auto& b : blocks) out << b;
  return out.str();
}

namespace {

struct SExpr {
  bool atom = true;
  std::string text;
  std::vector<SExpr> items;
};

class SexpReader {
 public:
  explicit SexpReader(const std::string& t) : t_(t) {}

  bool done() {
    skip();
    return i_ >= t_.size();
  }

  SExpr read() {
    skip();
    if (i_ >= t_.size()) throw SmtError("unexpected end of script");
    if (t_[i_] == ')') throw SmtError("unbalanced ')' at offset " + std::to_string(i_));
    if (t_[i_] == '(') {
      ++i_;
      SExpr e;
      e.atom = false;
      for (;;) {
        skip();
        if (i_ >= t_.size()) throw SmtError("unbalanced '(': missing ')'");
        if (t_[i_] == ')') {
          ++i_;
          return e;
        }
        e.items.push_back(read());
      }
    }
    SExpr a;
    if (t_[i_] == '|') {
      const auto end = t_.find('|', i_ + 1);
      if (end == std::string::npos) throw SmtError("unterminated quoted symbol");
      a.text = t_.substr(i_, end - i_ + 1);
      i_ = end + 1;
      return a;
    }
    const auto start = i_;
    while (i_ < t_.size() && !std::isspace(static_cast<unsigned char>(t_[i_])) && t_[i_] != '(' && t_[i_] != ')' &&
           t_[i_] != ';')
      ++i_;
    a.text = t_.substr(start, i_ - start);
    return a;
  }

 private:
  const std::string& t_;
  std::size_t i_ = 0;

  void skip() {
    while (i_ < t_.size()) {
      if (std::isspace(static_cast<unsigned char>(t_[i_]))) {
        ++i_;
      } else if (t_[i_] == ';') {
        while (i_ < t_.size() && t_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }
};

const std::set<std::string>& theory_symbols() {
  static const std::set<std::string> s = {
      "true", "false", "not", "and", "or", "=>", "=", "ite", "+", "-", "*", "/", "div", "mod", "<", "<=", ">", ">=",
      "to_real", "to_int", "select", "store", "seq.len", "seq.nth", "seq.unit", "seq.++", "seq.extract", "seq.empty",
      "as", "const", "forall", "exists", "Int", "Real", "Bool", "Seq", "Array", "distinct", "abs", "let", "!"};
  return s;
}

bool is_literal(const std::string& a) {
  if (a.empty()) return false;
  if (std::isdigit(static_cast<unsigned char>(a[0]))) {
    for (char c : a)
      if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') return false;
    return true;
  }
  return a[0] == '"' || a[0] == '#' || a[0] == ':';
}

void check_symbols(const SExpr& e, std::vector<std::set<std::string>>& scopes, std::set<std::string> bound) {
  if (e.atom) {
    if (is_literal(e.text) || theory_symbols().count(e.text) || bound.count(e.text)) return;
    for (const auto& s : scopes)
      if (s.count(e.text)) return;
    throw SmtError("undeclared symbol '" + e.text + "'");
  }
  if (e.items.empty()) throw SmtError("empty application");
  const auto& head = e.items.front();
  if (head.atom && (head.text == "forall" || head.text == "exists")) {
    if (e.items.size() != 3 || e.items[1].atom) throw SmtError("malformed quantifier");
    for (const auto& b : e.items[1].items) {
      if (b.atom || b.items.size() != 2 || !b.items[0].atom) throw SmtError("malformed binder");
      bound.insert(b.items[0].text);
    }
    check_symbols(e.items[2], scopes, bound);
    return;
  }
  if (head.atom && head.text == "let") {
    if (e.items.size() != 3 || e.items[1].atom) throw SmtError("malformed let");
    std::set<std::string> inner = bound;
    for (const auto& b : e.items[1].items) {
      if (b.atom || b.items.size() != 2 || !b.items[0].atom) throw SmtError("malformed let binding");
      check_symbols(b.items[1], scopes, bound);
      inner.insert(b.items[0].text);
    }
    check_symbols(e.items[2], scopes, inner);
    return;
  }
  if (head.atom && head.text == "as") return;  // sort ascriptions such as (as seq.empty (Seq Int))
  for (const auto& x : e.items) check_symbols(x, scopes, bound);
}

}  // namespace

SmtScript reparse_smtlib(const std::string& text) {
  SmtScript out;
  SexpReader rd(text);
  std::vector<std::set<std::string>> scopes(1);
  while (!rd.done()) {
    SExpr cmd = rd.read();
    if (cmd.atom || cmd.items.empty() || !cmd.items[0].atom) throw SmtError("top-level form is not a command");
    const std::string& h = cmd.items[0].text;
    ++out.commands;
    if (h == "set-logic" || h == "set-option" || h == "set-info" || h == "exit" || h == "get-model") {
      continue;
    } else if (h == "push") {
      scopes.emplace_back();
    } else if (h == "pop") {
      if (scopes.size() <= 1) throw SmtError("pop without matching push");
      scopes.pop_back();
    } else if (h == "declare-const" || h == "declare-fun") {
      if (cmd.items.size() < 3 || !cmd.items[1].atom) throw SmtError("malformed " + h);
      scopes.back().insert(cmd.items[1].text);
      out.declared.push_back(cmd.items[1].text);
    } else if (h == "define-fun") {
      if (cmd.items.size() != 5 || !cmd.items[1].atom || cmd.items[2].atom) throw SmtError("malformed define-fun");
      std::set<std::string> params;
      for (const auto& p : cmd.items[2].items) {
        if (p.atom || p.items.size() != 2) throw SmtError("malformed define-fun parameter");
        params.insert(p.items[0].text);
      }
      check_symbols(cmd.items[4], scopes, params);
      scopes.back().insert(cmd.items[1].text);
      out.declared.push_back(cmd.items[1].text);
    } else if (h == "assert") {
      if (cmd.items.size() != 2) throw SmtError("assert takes one term");
      check_symbols(cmd.items[1], scopes, {});
      ++out.asserts;
    } else if (h == "check-sat") {
      ++out.check_sats;
    } else {
      throw SmtError("unknown command '" + h + "'");
    }
  }
  return out;
}

}  // namespace dpsp
