#include "dpsp/typecheck.hpp"

#include <algorithm>
#include <map>

namespace dpsp {

namespace {

std::string join_diags(const std::vector<Diagnostic>& d) {
  std::string s;
  for (const auto& x : d) s += (s.empty() ? "" : "\n") + x.str();
  return s;
}

}  // namespace

TypeErrors::TypeErrors(std::vector<Diagnostic> diags) : Error(join_diags(diags)), diags_(std::move(diags)) {}

const Type* TypedUnit::type_of(const ExprPtr& e) const {
  auto it = types.find(e.get());
  return it == types.end() ? nullptr : &it->second;
}

bool assignable(const Type& to, const Type& from) {
  if (to.kind == Kind::Real && from.kind == Kind::Int) return true;
  if (to.kind != from.kind) return false;
  if (to.kind == Kind::Map) return to.key() == from.key() && assignable(to.value(), from.value());
  return true;
}

Type type_of_value(const Value& v) {
  switch (v.kind()) {
    case Kind::Int: return Type::integer();
    case Kind::Real: return Type::real();
    case Kind::Bool: return Type::boolean();
    case Kind::List: return Type::list();
    case Kind::Map: {
      const auto& m = v.as_map();
      if (m.empty()) return Type::map(Type::integer(), Type::real());
      Type k = type_of_value(m.begin()->first);
      Type val = type_of_value(m.begin()->second);
      for (const auto& [_, x] : m) {
        Type t = type_of_value(x);
        if (assignable(t, val)) val = t;  // widen int rows to real
      }
      return Type::map(k, val);
    }
  }
  return Type::integer();
}

namespace {

struct Abort {};

class Checker {
 public:
  Checker(const Unit* unit, const Registry& reg) : unit_(unit), reg_(reg) {}

  std::vector<Diagnostic> diags;
  std::unordered_map<const Expr*, Type> types;

  [[noreturn]] void fail(const std::string& msg, Span s) {
    diags.push_back({msg, s});
    throw Abort{};
  }

  void note(const std::string& msg, Span s) { diags.push_back({msg, s}); }

  Type expr(const ExprPtr& e, const TypeScope& scope) {
    Type t = compute(e, scope);
    types[e.get()] = t;
    return t;
  }

  void expect_bool(const ExprPtr& e, const TypeScope& scope, const std::string& what) {
    const Type t = expr(e, scope);
    if (t.kind != Kind::Bool) fail(what + " must be bool, found " + t.str(), e->span);
  }

 private:
  const Unit* unit_;
  const Registry& reg_;

  Type numeric(const ExprPtr& e, const TypeScope& scope, const std::string& what) {
    const Type t = expr(e, scope);
    if (!t.numeric()) fail(what + " must be numeric, found " + t.str(), e->span);
    return t;
  }

  Type of_kind(const ExprPtr& e, const TypeScope& scope, Kind k, const std::string& what) {
    const Type t = expr(e, scope);
    if (t.kind != k) fail(what + " must be " + Type{k, {}}.str() + ", found " + t.str(), e->span);
    return t;
  }

  TypeScope bind(const TypeScope& scope, const std::string& name, Type t) {
    return [scope, name, t](const std::string& n) -> std::optional<Type> {
      if (n == name) return t;
      return scope(n);
    };
  }

  Type compute(const ExprPtr& e, const TypeScope& scope) {
    return std::visit(
        [&](const auto& x) -> Type {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Expr::Var>) {
            if (auto t = scope(x.name)) return *t;
            fail("unbound variable '" + x.name + "'", e->span);
          } else if constexpr (std::is_same_v<T, Expr::Lit>) {
            return type_of_value(x.value);
          } else if constexpr (std::is_same_v<T, Expr::Unary>) {
            switch (x.op) {
              case UnOp::Neg:
              case UnOp::Abs: return numeric(x.a, scope, std::string("operand of ") + op_name(x.op));
              case UnOp::Not: of_kind(x.a, scope, Kind::Bool, "operand of !"); return Type::boolean();
              case UnOp::Hd: of_kind(x.a, scope, Kind::List, "operand of hd"); return Type::integer();
              case UnOp::Tl: of_kind(x.a, scope, Kind::List, "operand of tl"); return Type::list();
              case UnOp::Length: of_kind(x.a, scope, Kind::List, "operand of length"); return Type::integer();
            }
            return Type::integer();
          } else if constexpr (std::is_same_v<T, Expr::Binary>) {
            const std::string what = std::string("operand of ") + op_name(x.op);
            switch (x.op) {
              case BinOp::And:
              case BinOp::Or:
              case BinOp::Implies:
              case BinOp::Iff:
                of_kind(x.a, scope, Kind::Bool, what);
                of_kind(x.b, scope, Kind::Bool, what);
                return Type::boolean();
              case BinOp::Eq:
              case BinOp::Ne: {
                const Type a = expr(x.a, scope), b = expr(x.b, scope);
                if (!assignable(a, b) && !assignable(b, a))
                  fail("cannot compare " + a.str() + " with " + b.str(), e->span);
                return Type::boolean();
              }
              case BinOp::Lt:
              case BinOp::Le:
              case BinOp::Gt:
              case BinOp::Ge:
                numeric(x.a, scope, what);
                numeric(x.b, scope, what);
                return Type::boolean();
              case BinOp::Cons:
                of_kind(x.a, scope, Kind::Int, what);
                of_kind(x.b, scope, Kind::List, what);
                return Type::list();
              case BinOp::IDiv:
              case BinOp::Mod:
                of_kind(x.a, scope, Kind::Int, what);
                of_kind(x.b, scope, Kind::Int, what);
                return Type::integer();
              case BinOp::Div:
                numeric(x.a, scope, what);
                numeric(x.b, scope, what);
                return Type::real();
              default: {
                const Type a = numeric(x.a, scope, what), b = numeric(x.b, scope, what);
                return a.kind == Kind::Int && b.kind == Kind::Int ? Type::integer() : Type::real();
              }
            }
          } else if constexpr (std::is_same_v<T, Expr::Call>) {
            std::vector<Type> params;
            Type result;
            if (const PredDecl* p = unit_ ? unit_->find_pred(x.name) : nullptr) {
              for (const auto& pp : p->params) params.push_back(pp.second);
              result = Type::boolean();
            } else if (const Builtin* b = reg_.find(x.name)) {
              params = b->params;
              result = b->result;
            } else {
              fail("unknown function '" + x.name + "'", e->span);
            }
            if (params.size() != x.args.size())
              fail("'" + x.name + "' expects " + std::to_string(params.size()) + " arguments, got " +
                       std::to_string(x.args.size()),
                   e->span);
            for (std::size_t i = 0; i < params.size(); ++i) {
              const Type a = expr(x.args[i], scope);
              if (!assignable(params[i], a))
                fail("argument " + std::to_string(i + 1) + " of '" + x.name + "' must be " + params[i].str() +
                         ", found " + a.str(),
                     x.args[i]->span);
            }
            return result;
          } else if constexpr (std::is_same_v<T, Expr::Index>) {
            const Type b = expr(x.base, scope);
            const Type k = expr(x.key, scope);
            if (b.kind == Kind::List) {
              if (k.kind != Kind::Int) fail("list index must be int", x.key->span);
              return Type::integer();
            }
            if (b.kind != Kind::Map) fail("only maps and lists can be indexed, found " + b.str(), e->span);
            if (!assignable(b.key(), k)) fail("map key must be " + b.key().str() + ", found " + k.str(), x.key->span);
            return b.value();
          } else if constexpr (std::is_same_v<T, Expr::Score>) {
            return score_type(x.score, x.input, scope, e->span, x.r);
          } else if constexpr (std::is_same_v<T, Expr::Quantified>) {
            Type vt = Type::integer();
            switch (x.dom.kind) {
              case QDomain::Kind::Interval:
                of_kind(x.dom.lo, scope, Kind::Int, "quantifier bound");
                of_kind(x.dom.hi, scope, Kind::Int, "quantifier bound");
                break;
              case QDomain::Kind::Range: {
                const RangeDecl* r = unit_ ? unit_->find_range(x.dom.name) : nullptr;
                if (!r) fail("unknown range '" + x.dom.name + "'", e->span);
                if (!r->values.empty()) vt = type_of_value(r->values.front());
                break;
              }
              case QDomain::Kind::DomOf: {
                const VarDecl* d = unit_ ? unit_->find_var(x.dom.name) : nullptr;
                if (!d) fail("dom() of undeclared variable '" + x.dom.name + "'", e->span);
                vt = d->type;
                break;
              }
            }
            of_kind(x.body, bind(scope, x.var, vt), Kind::Bool, "quantifier body");
            return Type::boolean();
          } else if constexpr (std::is_same_v<T, Expr::MaxGap>) {
            score_type(x.score, x.e1, scope, e->span, nullptr);
            score_type(x.score, x.e2, scope, e->span, nullptr);
            return Type::real();
          } else {
            return expr(x.body, scope);
          }
        },
        e->node);
  }

  Type score_type(const ExprPtr& s, const ExprPtr& input, const TypeScope& scope, Span span, const ExprPtr& r) {
    const Type st = expr(s, scope);
    if (st.kind != Kind::Map || st.value().kind != Kind::Map || !st.value().value().numeric())
      fail("score function must be map<input, map<range, real>>, found " + st.str(), s->span);
    const Type it = expr(input, scope);
    if (!assignable(st.key(), it))
      fail("score input must be " + st.key().str() + ", found " + it.str(), input->span);
    if (r) {
      const Type rt = expr(r, scope);
      if (!assignable(st.value().key(), rt)) fail("score range element has type " + rt.str(), r->span);
      if (auto l = r->as<Expr::Lit>(); l && unit_ && unit_->ranges.size() == 1) {
        const auto& vals = unit_->ranges.front().values;
        if (std::find(vals.begin(), vals.end(), l->value) == vals.end())
          fail("score applied outside the declared range", r->span);
      }
    }
    (void)span;
    return st.value().value();
  }
};

bool domain_fits(const DomainSpec& d, const Type& t) {
  switch (d.kind) {
    case DomainSpec::Kind::None: return true;
    case DomainSpec::Kind::Interval: return t.numeric();
    case DomainSpec::Kind::Lists:
    case DomainSpec::Kind::Histograms: return t.kind == Kind::List;
    case DomainSpec::Kind::Graphs: return t == Type::map(Type::integer(), Type::list());
    case DomainSpec::Kind::Set:
      return std::all_of(d.values.begin(), d.values.end(), [&](const Value& v) { return assignable(t, type_of_value(v)); });
  }
  return false;
}

class ProgramChecker {
 public:
  ProgramChecker(const Unit& u, const Registry& reg) : u_(u), c_(&u, reg) {}

  TypedUnit run() {
    for (const auto& v : u_.vars) {
      if (!domain_fits(v.domain, v.type)) c_.note("domain " + v.domain.str() + " does not fit type " + v.type.str(), v.span);
      if (is_ghost(v.name) && v.type.kind != Kind::Real) c_.note("ghost variables are real", v.span);
    }
    for (const auto& r : u_.ranges) {
      if (r.values.empty()) c_.note("range '" + r.name + "' is empty", r.span);
      for (const auto& v : r.values)
        if (!v.is_int()) c_.note("range elements must be integers", r.span);
    }
    for (const auto& p : u_.preds) {
      auto params = p.params;
      TypeScope scope = [params](const std::string& n) -> std::optional<Type> {
        for (const auto& [k, t] : params)
          if (k == n) return t;
        return std::nullopt;
      };
      guard([&] { c_.expect_bool(p.body, scope, "predicate body"); });
    }
    target_ = u_.is_target_program();
    check_return_shape();
    if (u_.pre) guard([&] { c_.expect_bool(u_.pre, relational_scope(u_, std::nullopt), "precondition"); });
    cmd(u_.body);
    if (!c_.diags.empty()) throw TypeErrors(c_.diags);
    TypedUnit out;
    out.unit = &u_;
    out.types = std::move(c_.types);
    out.return_type = return_type_;
    return out;
  }

 private:
  const Unit& u_;
  Checker c_;
  bool target_ = false;
  std::optional<Type> return_type_;

  template <class F>
  void guard(F&& f) {
    try {
      f();
    } catch (const Abort&) {
    }
  }

  TypeScope source_scope() const {
    const Unit* u = &u_;
    return [u](const std::string& n) -> std::optional<Type> {
      if (n.rfind("__", 0) == 0) return std::nullopt;
      for (const auto& v : u->vars)
        if (v.name == n) return v.type;
      return std::nullopt;
    };
  }

  TypeScope body_scope() const { return target_ ? relational_scope(u_, std::nullopt) : source_scope(); }

  void check_return_shape() {
    int returns = 0;
    walk(u_.body, [&](const Cmd& c) {
      if (c.as<Cmd::Return>() || c.as<Cmd::ReturnPair>()) ++returns;
    });
    const Cmd* last = u_.body.get();
    if (auto s = last->as<Cmd::Seq>()) last = s->cmds.back().get();
    const bool tail = last->as<Cmd::Return>() || last->as<Cmd::ReturnPair>();
    if (returns != 1 || !tail) c_.note("a program must end with exactly one return statement", u_.body->span);
  }

  Type var_type(const std::string& name, Span s) {
    if (target_) {
      if (split_tag(name).second == 0) c_.fail("target programs assign tagged variables only, found '" + name + "'", s);
    } else if (split_tag(name).second != 0 || name.rfind("__", 0) == 0) {
      c_.fail("tagged or reserved variable '" + name + "' in a source program", s);
    }
    const VarDecl* d = u_.find_var(name);
    if (!d || is_ghost(d->name)) c_.fail("assignment to undeclared variable '" + name + "'", s);
    return d->type;
  }

  void assign_check(const std::string& var, const ExprPtr& e, Span s) {
    const Type vt = var_type(var, s);
    const Type et = c_.expr(e, body_scope());
    if (!assignable(vt, et)) c_.fail("cannot assign " + et.str() + " to '" + var + "' of type " + vt.str(), e->span);
  }

  void lap_arg(const ExprPtr& e) {
    const Type t = c_.expr(e, body_scope());
    if (!t.numeric()) c_.fail("Laplace argument must be numeric, found " + t.str(), e->span);
    if (t.kind != Kind::Int) c_.fail("Laplace argument must be int (discrete Laplace), found " + t.str(), e->span);
  }

  void lap_target(const std::string& x, Span s) {
    if (var_type(x, s).kind != Kind::Int) c_.fail("Laplace output '" + x + "' must be int", s);
  }

  void exp_check(const std::string& x, const ExprPtr& score, const ExprPtr& input, Span s) {
    if (u_.ranges.size() != 1) c_.fail("exponential mechanism needs exactly one declared range", s);
    const Type xt = var_type(x, s);
    if (xt.kind != Kind::Int) c_.fail("exponential mechanism output '" + x + "' must be int", s);
    const Type st = c_.expr(score, body_scope());
    if (st.kind != Kind::Map || st.value().kind != Kind::Map || !st.value().value().numeric() ||
        st.value().key().kind != Kind::Int)
      c_.fail("score must be map<input, map<int, real>>, found " + st.str(), score->span);
    const Type it = c_.expr(input, body_scope());
    if (!assignable(st.key(), it)) c_.fail("score input must be " + st.key().str() + ", found " + it.str(), input->span);
  }

  void pair_names(const std::string& x1, const std::string& x2, Span s) {
    auto [b1, t1] = split_tag(x1);
    auto [b2, t2] = split_tag(x2);
    if (t1 != 1 || t2 != 2 || b1 != b2) c_.fail("paired outputs must be x_1 and x_2 of one variable", s);
  }

  void cmd(const CmdPtr& c) {
    if (target_ ? c->is_source_only() : c->is_target_only()) {
      c_.note(std::string(target_ ? "source" : "target") + " construct inside a " +
                  (target_ ? "target" : "source") + " program",
              c->span);
      return;
    }
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Cmd::Skip>) {
          } else if constexpr (std::is_same_v<T, Cmd::Seq>) {
            for (const auto& s : x.cmds) cmd(s);
          } else if constexpr (std::is_same_v<T, Cmd::Assign>) {
            guard([&] { assign_check(x.var, x.e, c->span); });
          } else if constexpr (std::is_same_v<T, Cmd::Lap>) {
            guard([&] { lap_target(x.var, c->span); });
            guard([&] { lap_arg(x.e); });
          } else if constexpr (std::is_same_v<T, Cmd::Exp>) {
            guard([&] { exp_check(x.var, x.score, x.input, c->span); });
          } else if constexpr (std::is_same_v<T, Cmd::Mech>) {
            guard([&] { var_type(x.var, c->span); });
            for (const auto& a : x.args) guard([&] { c_.expr(a, body_scope()); });
          } else if constexpr (std::is_same_v<T, Cmd::If>) {
            guard([&] { c_.expect_bool(x.guard, body_scope(), "guard"); });
            cmd(x.then_c);
            cmd(x.else_c);
          } else if constexpr (std::is_same_v<T, Cmd::While>) {
            guard([&] { c_.expect_bool(x.guard, body_scope(), "guard"); });
            if (x.annot) {
              guard([&] { c_.expect_bool(x.annot->invariant, relational_scope(u_, std::nullopt), "invariant"); });
              guard([&] {
                const Type vt = c_.expr(x.annot->variant, relational_scope(u_, std::nullopt));
                if (vt.kind != Kind::Int) c_.fail("variant must be int, found " + vt.str(), x.annot->variant->span);
                for (const auto& v : free_vars(x.annot->variant))
                  if (split_tag(v).second != 1)
                    c_.fail("variant may mention tag-1 variables only, found '" + v + "'", x.annot->variant->span);
              });
            }
            cmd(x.body);
          } else if constexpr (std::is_same_v<T, Cmd::Return>) {
            guard([&] { return_type_ = c_.expr(x.e, body_scope()); });
          } else if constexpr (std::is_same_v<T, Cmd::Assert>) {
            guard([&] { c_.expect_bool(x.phi, body_scope(), "assertion"); });
          } else if constexpr (std::is_same_v<T, Cmd::LapPair>) {
            guard([&] { pair_names(x.x1, x.x2, c->span); });
            guard([&] { lap_target(x.x1, c->span); });
            guard([&] { lap_arg(x.e1); });
            guard([&] { lap_arg(x.e2); });
          } else if constexpr (std::is_same_v<T, Cmd::ExpPair>) {
            guard([&] { pair_names(x.x1, x.x2, c->span); });
            guard([&] { exp_check(x.x1, x.s1, x.e1, c->span); });
            guard([&] { exp_check(x.x2, x.s2, x.e2, c->span); });
          } else if constexpr (std::is_same_v<T, Cmd::MechPair>) {
            guard([&] { pair_names(x.x1, x.x2, c->span); });
            for (const auto& a : x.args1) guard([&] { c_.expr(a, body_scope()); });
            for (const auto& a : x.args2) guard([&] { c_.expr(a, body_scope()); });
          } else {
            guard([&] {
              const Type a = c_.expr(x.e1, body_scope());
              const Type b = c_.expr(x.e2, body_scope());
              if (!assignable(a, b) && !assignable(b, a)) c_.fail("returned pair has mismatched types", c->span);
              return_type_ = a;
            });
          }
        },
        c->node);
  }
};

}  // namespace

TypeScope relational_scope(const Unit& u, std::optional<Type> return_type) {
  const Unit* up = &u;
  return [up, return_type](const std::string& n) -> std::optional<Type> {
    if (is_ghost(n)) return Type::real();
    if (n == "__out_1" || n == "__out_2") return return_type;
    auto [base, tag] = split_tag(n);
    if (tag == 0) return std::nullopt;
    for (const auto& v : up->vars)
      if (v.name == base && !is_ghost(v.name)) return v.type;
    return std::nullopt;
  };
}

Type infer_type(const ExprPtr& e, const TypeScope& scope, const Unit* unit, const Registry& reg) {
  Checker c(unit, reg);
  try {
    return c.expr(e, scope);
  } catch (const Abort&) {
    throw TypeErrors(c.diags);
  }
}

TypedUnit typecheck(const Unit& u, const Registry& reg) { return ProgramChecker(u, reg).run(); }

}  // namespace dpsp
