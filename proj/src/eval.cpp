#include "dpsp/eval.hpp"

#include <cmath>

#include "dpsp/pretty.hpp"

namespace dpsp {

const std::vector<Value>& EvalCtx::domain_of(const std::string& name) const {
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  if (domains) {
    if (auto it = domains->find(name); it != domains->end()) return cache[name] = it->second;
    const auto base = split_tag(name).first;
    if (auto it = domains->find(base); it != domains->end()) return cache[name] = it->second;
  }
  const VarDecl* d = unit ? unit->find_var(name) : nullptr;
  if (!d) throw EvalError("no domain known for '" + name + "'");
  if (d->domain.kind == DomainSpec::Kind::None) throw EvalError("variable '" + d->name + "' has no declared domain", d->span);
  return cache[name] = d->domain.enumerate();
}

std::vector<Value> EvalCtx::quant_domain(const QDomain& d, const Env& env) const {
  switch (d.kind) {
    case QDomain::Kind::Interval: {
      const auto lo = eval(d.lo, env, *this).as_int();
      const auto hi = eval(d.hi, env, *this).as_int();
      std::vector<Value> out;
      for (auto v = lo; v <= hi; ++v) out.emplace_back(v);
      return out;
    }
    case QDomain::Kind::Range: {
      const RangeDecl* r = unit ? unit->find_range(d.name) : nullptr;
      if (!r) throw EvalError("unknown range '" + d.name + "'");
      return r->values;
    }
    case QDomain::Kind::DomOf: return domain_of(d.name);
  }
  return {};
}

const std::vector<Value>& EvalCtx::exp_range() const {
  if (!unit) throw EvalError("no program context for the exponential mechanism range");
  return unit->exp_range().values;
}

Value score_at(const Value& score, const Value& input, const Value& r) {
  const auto& rows = score.as_map();
  auto row = rows.find(input);
  if (row == rows.end()) throw EvalError("score undefined at input " + input.str());
  const auto& cols = row->second.as_map();
  auto cell = cols.find(r);
  if (cell == cols.end()) throw EvalError("score undefined at (" + input.str() + ", " + r.str() + ")");
  return cell->second;
}

double max_gap(const Value& score, const Value& e1, const Value& e2, const std::vector<Value>& range) {
  double best = 0;
  for (const auto& r : range)
    best = std::max(best, std::fabs(score_at(score, e1, r).as_real() - score_at(score, e2, r).as_real()));
  return best;
}

namespace {

std::int64_t checked_neg(std::int64_t a) { return checked_sub(0, a); }

// Euclidean division: remainder always non-negative.
std::pair<std::int64_t, std::int64_t> euclid(std::int64_t a, std::int64_t b, Span s) {
  if (b == 0) throw EvalError("integer division by zero", s);
  std::int64_t q = a / b, r = a % b;
  if (r < 0) {
    if (b > 0) --q, r += b;
    else ++q, r -= b;
  }
  return {q, r};
}

Value arith(BinOp op, const Value& a, const Value& b, Span s) {
  if (a.is_int() && b.is_int()) {
    const auto x = a.as_int(), y = b.as_int();
    switch (op) {
      case BinOp::Add: return checked_add(x, y);
      case BinOp::Sub: return checked_sub(x, y);
      case BinOp::Mul: return checked_mul(x, y);
      case BinOp::Min: return std::min(x, y);
      case BinOp::Max: return std::max(x, y);
      default: break;
    }
  }
  const double x = a.as_real(), y = b.as_real();
  switch (op) {
    case BinOp::Add: return x + y;
    case BinOp::Sub: return x - y;
    case BinOp::Mul: return x * y;
    case BinOp::Min: return std::min(x, y);
    case BinOp::Max: return std::max(x, y);
    case BinOp::Div:
      if (y == 0) throw EvalError("division by zero", s);
      return x / y;
    default: throw EvalError("bad arithmetic operator", s);
  }
}

}  // namespace

Value eval(const ExprPtr& e, const Env& env, const EvalCtx& ctx) {
  return std::visit(
      [&](const auto& x) -> Value {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Var>) {
          if (auto v = env.lookup(x.name)) return *v;
          throw EvalError("unbound variable '" + x.name + "'", e->span);
        } else if constexpr (std::is_same_v<T, Expr::Lit>) {
          return x.value;
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          const Value a = eval(x.a, env, ctx);
          switch (x.op) {
            case UnOp::Neg: return a.is_int() ? Value(checked_neg(a.as_int())) : Value(-a.as_real());
            case UnOp::Not: return !a.as_bool();
            case UnOp::Abs:
              if (a.is_int()) return a.as_int() < 0 ? checked_neg(a.as_int()) : a.as_int();
              return std::fabs(a.as_real());
            case UnOp::Hd: {
              const auto& l = a.as_list();
              return l.empty() ? std::int64_t{0} : l.front();
            }
            case UnOp::Tl: {
              const auto& l = a.as_list();
              if (l.empty()) return a;
              return IntList(l.begin() + 1, l.end());
            }
            case UnOp::Length: return static_cast<std::int64_t>(a.as_list().size());
          }
          return a;
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          switch (x.op) {
            case BinOp::And: return eval_bool(x.a, env, ctx) && eval_bool(x.b, env, ctx);
            case BinOp::Or: return eval_bool(x.a, env, ctx) || eval_bool(x.b, env, ctx);
            case BinOp::Implies: return !eval_bool(x.a, env, ctx) || eval_bool(x.b, env, ctx);
            case BinOp::Iff: return eval_bool(x.a, env, ctx) == eval_bool(x.b, env, ctx);
            default: break;
          }
          const Value a = eval(x.a, env, ctx);
          const Value b = eval(x.b, env, ctx);
          switch (x.op) {
            case BinOp::Eq: return loosely_equal(a, b);
            case BinOp::Ne: return !loosely_equal(a, b);
            case BinOp::Lt: return numeric_compare(a, b) < 0;
            case BinOp::Le: return numeric_compare(a, b) <= 0;
            case BinOp::Gt: return numeric_compare(a, b) > 0;
            case BinOp::Ge: return numeric_compare(a, b) >= 0;
            case BinOp::IDiv: return euclid(a.as_int(), b.as_int(), e->span).first;
            case BinOp::Mod: return euclid(a.as_int(), b.as_int(), e->span).second;
            case BinOp::Cons: {
              IntList l;
              l.reserve(b.as_list().size() + 1);
              l.push_back(a.as_int());
              l.insert(l.end(), b.as_list().begin(), b.as_list().end());
              return l;
            }
            default: return arith(x.op, a, b, e->span);
          }
        } else if constexpr (std::is_same_v<T, Expr::Call>) {
          std::vector<Value> args;
          args.reserve(x.args.size());
          for (const auto& a : x.args) args.push_back(eval(a, env, ctx));
          if (const PredDecl* p = ctx.unit ? ctx.unit->find_pred(x.name) : nullptr) {
            if (args.size() != p->params.size())
              throw EvalError("predicate '" + x.name + "' arity mismatch", e->span);
            std::map<std::string, Value> binds;
            for (std::size_t i = 0; i < args.size(); ++i) binds[p->params[i].first] = args[i];
            MapEnv inner(binds);
            return eval(p->body, inner, ctx);
          }
          if (const Builtin* b = ctx.reg->find(x.name)) {
            try {
              return (*b)(args);
            } catch (const EvalError& err) {
              if (err.span().valid()) throw;
              throw EvalError(err.message(), e->span);
            }
          }
          throw EvalError("unknown function '" + x.name + "'", e->span);
        } else if constexpr (std::is_same_v<T, Expr::Index>) {
          const Value base = eval(x.base, env, ctx);
          const Value key = eval(x.key, env, ctx);
          if (base.is_list()) {
            const auto& l = base.as_list();
            const auto i = key.as_int();
            if (i < 0 || i >= static_cast<std::int64_t>(l.size()))
              throw EvalError("list index " + key.str() + " out of range", e->span);
            return l[static_cast<std::size_t>(i)];
          }
          const auto& m = base.as_map();
          auto it = m.find(key);
          if (it == m.end()) throw EvalError("key " + key.str() + " not in map", e->span);
          return it->second;
        } else if constexpr (std::is_same_v<T, Expr::Score>) {
          try {
            return score_at(eval(x.score, env, ctx), eval(x.input, env, ctx), eval(x.r, env, ctx));
          } catch (const EvalError& err) {
            throw EvalError(err.message(), e->span);
          }
        } else if constexpr (std::is_same_v<T, Expr::Quantified>) {
          const auto dom = ctx.quant_domain(x.dom, env);
          const bool forall = x.q == Quant::Forall;
          for (const auto& v : dom) {
            BindEnv inner(env, x.var, v);
            if (eval_bool(x.body, inner, ctx) != forall) return !forall;
          }
          return forall;
        } else if constexpr (std::is_same_v<T, Expr::MaxGap>) {
          return max_gap(eval(x.score, env, ctx), eval(x.e1, env, ctx), eval(x.e2, env, ctx), ctx.exp_range());
        } else {
          return eval(x.body, env, ctx);
        }
      },
      e->node);
}

bool eval_bool(const ExprPtr& e, const Env& env, const EvalCtx& ctx) {
  const Value v = eval(e, env, ctx);
  if (!v.is_bool()) throw EvalError("expected a boolean, got " + v.str() + " from " + pretty(e), e->span);
  return v.as_bool();
}

}  // namespace dpsp
