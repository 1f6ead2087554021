#include "dpsp/pretty.hpp"

#include <cmath>
#include <sstream>

namespace dpsp {

namespace {

enum Prec {
  kQuant = 1,
  kIff = 2,
  kImplies = 3,
  kOr = 4,
  kAnd = 5,
  kNot = 6,
  kCmp = 7,
  kCons = 8,
  kAdd = 9,
  kMul = 10,
  kPrefix = 11,
  kAtom = 12,
};

int prec_of(BinOp op) {
  switch (op) {
    case BinOp::Iff: return kIff;
    case BinOp::Implies: return kImplies;
    case BinOp::Or: return kOr;
    case BinOp::And: return kAnd;
    case BinOp::Cons: return kCons;
    case BinOp::Add:
    case BinOp::Sub: return kAdd;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::IDiv:
    case BinOp::Mod: return kMul;
    case BinOp::Min:
    case BinOp::Max: return kAtom;
    default: return kCmp;
  }
}

std::string str(const ExprPtr& e, int ctx);

std::string args_str(const std::vector<ExprPtr>& args) {
  std::string s;
  for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + str(args[i], 0);
  return s;
}

std::string wrap(const std::string& s, int own, int ctx) { return own < ctx ? "(" + s + ")" : s; }

std::string str(const ExprPtr& e, int ctx) {
  if (!e) return "true";
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Var>) {
          return x.name;
        } else if constexpr (std::is_same_v<T, Expr::Lit>) {
          const auto s = x.value.str();
          const bool negative = (x.value.is_int() && x.value.as_int() < 0) ||
                                (x.value.is_real() && std::signbit(x.value.as_real()));
          return wrap(s, negative ? kPrefix : kAtom, ctx);
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          switch (x.op) {
            case UnOp::Neg: {
              const bool num_lit = x.a->template as<Expr::Lit>() && x.a->template as<Expr::Lit>()->value.is_numeric();
              return wrap("-" + (num_lit ? "(" + str(x.a, 0) + ")" : str(x.a, kPrefix)), kPrefix, ctx);
            }
            case UnOp::Not: return wrap("!" + str(x.a, kNot), kNot, ctx);
            default: return wrap(std::string(op_name(x.op)) + "(" + str(x.a, 0) + ")", kPrefix, ctx);
          }
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          if (x.op == BinOp::Min || x.op == BinOp::Max)
            return std::string(op_name(x.op)) + "(" + str(x.a, 0) + ", " + str(x.b, 0) + ")";
          const int p = prec_of(x.op);
          int lp = p, rp = p + 1;  // left associative
          if (x.op == BinOp::Implies || x.op == BinOp::Cons) lp = p + 1, rp = p;
          if (p == kCmp) lp = rp = p + 1;
          return wrap(str(x.a, lp) + " " + op_name(x.op) + " " + str(x.b, rp), p, ctx);
        } else if constexpr (std::is_same_v<T, Expr::Call>) {
          return x.name + "(" + args_str(x.args) + ")";
        } else if constexpr (std::is_same_v<T, Expr::Index>) {
          return str(x.base, kAtom) + "[" + str(x.key, 0) + "]";
        } else if constexpr (std::is_same_v<T, Expr::Score>) {
          return str(x.score, kAtom) + "[" + str(x.input, 0) + ", " + str(x.r, 0) + "]";
        } else if constexpr (std::is_same_v<T, Expr::Quantified>) {
          return std::string("(") + (x.q == Quant::Forall ? "forall " : "exists ") + x.var + " in " +
                 pretty(x.dom) + " : " + str(x.body, 0) + ")";
        } else if constexpr (std::is_same_v<T, Expr::MaxGap>) {
          return "maxgap(" + str(x.score, 0) + ", " + str(x.e1, 0) + ", " + str(x.e2, 0) + ")";
        } else {
          return str(x.body, ctx);
        }
      },
      e->node);
}

std::string lapspec_prefix(const LapSpec& s, const std::string& pad) {
  if (!s.accuracy) return "";
  return "@lapspec{accuracy(" + s.delta.str() + ")}\n" + pad;
}

}  // namespace

std::string pretty(const ExprPtr& e) { return str(e, 0); }

std::string pretty(const QDomain& d) {
  switch (d.kind) {
    case QDomain::Kind::Interval: return str(d.lo, kAdd) + ".." + str(d.hi, kAdd);
    case QDomain::Kind::Range: return d.name;
    case QDomain::Kind::DomOf: return "dom(" + d.name + ")";
  }
  return "";
}

std::string pretty(const CmdPtr& c, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  auto block = [&](const CmdPtr& b) { return "{\n" + pad + "  " + pretty(b, indent + 2) + "\n" + pad + "}"; };
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Cmd::Skip>) {
          return "skip";
        } else if constexpr (std::is_same_v<T, Cmd::Seq>) {
          std::string s;
          for (std::size_t i = 0; i < x.cmds.size(); ++i) s += (i ? ";\n" + pad : "") + pretty(x.cmds[i], indent);
          return s;
        } else if constexpr (std::is_same_v<T, Cmd::Assign>) {
          return x.var + " := " + pretty(x.e);
        } else if constexpr (std::is_same_v<T, Cmd::Lap>) {
          return lapspec_prefix(x.spec, pad) + x.var + " := Lap[" + x.eps.str() + "](" + pretty(x.e) + ")";
        } else if constexpr (std::is_same_v<T, Cmd::Exp>) {
          return x.var + " := Exp[" + x.eps.str() + "](" + pretty(x.score) + ", " + pretty(x.input) + ")";
        } else if constexpr (std::is_same_v<T, Cmd::Mech>) {
          return x.var + " := " + x.name + "[" + x.eps.str() + "](" + args_str(x.args) + ")";
        } else if constexpr (std::is_same_v<T, Cmd::If>) {
          return "if " + pretty(x.guard) + " then " + block(x.then_c) + " else " + block(x.else_c);
        } else if constexpr (std::is_same_v<T, Cmd::While>) {
          std::string s;
          if (x.annot) {
            s += "@invariant{" + pretty(x.annot->invariant) + "}\n" + pad;
            s += "@variant{" + pretty(x.annot->variant) + "}\n" + pad;
          }
          return s + "while " + pretty(x.guard) + " do " + block(x.body);
        } else if constexpr (std::is_same_v<T, Cmd::Return>) {
          return "return " + pretty(x.e);
        } else if constexpr (std::is_same_v<T, Cmd::Assert>) {
          return "assert(" + pretty(x.phi) + ")";
        } else if constexpr (std::is_same_v<T, Cmd::LapPair>) {
          return lapspec_prefix(x.spec, pad) + "(" + x.x1 + ", " + x.x2 + ") := Lap<>[" + x.eps.str() + "](" +
                 pretty(x.e1) + ", " + pretty(x.e2) + ")";
        } else if constexpr (std::is_same_v<T, Cmd::ExpPair>) {
          return "(" + x.x1 + ", " + x.x2 + ") := Exp<>[" + x.eps.str() + "](" + pretty(x.s1) + ", " +
                 pretty(x.e1) + ", " + pretty(x.s2) + ", " + pretty(x.e2) + ")";
        } else if constexpr (std::is_same_v<T, Cmd::MechPair>) {
          auto all = x.args1;
          all.insert(all.end(), x.args2.begin(), x.args2.end());
          return "(" + x.x1 + ", " + x.x2 + ") := " + x.name + "<>[" + x.eps.str() + "](" + args_str(all) + ")";
        } else {
          return "return (" + pretty(x.e1) + ", " + pretty(x.e2) + ")";
        }
      },
      c->node);
}

std::string pretty(const Unit& u) {
  std::ostringstream os;
  for (const auto& v : u.vars) {
    os << "decl " << v.name << " : " << v.type.str();
    if (v.domain.kind != DomainSpec::Kind::None) os << " in " << v.domain.str();
    os << ";\n";
  }
  for (const auto& r : u.ranges) {
    os << "range " << r.name << " = [";
    for (std::size_t i = 0; i < r.values.size(); ++i) os << (i ? ", " : "") << r.values[i].str();
    os << "];\n";
  }
  for (const auto& p : u.preds) {
    os << "pred " << p.name << "(";
    for (std::size_t i = 0; i < p.params.size(); ++i)
      os << (i ? ", " : "") << p.params[i].first << " : " << p.params[i].second.str();
    os << ") = " << pretty(p.body) << ";\n";
  }
  if (u.pre) os << "pre { " << pretty(u.pre) << " };\n";
  if (u.target) os << "target (" << u.target->eps.str() << ", " << u.target->delta.str() << ");\n";
  os << "\n" << pretty(u.body) << "\n";
  return os.str();
}

}  // namespace dpsp
