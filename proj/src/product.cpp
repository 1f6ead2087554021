#include "dpsp/product.hpp"

#include <set>

#include "dpsp/pretty.hpp"

namespace dpsp {

namespace {

ExprPtr rename_in(const ExprPtr& e, int tag, const std::set<std::string>& bound);

std::vector<ExprPtr> rename_all(const std::vector<ExprPtr>& es, int tag, const std::set<std::string>& bound) {
  std::vector<ExprPtr> out;
  for (const auto& e : es) out.push_back(rename_in(e, tag, bound));
  return out;
}

ExprPtr rename_in(const ExprPtr& e, int tag, const std::set<std::string>& bound) {
  const Span s = e->span;
  return std::visit(
      [&](const auto& x) -> ExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Var>) {
          if (bound.count(x.name) || is_ghost(x.name)) return e;
          return ex::var(tagged(x.name, tag), s);
        } else if constexpr (std::is_same_v<T, Expr::Lit>) {
          return e;
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          return ex::un(x.op, rename_in(x.a, tag, bound), s);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return ex::bin(x.op, rename_in(x.a, tag, bound), rename_in(x.b, tag, bound), s);
        } else if constexpr (std::is_same_v<T, Expr::Call>) {
          return ex::call(x.name, rename_all(x.args, tag, bound), s);
        } else if constexpr (std::is_same_v<T, Expr::Index>) {
          return ex::index(rename_in(x.base, tag, bound), rename_in(x.key, tag, bound), s);
        } else if constexpr (std::is_same_v<T, Expr::Score>) {
          return ex::score(rename_in(x.score, tag, bound), rename_in(x.input, tag, bound), rename_in(x.r, tag, bound), s);
        } else if constexpr (std::is_same_v<T, Expr::Quantified>) {
          QDomain d = x.dom;
          if (d.kind == QDomain::Kind::Interval) {
            d.lo = rename_in(d.lo, tag, bound);
            d.hi = rename_in(d.hi, tag, bound);
          } else if (d.kind == QDomain::Kind::DomOf && !bound.count(d.name)) {
            d.name = tagged(d.name, tag);
          }
          auto inner = bound;
          inner.insert(x.var);
          return ex::quant(x.q, x.var, d, rename_in(x.body, tag, inner), s);
        } else if constexpr (std::is_same_v<T, Expr::MaxGap>) {
          return ex::maxgap(rename_in(x.score, tag, bound), rename_in(x.e1, tag, bound), rename_in(x.e2, tag, bound), s);
        } else {
          return ex::label(x.label, rename_in(x.body, tag, bound), s);
        }
      },
      e->node);
}

CmdPtr sync_assert(const ExprPtr& guard, Span s) {
  return make_cmd(Cmd::Assert{ex::bin(BinOp::Iff, rename(guard, 1), rename(guard, 2), s)}, s);
}

}  // namespace

ExprPtr rename(const ExprPtr& e, int tag) { return rename_in(e, tag, {}); }

CmdPtr self_product(const CmdPtr& c) {
  const Span s = c->span;
  return std::visit(
      [&](const auto& x) -> CmdPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Cmd::Skip>) {
          return c;
        } else if constexpr (std::is_same_v<T, Cmd::Seq>) {
          std::vector<CmdPtr> parts;
          for (const auto& k : x.cmds) parts.push_back(self_product(k));
          return make_seq(parts, s);
        } else if constexpr (std::is_same_v<T, Cmd::Assign>) {
          return make_seq({make_cmd(Cmd::Assign{tagged(x.var, 1), rename(x.e, 1)}, s),
                           make_cmd(Cmd::Assign{tagged(x.var, 2), rename(x.e, 2)}, s)},
                          s);
        } else if constexpr (std::is_same_v<T, Cmd::Lap>) {
          return make_cmd(Cmd::LapPair{tagged(x.var, 1), tagged(x.var, 2), x.eps, rename(x.e, 1), rename(x.e, 2), x.spec}, s);
        } else if constexpr (std::is_same_v<T, Cmd::Exp>) {
          return make_cmd(Cmd::ExpPair{tagged(x.var, 1), tagged(x.var, 2), x.eps, rename(x.score, 1),
                                       rename(x.input, 1), rename(x.score, 2), rename(x.input, 2)},
                          s);
        } else if constexpr (std::is_same_v<T, Cmd::Mech>) {
          std::vector<ExprPtr> a1, a2;
          for (const auto& a : x.args) {
            a1.push_back(rename(a, 1));
            a2.push_back(rename(a, 2));
          }
          return make_cmd(Cmd::MechPair{tagged(x.var, 1), tagged(x.var, 2), x.name, x.eps, a1, a2}, s);
        } else if constexpr (std::is_same_v<T, Cmd::If>) {
          return make_seq({sync_assert(x.guard, s),
                           make_cmd(Cmd::If{rename(x.guard, 1), self_product(x.then_c), self_product(x.else_c)}, s)},
                          s);
        } else if constexpr (std::is_same_v<T, Cmd::While>) {
          auto body = make_seq({self_product(x.body), sync_assert(x.guard, s)}, x.body->span);
          return make_seq({sync_assert(x.guard, s), make_cmd(Cmd::While{rename(x.guard, 1), body, x.annot}, s)}, s);
        } else if constexpr (std::is_same_v<T, Cmd::Return>) {
          return make_cmd(Cmd::ReturnPair{rename(x.e, 1), rename(x.e, 2)}, s);
        } else {
          throw Error("self_product applies to probabilistic programs only", s);
        }
      },
      c->node);
}

Unit product_unit(const Unit& u) {
  Unit t = u;
  t.body = self_product(u.body);
  return t;
}

namespace {

// Forward, flow-sensitive: an assignment from untainted data clears the target.
class Taint {
 public:
  using Set = std::set<std::string>;
  std::vector<Diagnostic> warnings;
  std::vector<Diagnostic> errors;

  Set flow(const CmdPtr& c, Set in, bool implicit) {
    return std::visit(
        [&](const auto& x) -> Set {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Cmd::Seq>) {
            for (const auto& k : x.cmds) in = flow(k, std::move(in), implicit);
            return in;
          } else if constexpr (std::is_same_v<T, Cmd::Assign>) {
            if (implicit || offender(x.e, in)) in.insert(x.var);
            else in.erase(x.var);
            return in;
          } else if constexpr (std::is_same_v<T, Cmd::Lap> || std::is_same_v<T, Cmd::Exp> ||
                               std::is_same_v<T, Cmd::Mech>) {
            in.insert(x.var);
            return in;
          } else if constexpr (std::is_same_v<T, Cmd::If>) {
            const auto v = offender(x.guard, in);
            if (v) note(warnings, "branch guard '" + pretty(x.guard) + "' depends on sampled variable '" + *v +
                                      "'; synchronization relies on the branch assert", c->span);
            Set out = flow(x.then_c, in, implicit || v);
            for (auto& n : flow(x.else_c, in, implicit || v)) out.insert(n);
            return out;
          } else if constexpr (std::is_same_v<T, Cmd::While>) {
            // Iterate to the loop-head fixpoint, then report against it once.
            const std::size_t mark = warnings.size();
            Set head = in;
            for (;;) {
              warnings.resize(mark);
              Set next = in;
              for (auto& n : flow(x.body, head, implicit || offender(x.guard, head))) next.insert(n);
              if (next == head) break;
              head = std::move(next);
            }
            if (auto v = offender(x.guard, head))
              note(errors, "loop guard '" + pretty(x.guard) + "' depends on sampled variable '" + *v + "'", c->span);
            return head;
          } else {
            return in;
          }
        },
        c->node);
  }

 private:
  static std::optional<std::string> offender(const ExprPtr& e, const Set& tainted) {
    for (const auto& v : free_vars(e))
      if (tainted.count(v)) return v;
    return std::nullopt;
  }

  static void note(std::vector<Diagnostic>& out, std::string msg, Span s) {
    for (const auto& d : out)
      if (d.span == s && d.message == msg) return;
    out.push_back({std::move(msg), s});
  }
};

}  // namespace

std::vector<Diagnostic> taint_check(const CmdPtr& c) {
  Taint t;
  t.flow(c, {}, false);
  if (!t.errors.empty()) {
    // The first error's span is carried by the exception; later ones keep theirs inline.
    std::string msg = t.errors.front().message;
    for (std::size_t i = 1; i < t.errors.size(); ++i) msg += "\n" + t.errors[i].str();
    throw TaintError(msg, t.errors.front().span);
  }
  return t.warnings;
}

}  // namespace dpsp
