#include "dpsp/logic.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "dpsp/pretty.hpp"

namespace dpsp {

namespace {

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 0;; ++i) {
    std::string n = base + "__" + std::to_string(i);
    if (!avoid.count(n)) return n;
  }
}

ExprPtr subst_in(const ExprPtr& e, const std::map<std::string, ExprPtr>& s);

std::vector<ExprPtr> subst_all(const std::vector<ExprPtr>& es, const std::map<std::string, ExprPtr>& s) {
  std::vector<ExprPtr> out;
  for (const auto& e : es) out.push_back(subst_in(e, s));
  return out;
}

ExprPtr subst_in(const ExprPtr& e, const std::map<std::string, ExprPtr>& s) {
  if (s.empty()) return e;
  const Span sp = e->span;
  return std::visit(
      [&](const auto& x) -> ExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Var>) {
          auto it = s.find(x.name);
          return it == s.end() ? e : it->second;
        } else if constexpr (std::is_same_v<T, Expr::Lit>) {
          return e;
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          return ex::un(x.op, subst_in(x.a, s), sp);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return ex::bin(x.op, subst_in(x.a, s), subst_in(x.b, s), sp);
        } else if constexpr (std::is_same_v<T, Expr::Call>) {
          return ex::call(x.name, subst_all(x.args, s), sp);
        } else if constexpr (std::is_same_v<T, Expr::Index>) {
          return ex::index(subst_in(x.base, s), subst_in(x.key, s), sp);
        } else if constexpr (std::is_same_v<T, Expr::Score>) {
          return ex::score(subst_in(x.score, s), subst_in(x.input, s), subst_in(x.r, s), sp);
        } else if constexpr (std::is_same_v<T, Expr::Quantified>) {
          QDomain d = x.dom;
          if (d.kind == QDomain::Kind::Interval) {
            d.lo = subst_in(d.lo, s);
            d.hi = subst_in(d.hi, s);
          }
          // Only substitutions that reach the body matter.
          const auto body_fv = free_vars(x.body);
          std::map<std::string, ExprPtr> inner;
          std::set<std::string> incoming;
          for (const auto& [k, v] : s) {
            if (k == x.var || !body_fv.count(k)) continue;
            inner.emplace(k, v);
            for (auto& n : free_vars(v)) incoming.insert(n);
          }
          if (inner.empty()) return ex::quant(x.q, x.var, d, x.body, sp);
          std::string var = x.var;
          ExprPtr body = x.body;
          if (incoming.count(var)) {
            std::set<std::string> avoid = incoming;
            for (auto& n : body_fv) avoid.insert(n);
            for (const auto& [k, _] : inner) avoid.insert(k);
            var = fresh_name(x.var, avoid);
            body = subst_in(body, {{x.var, ex::var(var)}});
          }
          return ex::quant(x.q, var, d, subst_in(body, inner), sp);
        } else if constexpr (std::is_same_v<T, Expr::MaxGap>) {
          return ex::maxgap(subst_in(x.score, s), subst_in(x.e1, s), subst_in(x.e2, s), sp);
        } else {
          return ex::label(x.label, subst_in(x.body, s), sp);
        }
      },
      e->node);
}

}  // namespace

ExprPtr subst(const ExprPtr& e, const std::map<std::string, ExprPtr>& s) {
  std::map<std::string, ExprPtr> live;
  const auto fv = free_vars(e);
  for (const auto& [k, v] : s)
    if (fv.count(k)) live.emplace(k, v);
  return subst_in(e, live);
}

ExprPtr subst(const ExprPtr& e, const std::string& x, const ExprPtr& by) { return subst(e, {{x, by}}); }

const char* status_name(ObStatus s) {
  switch (s) {
    case ObStatus::Unverified: return "unverified";
    case ObStatus::Falsified: return "falsified";
    case ObStatus::GroundVerified: return "ground-verified";
    case ObStatus::Exported: return "exported";
  }
  return "unverified";
}

nlohmann::json to_json(const Obligation& ob) {
  nlohmann::json j;
  j["id"] = ob.id;
  j["rule"] = ob.rule;
  j["span"] = ob.span.str();
  j["formula"] = pretty(ob.formula);
  j["status"] = status_name(ob.status);
  if (ob.status == ObStatus::Falsified) {
    nlohmann::json cx = nlohmann::json::object();
    for (const auto& [k, v] : ob.counterexample) cx[k] = to_json(v);
    j["counterexample"] = cx;
    j["blame"] = ob.blame;
    j["blame_span"] = ob.blame_span.str();
  }
  if (ob.status == ObStatus::GroundVerified) j["assignments_checked"] = ob.assignments_checked;
  return j;
}

namespace {

std::string where(Span s) { return s.valid() ? " at " + s.str() : ""; }

class Wp {
 public:
  Wp(const Unit& u, const AxiomSet* axioms) : u_(u), axioms_(axioms) {}

  std::vector<Obligation> side;
  bool used_axioms = false;

  ExprPtr run(const CmdPtr& c, const ExprPtr& q) {
    return std::visit([&](const auto& x) -> ExprPtr { return rule(x, c->span, q); }, c->node);
  }

 private:
  const Unit& u_;
  const AxiomSet* axioms_;
  int fresh_ = 0;

  std::string bound(const char* base) { return std::string(base) + std::to_string(fresh_++); }

  static ExprPtr num(double x) { return ex::lit(Value(x)); }

  void oblige(std::string rule, Span s, ExprPtr f) {
    Obligation ob;
    ob.rule = std::move(rule);
    ob.span = s;
    ob.formula = std::move(f);
    side.push_back(std::move(ob));
  }

  ExprPtr rule(const Cmd::Skip&, Span, const ExprPtr& q) { return q; }

  ExprPtr rule(const Cmd::Seq& x, Span, const ExprPtr& q) {
    ExprPtr cur = q;
    for (auto it = x.cmds.rbegin(); it != x.cmds.rend(); ++it) cur = run(*it, cur);
    return cur;
  }

  ExprPtr rule(const Cmd::Assign& x, Span, const ExprPtr& q) { return subst(q, x.var, x.e); }

  ExprPtr rule(const Cmd::Assert& x, Span s, const ExprPtr& q) {
    return ex::conj(ex::label("assert" + where(s), x.phi, s), q);
  }

  ExprPtr rule(const Cmd::If& x, Span, const ExprPtr& q) {
    return ex::conj(ex::implies(x.guard, run(x.then_c, q)),
                    ex::implies(ex::un(UnOp::Not, x.guard), run(x.else_c, q)));
  }

  ExprPtr rule(const Cmd::While& x, Span s, const ExprPtr& q) {
    if (!x.annot) throw VcError("missing loop annotation", s);
    const ExprPtr inv = x.annot->invariant;
    const ExprPtr var = x.annot->variant;
    const Span as = x.annot->span.valid() ? x.annot->span : s;
    const std::string k = bound("k");
    oblige("loop variant bounds iterations" + where(s), as,
           ex::implies(ex::conj(inv, ex::bin(BinOp::Le, var, ex::lit(Value(0)))), ex::un(UnOp::Not, x.guard)));
    // {inv and b and var = k} body {inv and var < k}; k is then replaced by the entry value of var.
    const ExprPtr inner_post =
        ex::conj(ex::label("invariant preserved" + where(s), inv, as),
                 ex::label("variant decreases" + where(s), ex::bin(BinOp::Lt, var, ex::var(k)), as));
    const ExprPtr body_wp = subst(run(x.body, inner_post), k, var);
    oblige("loop invariant preserved" + where(s), as, ex::implies(ex::conj(inv, x.guard), body_wp));
    oblige("loop exit establishes postcondition" + where(s), as,
           ex::implies(ex::conj(inv, ex::un(UnOp::Not, x.guard)), q));
    return ex::label("invariant holds on entry" + where(s), inv, as);
  }

  ExprPtr rule(const Cmd::LapPair& x, Span s, const ExprPtr& q) {
    const std::string v = bound("v");
    const double eps = x.eps.to_double();
    const ExprPtr cost = ex::mul(ex::un(UnOp::Abs, ex::bin(BinOp::Sub, x.e1, x.e2)), num(eps));
    std::map<std::string, ExprPtr> sub{{x.x1, ex::var(v)},
                                       {x.x2, ex::var(v)},
                                       {kAlpha, ex::add(ex::var(kAlpha), cost)}};
    ExprPtr body;
    if (x.spec.accuracy) {
      const double d = x.spec.delta.to_double();
      sub[kDelta] = ex::add(ex::var(kDelta), num(d));
      const ExprPtr radius = ex::call("acc", {num(eps), num(d)});
      const ExprPtr close = ex::bin(BinOp::Le, ex::un(UnOp::Abs, ex::bin(BinOp::Sub, ex::var(v), x.e1)), radius);
      body = ex::implies(ex::implies(ex::eq(x.e1, x.e2), close), subst(q, sub));
    } else {
      body = subst(q, sub);
    }
    return ex::quant(Quant::Forall, v, QDomain{QDomain::Kind::DomOf, nullptr, nullptr, x.x1}, body, s);
  }

  ExprPtr rule(const Cmd::ExpPair& x, Span s, const ExprPtr& q) {
    if (u_.ranges.size() != 1) throw VcError("exponential mechanism needs exactly one declared range", s);
    const std::string r = bound("r");
    const ExprPtr cost = ex::mul(num(x.eps.to_double()), ex::maxgap(x.s1, x.e1, x.e2, s));
    const ExprPtr body = subst(q, {{x.x1, ex::var(r)}, {x.x2, ex::var(r)}, {kAlpha, ex::add(ex::var(kAlpha), cost)}});
    return ex::conj(ex::label("score functions agree" + where(s), ex::eq(x.s1, x.s2), s),
                    ex::quant(Quant::Forall, r, QDomain{QDomain::Kind::Range, nullptr, nullptr, u_.ranges.front().name},
                              body, s));
  }

  ExprPtr rule(const Cmd::MechPair& x, Span s, const ExprPtr& q) {
    const MechAxiom* ax = axioms_ ? axioms_->find(x.name) : nullptr;
    if (!ax) throw VcError("no axioms supplied for mechanism '" + x.name + "'", s);
    if (ax->params.size() != x.args1.size())
      throw VcError("mechanism '" + x.name + "' expects " + std::to_string(ax->params.size()) + " arguments", s);
    used_axioms = true;
    const std::string v = bound("v");
    std::map<std::string, ExprPtr> inst{{kAxiomEps, num(x.eps.to_double())}, {kAxiomOutput, ex::var(v)}};
    for (std::size_t i = 0; i < ax->params.size(); ++i) {
      inst[tagged(ax->params[i], 1)] = x.args1[i];
      inst[tagged(ax->params[i], 2)] = x.args2[i];
    }
    std::vector<ExprPtr> parts, any;
    for (const auto& c : ax->cases) {
      const ExprPtr req = subst(c.requires_, inst);
      any.push_back(req);
      const ExprPtr post = subst(q, {{x.x1, ex::var(v)},
                                     {x.x2, ex::var(v)},
                                     {kAlpha, ex::add(ex::var(kAlpha), subst(c.cost, inst))}});
      const ExprPtr body = ex::implies(subst(c.ensures, inst), post);
      parts.push_back(ex::label(
          "axiom case '" + c.name + "'" + where(s),
          ex::implies(req, ex::quant(Quant::Forall, v, QDomain{QDomain::Kind::DomOf, nullptr, nullptr, x.x1}, body, s)),
          s));
    }
    ExprPtr cover = any.front();
    for (std::size_t i = 1; i < any.size(); ++i) cover = ex::bin(BinOp::Or, cover, any[i]);
    return ex::conj(ex::label("some axiom case applies" + where(s), cover, s), ex::conj(parts));
  }

  ExprPtr rule(const Cmd::ReturnPair& x, Span, const ExprPtr& q) {
    return subst(q, {{tagged(kOut, 1), x.e1}, {tagged(kOut, 2), x.e2}});
  }

  template <class T>
  ExprPtr rule(const T&, Span s, const ExprPtr&) {
    throw VcError("probabilistic construct in a target program; build the product first", s);
  }
};

}  // namespace

WpResult wp(const Unit& u, const CmdPtr& c, const ExprPtr& post, const AxiomSet* axioms) {
  Wp w(u, axioms);
  WpResult r;
  r.pre = w.run(c, post);
  r.side = std::move(w.side);
  r.used_axioms = w.used_axioms;
  return r;
}

HoareTriple privacy_goal(const Unit& u, const CmdPtr& product) {
  if (!u.target) throw VcError("program declares no privacy target");
  HoareTriple t;
  t.cmd = product;
  const ExprPtr zero = ex::lit(Value(0.0));
  std::vector<ExprPtr> pre;
  if (u.pre) pre.push_back(u.pre);
  pre.push_back(ex::eq(ex::var(kAlpha), zero));
  pre.push_back(ex::eq(ex::var(kDelta), zero));
  t.pre = ex::conj(pre);
  t.post = ex::conj(
      {ex::label(kLabelOutputs, ex::eq(ex::var(tagged(kOut, 1)), ex::var(tagged(kOut, 2)))),
       ex::label(kLabelAlpha, ex::bin(BinOp::Le, ex::var(kAlpha), ex::lit(Value(u.target->eps.to_double())))),
       ex::label(kLabelDelta, ex::bin(BinOp::Le, ex::var(kDelta), ex::lit(Value(u.target->delta.to_double()))))});
  return t;
}

VcSet vcgen(const Unit& u, const HoareTriple& t, const AxiomSet* axioms) {
  WpResult w = wp(u, t.cmd, t.post, axioms);
  VcSet out;
  out.used_axioms = w.used_axioms;
  Obligation entry;
  entry.rule = "precondition implies weakest precondition";
  entry.span = u.pre_span.valid() ? u.pre_span : t.cmd->span;
  entry.formula = ex::implies(t.pre, w.pre);
  out.obligations.push_back(std::move(entry));
  for (auto& s : w.side) out.obligations.push_back(std::move(s));
  for (std::size_t i = 0; i < out.obligations.size(); ++i) out.obligations[i].id = "ob" + std::to_string(i + 1);
  return out;
}

}  // namespace dpsp
