#include "dpsp/target.hpp"

#include <cmath>

#include "dpsp/interp.hpp"

namespace dpsp {

Memory initial_target_memory(const Unit& u, const std::map<std::string, Value>& inputs) {
  std::map<std::string, Value> all;
  for (const auto& v : u.vars) {
    if (is_ghost(v.name)) continue;
    all[tagged(v.name, 1)] = default_value(v.type);
    all[tagged(v.name, 2)] = default_value(v.type);
  }
  all[kAlpha] = 0.0;
  all[kDelta] = 0.0;
  all[tagged(kOut, 1)] = std::int64_t{0};
  all[tagged(kOut, 2)] = std::int64_t{0};
  for (const auto& [k, v] : inputs) {
    if (!all.count(k)) throw EvalError("input for unknown target variable '" + k + "'");
    all[k] = v;
  }
  return Memory::from(all);
}

namespace {

struct Bottom {
  Span span;
  std::string reason;
};

using MemSet = std::set<Memory>;

class TargetRun {
 public:
  TargetRun(const Unit& u, const TargetConfig& cfg, const Registry& reg) : cfg_(cfg) {
    ctx_.unit = &u;
    ctx_.reg = &reg;
    ctx_.domains = cfg.domains;
  }

  bool used_axioms = false;

  MemSet exec(const CmdPtr& c, const MemSet& in) {
    if (in.empty()) return in;
    return std::visit([&](const auto& x) -> MemSet { return step(x, c->span, in); }, c->node);
  }

 private:
  const TargetConfig& cfg_;
  EvalCtx ctx_;
  std::size_t produced_ = 0;

  void emit(MemSet& out, Memory m, Span s) {
    if (++produced_ > cfg_.budget)
      throw BudgetExceeded("enumeration budget of " + std::to_string(cfg_.budget) + " memories exceeded", produced_, s);
    out.insert(std::move(m));
  }

  Value ev(const ExprPtr& e, const Memory& m) {
    MemoryEnv env(m);
    return eval(e, env, ctx_);
  }

  bool evb(const ExprPtr& e, const Memory& m) {
    MemoryEnv env(m);
    return eval_bool(e, env, ctx_);
  }

  static Memory bump(const Memory& m, const char* ghost, double by) {
    return m.set(ghost, Value(m.get(ghost).as_real() + by));
  }

  MemSet step(const Cmd::Skip&, Span, const MemSet& in) { return in; }

  MemSet step(const Cmd::Seq& x, Span, const MemSet& in) {
    MemSet cur = in;
    for (const auto& c : x.cmds) cur = exec(c, cur);
    return cur;
  }

  MemSet step(const Cmd::Assign& x, Span s, const MemSet& in) {
    MemSet out;
    for (const auto& m : in) emit(out, m.set(x.var, ev(x.e, m)), s);
    return out;
  }

  MemSet step(const Cmd::Assert& x, Span s, const MemSet& in) {
    for (const auto& m : in)
      if (!evb(x.phi, m)) throw Bottom{s, "assertion failed in memory " + m.str()};
    return in;
  }

  MemSet step(const Cmd::If& x, Span, const MemSet& in) {
    MemSet t, e;
    for (const auto& m : in) (evb(x.guard, m) ? t : e).insert(m);
    MemSet out = exec(x.then_c, t);
    for (auto& m : exec(x.else_c, e)) out.insert(m);
    return out;
  }

  MemSet step(const Cmd::While& x, Span s, const MemSet& in) {
    MemSet cur = in, done;
    while (!cur.empty()) {
      MemSet go;
      for (const auto& m : cur) {
        if (evb(x.guard, m)) go.insert(m);
        else emit(done, m, s);
      }
      cur = exec(x.body, go);
    }
    return done;
  }

  MemSet step(const Cmd::LapPair& x, Span s, const MemSet& in) {
    const double eps = x.eps.to_double();
    const auto& dom = ctx_.domain_of(x.x1);
    MemSet out;
    for (const auto& m : in) {
      const Value e1 = ev(x.e1, m), e2 = ev(x.e2, m);
      const double gap = std::fabs(e1.as_real() - e2.as_real());
      Memory base = bump(m, kAlpha, gap * eps);
      double radius = 0;
      if (x.spec.accuracy) {
        base = bump(base, kDelta, x.spec.delta.to_double());
        radius = accuracy_radius(eps, x.spec.delta.to_double());
      }
      const bool close = x.spec.accuracy && loosely_equal(e1, e2);
      for (const auto& v : dom) {
        if (close && std::fabs(v.as_real() - e1.as_real()) > radius) continue;
        emit(out, base.set(x.x1, v).set(x.x2, v), s);
      }
    }
    return out;
  }

  MemSet step(const Cmd::ExpPair& x, Span s, const MemSet& in) {
    const double eps = x.eps.to_double();
    const auto& range = ctx_.exp_range();
    MemSet out;
    for (const auto& m : in) {
      const Value s1 = ev(x.s1, m), s2 = ev(x.s2, m);
      if (!loosely_equal(s1, s2)) throw Bottom{s, "score functions differ in memory " + m.str()};
      double gap;
      try {
        gap = max_gap(s1, ev(x.e1, m), ev(x.e2, m), range);
      } catch (const EvalError& e) {
        throw EvalError(e.message(), s);
      }
      const Memory base = bump(m, kAlpha, eps * gap);
      for (const auto& v : range) emit(out, base.set(x.x1, v).set(x.x2, v), s);
    }
    return out;
  }

  MemSet step(const Cmd::MechPair& x, Span s, const MemSet& in) {
    const MechAxiom* ax = cfg_.axioms ? cfg_.axioms->find(x.name) : nullptr;
    if (!ax) throw EvalError("no axioms supplied for mechanism '" + x.name + "'", s);
    if (ax->params.size() != x.args1.size())
      throw EvalError("mechanism '" + x.name + "' expects " + std::to_string(ax->params.size()) + " arguments", s);
    used_axioms = true;
    const auto& dom = ctx_.domain_of(x.x1);
    MemSet out;
    for (const auto& m : in) {
      std::map<std::string, Value> binds;
      binds[kAxiomEps] = x.eps.to_double();
      for (std::size_t i = 0; i < ax->params.size(); ++i) {
        binds[tagged(ax->params[i], 1)] = ev(x.args1[i], m);
        binds[tagged(ax->params[i], 2)] = ev(x.args2[i], m);
      }
      MapEnv env(binds);
      bool any = false;
      for (const auto& c : ax->cases) {
        if (!eval_bool(c.requires_, env, ctx_)) continue;
        any = true;
        for (const auto& v : dom) {
          BindEnv with_v(env, kAxiomOutput, v);
          if (!eval_bool(c.ensures, with_v, ctx_)) continue;
          const double cost = eval(c.cost, with_v, ctx_).as_real();
          emit(out, bump(m, kAlpha, cost).set(x.x1, v).set(x.x2, v), s);
        }
      }
      if (!any) throw Bottom{s, "no axiom case of '" + x.name + "' applies in memory " + m.str()};
    }
    return out;
  }

  MemSet step(const Cmd::ReturnPair& x, Span s, const MemSet& in) {
    MemSet out;
    for (const auto& m : in) emit(out, m.set(tagged(kOut, 1), ev(x.e1, m)).set(tagged(kOut, 2), ev(x.e2, m)), s);
    return out;
  }

  template <class T>
  MemSet step(const T&, Span s, const MemSet&) {
    throw EvalError("probabilistic construct in a target program", s);
  }
};

}  // namespace

TargetResult run_target(const Unit& u, const CmdPtr& c, const Memory& m, const TargetConfig& cfg,
                        const Registry& reg) {
  TargetRun run(u, cfg, reg);
  TargetResult r;
  try {
    r.memories = run.exec(c, {m});
  } catch (const Bottom& b) {
    r.bottom = true;
    r.bottom_span = b.span;
    r.reason = b.reason;
  }
  r.used_axioms = run.used_axioms;
  return r;
}

}  // namespace dpsp
