#include "dpsp/aprhl.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dpsp/eval.hpp"
#include "dpsp/parser.hpp"
#include "dpsp/pretty.hpp"
#include "dpsp/product.hpp"

namespace dpsp {

namespace {

using NameFn = std::function<std::string(const std::string&)>;
using ExprFn = std::function<ExprPtr(const ExprPtr&)>;

CmdPtr map_cmd(const CmdPtr& c, const NameFn& name, const ExprFn& ex_) {
  const Span s = c->span;
  return std::visit(
      [&](const auto& x) -> CmdPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Cmd::Skip>) {
          return c;
        } else if constexpr (std::is_same_v<T, Cmd::Seq>) {
          std::vector<CmdPtr> parts;
          for (const auto& k : x.cmds) parts.push_back(map_cmd(k, name, ex_));
          return make_seq(parts, s);
        } else if constexpr (std::is_same_v<T, Cmd::Assign>) {
          return make_cmd(Cmd::Assign{name(x.var), ex_(x.e)}, s);
        } else if constexpr (std::is_same_v<T, Cmd::Lap>) {
          return make_cmd(Cmd::Lap{name(x.var), x.eps, ex_(x.e), x.spec}, s);
        } else if constexpr (std::is_same_v<T, Cmd::Exp>) {
          return make_cmd(Cmd::Exp{name(x.var), x.eps, ex_(x.score), ex_(x.input)}, s);
        } else if constexpr (std::is_same_v<T, Cmd::Mech>) {
          std::vector<ExprPtr> args;
          for (const auto& a : x.args) args.push_back(ex_(a));
          return make_cmd(Cmd::Mech{name(x.var), x.name, x.eps, args}, s);
        } else if constexpr (std::is_same_v<T, Cmd::If>) {
          return make_cmd(Cmd::If{ex_(x.guard), map_cmd(x.then_c, name, ex_), map_cmd(x.else_c, name, ex_)}, s);
        } else if constexpr (std::is_same_v<T, Cmd::While>) {
          return make_cmd(Cmd::While{ex_(x.guard), map_cmd(x.body, name, ex_), x.annot}, s);
        } else if constexpr (std::is_same_v<T, Cmd::Assert>) {
          return make_cmd(Cmd::Assert{ex_(x.phi)}, s);
        } else {
          throw DerivationError("rule-violation", "judgments relate source commands only", s);
        }
      },
      c->node);
}

ExprPtr untag_expr(const ExprPtr& e) {
  std::map<std::string, ExprPtr> m;
  for (const auto& v : free_vars(e)) {
    auto [base, tag] = split_tag(v);
    if (tag != 0) m[v] = ex::var(base);
  }
  return subst(e, m);
}

CmdPtr untag(const CmdPtr& c) {
  return map_cmd(c, [](const std::string& n) { return split_tag(n).first; }, untag_expr);
}

std::string str(const CmdPtr& c) { return pretty(c); }
std::string str(const ExprPtr& e) { return pretty(e); }

ExprPtr parse_field(const nlohmann::json& j, const char* key, const char* fallback = nullptr) {
  if (!j.contains(key)) {
    if (fallback) return parse_expr(fallback);
    throw DerivationError("malformed", std::string("judgment lacks '") + key + "'");
  }
  const auto& v = j.at(key);
  return parse_expr(v.is_string() ? v.get<std::string>() : v.dump());
}

// Numeric literals compared as reals, so "1" and "1.0" agree in costs.
ExprPtr as_reals(const ExprPtr& e) {
  std::map<std::string, ExprPtr> none;
  if (auto l = e->as<Expr::Lit>(); l && l->value.is_int()) return ex::lit(Value(l->value.as_real()));
  if (auto u = e->as<Expr::Unary>()) return ex::un(u->op, as_reals(u->a));
  if (auto b = e->as<Expr::Binary>()) return ex::bin(b->op, as_reals(b->a), as_reals(b->b));
  return e;
}

std::optional<double> closed(const ExprPtr& e, const Unit& u) {
  if (!free_vars(e).empty()) return std::nullopt;
  EvalCtx ctx;
  ctx.unit = &u;
  std::map<std::string, Value> none;
  return eval(e, MapEnv(none), ctx).as_real();
}

bool near(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a) + std::fabs(b)); }

bool costs_equal(const ExprPtr& a, const ExprPtr& b, const Unit& u) {
  if (same(as_reals(a), as_reals(b))) return true;
  auto x = closed(a, u), y = closed(b, u);
  return x && y && near(*x, *y);
}

const Expr::Binary* binary(const ExprPtr& e, BinOp op) {
  auto b = e->as<Expr::Binary>();
  return b && b->op == op ? b : nullptr;
}

bool is_core(const std::string& r) {
  static const std::set<std::string> core = {"assn", "lap", "exp", "skip", "cond", "while", "seq", "weak"};
  return core.count(r) > 0;
}

std::size_t arity(const std::string& r, std::size_t given) {
  if (r == "cond") return 2;
  if (r == "while" || r == "weak") return 1;
  if (r == "seq") return given >= 2 ? given : 2;
  return 0;
}

class Checker {
 public:
  Checker(const Unit& u, const FalsifyConfig& cfg) : u_(u), cfg_(cfg) {}

  DerivationCheck result;

  void run(const Derivation& d, const std::string& path) {
    if (!is_core(d.rule)) {
      issue("unsupported-rule", path, "rule '" + d.rule + "' is outside core apRHL and has no self-product embedding");
      return;
    }
    if (d.children.size() != arity(d.rule, d.children.size())) {
      issue("arity-mismatch", path,
            "rule '" + d.rule + "' takes " + std::to_string(arity(d.rule, d.children.size())) + " premises, got " +
                std::to_string(d.children.size()));
      return;
    }
    for (std::size_t i = 0; i < d.children.size(); ++i) run(d.children[i], path + "." + std::to_string(i));
    const Judgment& j = d.judgment;
    try {
      if (d.rule == "assn") assn(j, path);
      else if (d.rule == "lap") lap(j, path);
      else if (d.rule == "exp") exp(j, path);
      else if (d.rule == "skip") skip(j, path);
      else if (d.rule == "cond") cond(d, path);
      else if (d.rule == "while") loop(d, path);
      else if (d.rule == "seq") seq(d, path);
      else weak(d, path);
    } catch (const Error& e) {
      issue("rule-violation", path, e.message());
    }
  }

  Domains logical;

 private:
  const Unit& u_;
  const FalsifyConfig& cfg_;

  void issue(std::string kind, const std::string& path, std::string msg) {
    result.ok = false;
    result.issues.push_back({std::move(kind), path, std::move(msg)});
  }

  void expect(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) issue("rule-violation", path, msg);
  }

  void cost(const ExprPtr& have, const ExprPtr& want, const char* which, const std::string& path) {
    if (!costs_equal(have, want, u_))
      issue("cost-mismatch", path, std::string(which) + " is " + str(have) + " but the rule yields " + str(want));
  }

  void zero_costs(const Judgment& j, const std::string& path) {
    cost(j.eps, ex::lit(Value(0.0)), "epsilon", path);
    cost(j.delta, ex::lit(Value(0.0)), "delta", path);
  }

  void side(const std::string& path, const std::string& what, const ExprPtr& f) {
    Obligation ob;
    ob.id = "d" + std::to_string(result.obligations.size() + 1);
    ob.rule = what + " at " + path;
    ob.formula = f;
    FalsifyConfig cfg = cfg_;
    Domains merged = cfg_.domains ? *cfg_.domains : Domains{};
    for (const auto& [k, v] : logical) merged.emplace(k, v);
    cfg.domains = &merged;
    std::vector<Obligation> one{ob};
    falsify_all(u_, one, cfg);
    if (one[0].status == ObStatus::Falsified) {
      std::string cex;
      for (const auto& [k, v] : one[0].counterexample) cex += (cex.empty() ? "" : ", ") + k + "=" + v.str();
      issue("side-condition", path, what + " fails at {" + cex + "}");
    }
    result.obligations.push_back(one[0]);
  }

  void assn(const Judgment& j, const std::string& path) {
    auto a1 = j.c1->as<Cmd::Assign>();
    auto a2 = j.c2->as<Cmd::Assign>();
    if (!a1 || !a2) return issue("rule-violation", path, "assn relates two assignments");
    const ExprPtr want = subst(j.post, {{a1->var, a1->e}, {a2->var, a2->e}});
    expect(same(j.pre, want), path, "assn precondition must be " + str(want));
    zero_costs(j, path);
  }

  // Framed sampling: Phi ~ Phi && y1 == y2 when Phi does not mention y1, y2; Phi = true is the plain rule.
  void sampled_post(const Judgment& j, const ExprPtr& frame, const std::string& y1, const std::string& y2,
                    const std::string& path) {
    const ExprPtr eq = ex::eq(ex::var(y1), ex::var(y2));
    if (!frame) {
      expect(same(j.post, eq), path, "postcondition must be " + y1 + " == " + y2);
      return;
    }
    const auto fv = free_vars(frame);
    expect(!fv.count(y1) && !fv.count(y2), path, "the frame may not mention the sampled variables");
    expect(same(j.post, ex::bin(BinOp::And, frame, eq)), path,
           "postcondition must be " + str(frame) + " && " + y1 + " == " + y2);
  }

  void lap(const Judgment& j, const std::string& path) {
    auto l1 = j.c1->as<Cmd::Lap>();
    auto l2 = j.c2->as<Cmd::Lap>();
    if (!l1 || !l2) return issue("rule-violation", path, "lap relates two Laplace samplings");
    expect(l1->eps == l2->eps, path, "lap needs the same epsilon on both sides");
    expect(!l1->spec.accuracy && !l2->spec.accuracy, path, "accuracy specs have no core apRHL rule");
    sampled_post(j, is_true_lit(j.pre) ? nullptr : j.pre, l1->var, l2->var, path);
    cost(j.eps,
         ex::bin(BinOp::Mul, ex::un(UnOp::Abs, ex::bin(BinOp::Sub, l1->e, l2->e)), ex::lit(Value(l1->eps.to_double()))),
         "epsilon", path);
    cost(j.delta, ex::lit(Value(0.0)), "delta", path);
  }

  void exp(const Judgment& j, const std::string& path) {
    auto x1 = j.c1->as<Cmd::Exp>();
    auto x2 = j.c2->as<Cmd::Exp>();
    if (!x1 || !x2) return issue("rule-violation", path, "exp relates two exponential-mechanism samplings");
    expect(x1->eps == x2->eps, path, "exp needs the same epsilon on both sides");
    const ExprPtr agree = ex::eq(x1->score, x2->score);
    ExprPtr frame;
    if (!same(j.pre, agree)) {
      auto p = binary(j.pre, BinOp::And);
      if (!p || !same(p->b, agree)) return issue("rule-violation", path, "exp precondition must end with " + str(agree));
      frame = p->a;
    }
    sampled_post(j, frame, x1->var, x2->var, path);
    cost(j.eps, ex::bin(BinOp::Mul, ex::lit(Value(x1->eps.to_double())), ex::maxgap(x1->score, x1->input, x2->input)),
         "epsilon", path);
    cost(j.delta, ex::lit(Value(0.0)), "delta", path);
  }

  void skip(const Judgment& j, const std::string& path) {
    expect(j.c1->as<Cmd::Skip>() && j.c2->as<Cmd::Skip>(), path, "skip relates skip with skip");
    expect(same(j.pre, j.post), path, "skip needs equal pre- and postcondition");
    zero_costs(j, path);
  }

  void cond(const Derivation& d, const std::string& path) {
    const Judgment& j = d.judgment;
    auto i1 = j.c1->as<Cmd::If>();
    auto i2 = j.c2->as<Cmd::If>();
    if (!i1 || !i2) return issue("rule-violation", path, "cond relates two conditionals");
    const Judgment& t = d.children[0].judgment;
    const Judgment& f = d.children[1].judgment;
    expect(same(t.c1, i1->then_c) && same(t.c2, i2->then_c), path, "first premise must relate the then branches");
    expect(same(f.c1, i1->else_c) && same(f.c2, i2->else_c), path, "second premise must relate the else branches");
    auto tp = binary(t.pre, BinOp::And);
    auto fp = binary(f.pre, BinOp::And);
    auto cp = binary(j.pre, BinOp::And);
    if (!tp || !fp || !cp) return issue("rule-violation", path, "cond preconditions must be conjunctions");
    const ExprPtr psi = tp->a;
    expect(same(tp->b, i1->guard), path, "first premise precondition must end with the guard " + str(i1->guard));
    expect(same(fp->a, psi) && same(fp->b, ex::un(UnOp::Not, i1->guard)), path,
           "second premise precondition must be " + str(psi) + " && !" + str(i1->guard));
    auto sync = cp->b->as<Expr::Binary>();
    const bool synced = sync && (sync->op == BinOp::Iff || sync->op == BinOp::Eq) && same(sync->a, i1->guard) &&
                        same(sync->b, i2->guard);
    expect(same(cp->a, psi) && synced, path, "cond precondition must be Psi && (b1 <=> b2)");
    expect(same(t.post, j.post) && same(f.post, j.post), path, "cond premises must share the postcondition");
    cost(t.eps, j.eps, "epsilon of the then premise", path);
    cost(f.eps, j.eps, "epsilon of the else premise", path);
    cost(t.delta, j.delta, "delta of the then premise", path);
    cost(f.delta, j.delta, "delta of the else premise", path);
  }

  void loop(const Derivation& d, const std::string& path) {
    const Judgment& j = d.judgment;
    auto w1 = j.c1->as<Cmd::While>();
    auto w2 = j.c2->as<Cmd::While>();
    if (!w1 || !w2) return issue("rule-violation", path, "while relates two loops");
    if (!d.params.contains("n") || !d.params.contains("variant"))
      return issue("rule-violation", path, "while needs params n and variant");
    const auto n = d.params.at("n").get<std::int64_t>();
    const ExprPtr e = parse_expr(d.params.at("variant").get<std::string>());
    const std::string k = d.params.value("k", "k");
    Domains::mapped_type kdom;
    for (std::int64_t i = -1; i <= n + 1; ++i) kdom.emplace_back(i);
    logical[k] = kdom;

    const Judgment& b = d.children[0].judgment;
    expect(same(b.c1, w1->body) && same(b.c2, w2->body), path, "premise must relate the loop bodies");
    // Conclusion: Theta && 0 <= e ... Theta && !b1.
    auto cp = binary(j.pre, BinOp::And);
    auto cq = binary(j.post, BinOp::And);
    if (!cp || !cq) return issue("rule-violation", path, "while pre- and postcondition must be conjunctions");
    const ExprPtr theta = cp->a;
    expect(same(cp->b, ex::bin(BinOp::Le, ex::lit(Value(0)), e)), path, "while precondition must be Theta && 0 <= e");
    expect(same(cq->a, theta) && same(cq->b, ex::un(UnOp::Not, w1->guard)), path,
           "while postcondition must be Theta && !" + str(w1->guard));
    const ExprPtr want_pre =
        ex::bin(BinOp::And, ex::bin(BinOp::And, theta, w1->guard), ex::bin(BinOp::Eq, ex::var(k), e));
    expect(same(b.pre, want_pre), path, "premise precondition must be " + str(want_pre));
    const ExprPtr want_post = ex::bin(BinOp::And, theta, ex::bin(BinOp::Lt, ex::var(k), e));
    expect(same(b.post, want_post), path, "premise postcondition must be " + str(want_post));
    const ExprPtr nn = ex::lit(Value(static_cast<double>(n)));
    cost(j.eps, ex::bin(BinOp::Mul, nn, b.eps), "epsilon", path);
    cost(j.delta, ex::bin(BinOp::Mul, nn, b.delta), "delta", path);
    side(path, "loop bound: Theta && n <= e implies !b1",
         ex::implies(ex::conj(theta, ex::bin(BinOp::Le, ex::lit(Value(n)), e)), ex::un(UnOp::Not, w1->guard)));
    side(path, "loop synchronization: Theta implies b1 <=> b2",
         ex::implies(theta, ex::bin(BinOp::Iff, w1->guard, w2->guard)));
  }

  void seq(const Derivation& d, const std::string& path) {
    const Judgment& j = d.judgment;
    std::vector<CmdPtr> l, r;
    ExprPtr eps = d.children.front().judgment.eps, delta = d.children.front().judgment.delta;
    for (std::size_t i = 0; i < d.children.size(); ++i) {
      const Judgment& c = d.children[i].judgment;
      l.push_back(c.c1);
      r.push_back(c.c2);
      if (i > 0) {
        const Judgment& prev = d.children[i - 1].judgment;
        expect(same(prev.post, c.pre), path,
               "premise " + std::to_string(i) + " must start from the postcondition of premise " + std::to_string(i - 1));
        eps = ex::bin(BinOp::Add, eps, c.eps);
        delta = ex::bin(BinOp::Add, delta, c.delta);
      }
    }
    expect(same(j.c1, make_seq(l)) && same(j.c2, make_seq(r)), path, "seq conclusion must compose the premises");
    expect(same(j.pre, d.children.front().judgment.pre), path, "seq precondition must be the first premise's");
    expect(same(j.post, d.children.back().judgment.post), path, "seq postcondition must be the last premise's");
    cost(j.eps, eps, "epsilon", path);
    cost(j.delta, delta, "delta", path);
  }

  void budget(const ExprPtr& small, const ExprPtr& big, const ExprPtr& pre, const char* which,
              const std::string& path) {
    auto a = closed(small, u_), b = closed(big, u_);
    if (a && b) {
      if (*a > *b + 1e-12)
        issue("rule-violation", path,
              std::string("weak may only increase ") + which + ": " + str(small) + " > " + str(big));
      return;
    }
    side(path, std::string("weakened ") + which + " bounds the premise's", ex::implies(pre, ex::bin(BinOp::Le, small, big)));
  }

  void weak(const Derivation& d, const std::string& path) {
    const Judgment& j = d.judgment;
    const Judgment& c = d.children[0].judgment;
    expect(same(j.c1, c.c1) && same(j.c2, c.c2), path, "weak keeps the commands of its premise");
    if (!same(j.pre, c.pre)) side(path, "precondition strengthening", ex::implies(j.pre, c.pre));
    if (!same(j.post, c.post)) side(path, "postcondition weakening", ex::implies(c.post, j.post));
    budget(c.eps, j.eps, j.pre, "epsilon", path);
    budget(c.delta, j.delta, j.pre, "delta", path);
  }
};

struct Compiler {
  const Unit& u;
  int loops_open = 0;

  CmdPtr run(const Derivation& d, double a0, double d0) {
    const Judgment& j = d.judgment;
    if (d.rule == "weak") return run(d.children[0], a0, d0);
    if (d.rule == "seq") {
      std::vector<CmdPtr> parts;
      for (const auto& c : d.children) {
        parts.push_back(run(c, a0, d0));
        a0 += cost_of(c.judgment.eps);
        d0 += cost_of(c.judgment.delta);
      }
      return make_seq(parts);
    }
    if (d.rule == "cond") {
      auto i = j.c1->as<Cmd::If>();
      return make_cmd(Cmd::If{untag_expr(i->guard), run(d.children[0], a0, d0), run(d.children[1], a0, d0)},
                      j.c1->span);
    }
    if (d.rule == "while") {
      if (loops_open > 0)
        throw DerivationError("unsupported-rule", "nested while instances cannot be compiled to a closed budget bound");
      ++loops_open;
      auto w = j.c1->as<Cmd::While>();
      const auto n = d.params.at("n").get<std::int64_t>();
      const ExprPtr e = parse_expr(d.params.at("variant").get<std::string>());
      const ExprPtr theta = j.pre->as<Expr::Binary>()->a;
      const Judgment& b = d.children[0].judgment;
      const ExprPtr iters = ex::bin(BinOp::Min, e, ex::lit(Value(n)));
      auto bound = [&](const char* ghost, double base, const ExprPtr& per) {
        return ex::bin(BinOp::Le, ex::var(ghost),
                       ex::bin(BinOp::Add, ex::lit(Value(base)), ex::bin(BinOp::Mul, iters, ex::lit(Value(cost_of(per))))));
      };
      LoopAnnot a;
      a.invariant = ex::conj({theta, ex::bin(BinOp::Le, ex::lit(Value(0)), e), bound(kAlpha, a0, b.eps),
                              bound(kDelta, d0, b.delta)});
      a.variant = ex::bin(BinOp::Sub, ex::lit(Value(n)), e);
      a.span = j.c1->span;
      CmdPtr body = run(d.children[0], 0, 0);
      --loops_open;
      return make_cmd(Cmd::While{untag_expr(w->guard), body, a}, j.c1->span);
    }
    return untag(j.c1);
  }

  double cost_of(const ExprPtr& e) const {
    auto v = closed(e, u);
    if (!v) throw DerivationError("cost-mismatch", "cost " + pretty(e) + " must be a constant; weaken it first");
    return *v;
  }
};

void collect_rules(const Derivation& d, std::vector<std::string>& bad) {
  if (!is_core(d.rule)) bad.push_back(d.rule);
  for (const auto& c : d.children) collect_rules(c, bad);
}

}  // namespace

CmdPtr rename_cmd(const CmdPtr& c, int tag) {
  return map_cmd(
      c,
      [tag](const std::string& n) { return is_ghost(n) ? n : tagged(n, tag); },
      [tag](const ExprPtr& e) { return rename(e, tag); });
}

Derivation derivation_from_json(const nlohmann::json& j) {
  Derivation d;
  if (!j.is_object() || !j.contains("rule")) throw DerivationError("malformed", "derivation node needs a rule");
  d.rule = j.at("rule").get<std::string>();
  if (j.contains("params")) d.params = j.at("params");
  const auto& jj = j.at("judgment");
  d.judgment.pre = parse_field(jj, "pre", "true");
  d.judgment.post = parse_field(jj, "post", "true");
  d.judgment.eps = parse_field(jj, "eps", "0");
  d.judgment.delta = parse_field(jj, "delta", "0");
  if (jj.contains("cmd")) {
    const CmdPtr c = parse_cmd(jj.at("cmd").get<std::string>(), true);
    d.judgment.c1 = rename_cmd(c, 1);
    d.judgment.c2 = rename_cmd(c, 2);
  } else if (jj.contains("c1") && jj.contains("c2")) {
    d.judgment.c1 = parse_cmd(jj.at("c1").get<std::string>(), true);
    d.judgment.c2 = parse_cmd(jj.at("c2").get<std::string>(), true);
  } else {
    throw DerivationError("malformed", "judgment needs 'cmd' or both 'c1' and 'c2'");
  }
  if (j.contains("children"))
    for (const auto& c : j.at("children")) d.children.push_back(derivation_from_json(c));
  return d;
}

nlohmann::json to_json(const Derivation& d) {
  nlohmann::json j;
  j["rule"] = d.rule;
  j["params"] = d.params;
  j["judgment"] = {{"pre", pretty(d.judgment.pre)},   {"c1", pretty(d.judgment.c1)},
                   {"c2", pretty(d.judgment.c2)},     {"post", pretty(d.judgment.post)},
                   {"eps", pretty(d.judgment.eps)},   {"delta", pretty(d.judgment.delta)}};
  j["children"] = nlohmann::json::array();
  for (const auto& c : d.children) j["children"].push_back(to_json(c));
  return j;
}

DerivationFile load_derivation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DerivationError("malformed", path + ": " + e.what());
  }
  if (!j.contains("program") || !j.contains("derivation"))
    throw DerivationError("malformed", path + ": expected {\"program\": ..., \"derivation\": ...}");
  std::string prog = j.at("program").get<std::string>();
  if (!prog.empty() && prog[0] != '/') {
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) prog = path.substr(0, slash + 1) + prog;
  }
  std::ifstream pin(prog);
  if (!pin) throw Error("cannot open " + prog);
  std::stringstream ss;
  ss << pin.rdbuf();
  return {parse_unit(ss.str()), derivation_from_json(j.at("derivation"))};
}

nlohmann::json to_json(const DerivationCheck& c) {
  nlohmann::json j;
  j["ok"] = c.ok;
  j["issues"] = nlohmann::json::array();
  for (const auto& i : c.issues) j["issues"].push_back({{"kind", i.kind}, {"path", i.path}, {"message", i.message}});
  j["obligations"] = nlohmann::json::array();
  for (const auto& o : c.obligations) j["obligations"].push_back(to_json(o));
  return j;
}

DerivationCheck check_derivation(const Unit& u, const Derivation& d, const FalsifyConfig& cfg) {
  Checker c(u, cfg);
  c.run(d, "root");
  return std::move(c.result);
}

CompiledTriple compile_to_hoare(const Unit& u, const Derivation& d, const FalsifyConfig& cfg) {
  std::vector<std::string> bad;
  collect_rules(d, bad);
  if (!bad.empty())
    throw DerivationError("unsupported-rule", "rule '" + bad.front() + "' is outside core apRHL; self-products cannot capture it");
  DerivationCheck chk = check_derivation(u, d, cfg);
  if (!chk.ok) {
    const auto& i = chk.issues.front();
    throw DerivationError(i.kind, i.path + ": " + i.message);
  }
  const Judgment& j = d.judgment;
  const CmdPtr c = untag(j.c1);
  if (!same(rename_cmd(c, 2), j.c2))
    throw DerivationError("rule-violation", "the two programs are not renamings of one command");

  Compiler comp{u};
  CompiledTriple out;
  out.source = comp.run(d, 0, 0);
  const double eps = comp.cost_of(j.eps), delta = comp.cost_of(j.delta);
  out.unit = u;
  out.unit.body = self_product(out.source);
  out.unit.pre = j.pre;
  // The target feeds the ghost grids of the falsifier.
  auto rational = [](double x) { return Rational::of(std::llround(x * 1e9), 1'000'000'000); };
  out.unit.target = PrivacyTarget{rational(eps), rational(delta)};

  const ExprPtr zero = ex::lit(Value(0.0));
  out.triple.cmd = out.unit.body;
  out.triple.pre = ex::conj({j.pre, ex::eq(ex::var(kAlpha), zero), ex::eq(ex::var(kDelta), zero)});
  out.triple.post = ex::conj({ex::label("postcondition", j.post),
                              ex::label(kLabelAlpha, ex::bin(BinOp::Le, ex::var(kAlpha), ex::lit(Value(eps)))),
                              ex::label(kLabelDelta, ex::bin(BinOp::Le, ex::var(kDelta), ex::lit(Value(delta))))});
  out.vcs = vcgen(out.unit, out.triple);
  return out;
}

}  // namespace dpsp
