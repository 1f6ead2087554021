#include "dpsp/falsify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "dpsp/eval.hpp"
#include "dpsp/pretty.hpp"

namespace dpsp {

namespace {

void collect_eps(const CmdPtr& c, std::vector<double>& eps, std::vector<double>& deltas) {
  walk(c, [&](const Cmd& k) {
    if (auto x = k.as<Cmd::Lap>()) {
      eps.push_back(x->eps.to_double());
      if (x->spec.accuracy) deltas.push_back(x->spec.delta.to_double());
    } else if (auto x = k.as<Cmd::LapPair>()) {
      eps.push_back(x->eps.to_double());
      if (x->spec.accuracy) deltas.push_back(x->spec.delta.to_double());
    } else if (auto x = k.as<Cmd::Exp>()) {
      eps.push_back(x->eps.to_double());
    } else if (auto x = k.as<Cmd::ExpPair>()) {
      eps.push_back(x->eps.to_double());
    } else if (auto x = k.as<Cmd::Mech>()) {
      eps.push_back(x->eps.to_double());
    } else if (auto x = k.as<Cmd::MechPair>()) {
      eps.push_back(x->eps.to_double());
    }
  });
}

std::vector<Value> grid(double step, double top, std::vector<double> extra) {
  std::set<double> pts(extra.begin(), extra.end());
  pts.insert(0.0);
  if (step > 0)
    for (int j = 0; j * step <= top + 1e-12 && j <= 64; ++j) pts.insert(std::round(j * step * 1e9) / 1e9);
  std::vector<Value> out;
  for (double p : pts) out.emplace_back(p);
  return out;
}

}  // namespace

Domains ghost_domains(const Unit& u) {
  std::vector<double> eps, deltas;
  if (u.body) collect_eps(u.body, eps, deltas);
  const double target_eps = u.target ? u.target->eps.to_double() : 0.0;
  const double target_delta = u.target ? u.target->delta.to_double() : 0.0;
  const double step = eps.empty() ? target_eps / 4 : *std::min_element(eps.begin(), eps.end()) / 2;
  const double top = 2 * std::max(target_eps, eps.empty() ? 0.0 : *std::max_element(eps.begin(), eps.end()));
  Domains d;
  d[kAlpha] = grid(step, top, {target_eps});
  std::vector<double> dpts;
  for (double x : deltas) {
    dpts.push_back(x);
    dpts.push_back(2 * x);
  }
  if (target_delta > 0) {
    dpts.push_back(target_delta / 2);
    dpts.push_back(target_delta);
    dpts.push_back(2 * target_delta);
  }
  d[kDelta] = grid(0, 0, dpts);
  for (const auto& v : u.vars)
    if (is_ghost(v.name) && v.domain.kind != DomainSpec::Kind::None) d[v.name] = v.domain.enumerate();
  return d;
}

namespace {

void flatten_conj(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (auto b = e->as<Expr::Binary>(); b && b->op == BinOp::And) {
    flatten_conj(b->a, out);
    flatten_conj(b->b, out);
  } else if (auto l = e->as<Expr::Labeled>()) {
    flatten_conj(l->body, out);
  } else if (!is_true_lit(e)) {
    out.push_back(e);
  }
}

const ExprPtr* defines(const ExprPtr& conj, const std::string& var) {
  auto b = conj->as<Expr::Binary>();
  if (!b || b->op != BinOp::Eq) return nullptr;
  auto is_var = [&](const ExprPtr& e) {
    auto v = e->as<Expr::Var>();
    return v && v->name == var;
  };
  if (is_var(b->a) && !free_vars(b->b).count(var)) return &b->b;
  if (is_var(b->b) && !free_vars(b->a).count(var)) return &b->a;
  return nullptr;
}

class Search {
 public:
  Search(const Unit& u, const ExprPtr& f, const FalsifyConfig& cfg) : u_(u), cfg_(cfg), ghosts_(ghost_domains(u)) {
    ctx_.unit = &u;
    ctx_.reg = cfg.reg;
    ctx_.domains = cfg.domains;
    ExprPtr concl = f;
    for (;;) {
      if (auto l = concl->as<Expr::Labeled>()) {
        if (l->body->as<Expr::Binary>() && l->body->as<Expr::Binary>()->op == BinOp::Implies) {
          concl = l->body;
          continue;
        }
      }
      auto b = concl->as<Expr::Binary>();
      if (!b || b->op != BinOp::Implies) break;
      flatten_conj(b->a, hyps_);
      concl = b->b;
    }
    concl_ = concl;
    // Variables in the order the hypotheses need them, then the rest of the conclusion.
    for (const auto& h : hyps_)
      for (const auto& v : free_vars(h)) add_var(v);
    for (const auto& v : free_vars(concl_)) add_var(v);
    ready_.assign(order_.size() + 1, {});
    for (std::size_t i = 0; i < hyps_.size(); ++i) {
      int last = -1;
      for (const auto& v : free_vars(hyps_[i])) last = std::max(last, index_.at(v));
      ready_[static_cast<std::size_t>(last + 1)].push_back(i);
    }
  }

  FalsifyResult run() {
    FalsifyResult r;
    for (auto i : ready_[0])
      if (!eval_bool(hyps_[i], env_, ctx_)) {
        r.checked = 1;
        return r;  // hypotheses are unsatisfiable
      }
    if (dfs(0)) {
      r.valid = false;
      for (const auto& [k, v] : env_.items()) r.counterexample[k] = v;
      blame(concl_, r);
    }
    r.checked = visited_;
    return r;
  }

 private:
  const Unit& u_;
  const FalsifyConfig& cfg_;
  Domains ghosts_;
  EvalCtx ctx_;
  std::vector<ExprPtr> hyps_;
  ExprPtr concl_;
  std::vector<std::string> order_;
  std::map<std::string, int> index_;
  std::vector<std::vector<std::size_t>> ready_;  // ready_[i+1]: hypotheses decided once var i is bound
  StackEnv env_;
  std::size_t visited_ = 0;

  void add_var(const std::string& v) {
    if (index_.count(v)) return;
    index_[v] = static_cast<int>(order_.size());
    order_.push_back(v);
  }

  const std::vector<Value>& domain(const std::string& v) {
    if (cfg_.domains) {
      if (auto it = cfg_.domains->find(v); it != cfg_.domains->end()) return it->second;
    }
    if (auto it = ghosts_.find(v); it != ghosts_.end()) return it->second;
    try {
      return ctx_.domain_of(v);
    } catch (const EvalError&) {
      throw EvalError("no finite domain for free variable '" + v + "'");
    }
  }

  bool dfs(std::size_t i) {
    if (++visited_ > cfg_.budget) throw BudgetExhausted("falsifier budget of " + std::to_string(cfg_.budget) + " exhausted");
    if (i == order_.size()) return !eval_bool(concl_, env_, ctx_);
    const auto& ready = ready_[i + 1];
    std::optional<Value> forced;
    for (auto h : ready) {
      if (const ExprPtr* e = defines(hyps_[h], order_[i])) {
        forced = eval(*e, env_, ctx_);
        break;
      }
    }
    auto attempt = [&](const Value& v) {
      env_.push(order_[i], v);
      bool ok = true;
      for (auto h : ready)
        if (!eval_bool(hyps_[h], env_, ctx_)) {
          ok = false;
          break;
        }
      if (ok && dfs(i + 1)) return true;
      env_.pop();
      return false;
    };
    if (forced) return attempt(*forced);
    for (const auto& v : domain(order_[i]))
      if (attempt(v)) return true;
    return false;
  }

  // Descends into the failing part of the conclusion to find the most specific label.
  bool blame(const ExprPtr& e, FalsifyResult& r) {
    if (eval_bool(e, env_, ctx_)) return false;
    return std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Expr::Labeled>) {
            if (!blame(x.body, r)) {
              r.blame = x.label;
              r.blame_span = e->span;
            }
            return true;
          } else if constexpr (std::is_same_v<T, Expr::Binary>) {
            if (x.op == BinOp::And) return blame(x.a, r) || blame(x.b, r);
            if (x.op == BinOp::Implies) return blame(x.b, r);
            return false;
          } else if constexpr (std::is_same_v<T, Expr::Quantified>) {
            if (x.q != Quant::Forall) return false;
            for (const auto& v : ctx_.quant_domain(x.dom, env_)) {
              env_.push(x.var, v);
              const bool holds = eval_bool(x.body, env_, ctx_);
              const bool found = !holds && blame(x.body, r);
              env_.pop();
              if (!holds) return found;
            }
            return false;
          } else {
            return false;
          }
        },
        e->node);
  }
};

}  // namespace

FalsifyResult falsify(const Unit& u, const ExprPtr& f, const FalsifyConfig& cfg) { return Search(u, f, cfg).run(); }

void falsify_all(const Unit& u, std::vector<Obligation>& obs, const FalsifyConfig& cfg) {
  for (auto& ob : obs) {
    FalsifyResult r;
    try {
      r = falsify(u, ob.formula, cfg);
    } catch (const EvalError& e) {
      throw EvalError(ob.id + " (" + ob.rule + "): " + e.message(), e.span().valid() ? e.span() : ob.span);
    }
    ob.assignments_checked = r.checked;
    if (r.valid) {
      ob.status = ObStatus::GroundVerified;
    } else {
      ob.status = ObStatus::Falsified;
      ob.counterexample = r.counterexample;
      ob.blame = r.blame.empty() ? ob.rule : r.blame;
      ob.blame_span = r.blame_span.valid() ? r.blame_span : ob.span;
    }
  }
}

}  // namespace dpsp
