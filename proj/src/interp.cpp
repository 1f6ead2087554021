#include "dpsp/interp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dpsp {

std::int64_t min_window(double eps, double tau) {
  if (!(eps > 0) || !(tau > 0)) throw Error("window needs positive eps and tolerance");
  return static_cast<std::int64_t>(std::floor(2.0 * std::log(2.0 / tau) / eps)) + 1;
}

double lap_tail_bound(double eps, double t) { return 2.0 * std::exp(-t * eps / 2.0); }

namespace {

std::vector<double> lap_kernel(double eps, std::int64_t window) {
  if (!(eps > 0)) throw Error("Laplace needs a positive eps");
  if (window < 0) throw Error("negative Laplace window");
  std::vector<double> w(static_cast<std::size_t>(2 * window + 1));
  double z = 0;
  for (std::int64_t k = -window; k <= window; ++k) {
    const double x = std::exp(-eps * static_cast<double>(std::llabs(k)) / 2.0);
    w[static_cast<std::size_t>(k + window)] = x;
    z += x;
  }
  for (auto& x : w) x /= z;
  return w;
}

void check_window(double eps, std::int64_t window, double tau) {
  if (lap_tail_bound(eps, static_cast<double>(window)) >= tau) {
    std::ostringstream os;
    os << "Laplace window " << window << " too small for tolerance " << tau << " at eps " << eps
       << "; minimal admissible window is " << min_window(eps, tau);
    throw Error(os.str());
  }
}

}  // namespace

ValueDist lap_dist(double eps, std::int64_t center, std::int64_t window) {
  const auto w = lap_kernel(eps, window);
  ValueDist d;
  for (std::int64_t k = -window; k <= window; ++k) d.add(Value(center + k), w[static_cast<std::size_t>(k + window)]);
  return d;
}

ValueDist lap_dist(double eps, std::int64_t center, std::int64_t window, double tau) {
  check_window(eps, window, tau);
  return lap_dist(eps, center, window);
}

ValueDist exp_dist(double eps, const Value& score, const Value& input, const std::vector<Value>& range) {
  if (range.empty()) throw EvalError("exponential mechanism over an empty range");
  std::vector<double> s;
  for (const auto& r : range) s.push_back(score_at(score, input, r).as_real());
  // Shift by the max score so the exponentials cannot overflow.
  double top = s.front();
  for (double x : s) top = std::max(top, x);
  std::map<Value, double> w;
  for (std::size_t i = 0; i < range.size(); ++i) w[range[i]] += std::exp(eps * (s[i] - top) / 2.0);
  return ValueDist::normalize(w);
}

Value default_value(const Type& t) {
  switch (t.kind) {
    case Kind::Int: return std::int64_t{0};
    case Kind::Real: return 0.0;
    case Kind::Bool: return false;
    case Kind::List: return Value::empty_list();
    case Kind::Map: return MapEntries{};
  }
  return {};
}

Memory initial_memory(const Unit& u, const std::map<std::string, Value>& inputs) {
  std::map<std::string, Value> all;
  for (const auto& v : u.vars)
    if (!is_ghost(v.name)) all[v.name] = default_value(v.type);
  for (const auto& [k, v] : inputs) {
    if (!all.count(k)) throw EvalError("input for undeclared variable '" + k + "'");
    all[k] = v;
  }
  return Memory::from(all);
}

Liveness::Liveness(const CmdPtr& c, std::set<std::string> live_out) { entry_ = visit(c, live_out); }

const std::set<std::string>* Liveness::after(const Cmd* c) const {
  auto it = after_.find(c);
  return it == after_.end() ? nullptr : &it->second;
}

std::set<std::string> Liveness::visit(const CmdPtr& c, const std::set<std::string>& out) {
  after_[c.get()] = out;
  auto with = [](std::set<std::string> s, const ExprPtr& e) {
    for (auto& v : free_vars(e)) s.insert(v);
    return s;
  };
  return std::visit(
      [&](const auto& x) -> std::set<std::string> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Cmd::Seq>) {
          auto cur = out;
          for (auto it = x.cmds.rbegin(); it != x.cmds.rend(); ++it) cur = visit(*it, cur);
          return cur;
        } else if constexpr (std::is_same_v<T, Cmd::Assign> || std::is_same_v<T, Cmd::Lap>) {
          auto s = out;
          s.erase(x.var);
          return with(s, x.e);
        } else if constexpr (std::is_same_v<T, Cmd::Exp>) {
          auto s = out;
          s.erase(x.var);
          return with(with(s, x.score), x.input);
        } else if constexpr (std::is_same_v<T, Cmd::Mech>) {
          auto s = out;
          s.erase(x.var);
          for (const auto& a : x.args) s = with(s, a);
          return s;
        } else if constexpr (std::is_same_v<T, Cmd::If>) {
          auto s = visit(x.then_c, out);
          for (auto& v : visit(x.else_c, out)) s.insert(v);
          return with(s, x.guard);
        } else if constexpr (std::is_same_v<T, Cmd::While>) {
          auto cur = with(out, x.guard);
          for (;;) {
            auto next = with(out, x.guard);
            for (auto& v : visit(x.body, cur)) next.insert(v);
            if (next == cur) return cur;
            cur = std::move(next);
          }
        } else if constexpr (std::is_same_v<T, Cmd::Return>) {
          return with(out, x.e);
        } else if constexpr (std::is_same_v<T, Cmd::Assert>) {
          return with(out, x.phi);
        } else if constexpr (std::is_same_v<T, Cmd::LapPair>) {
          auto s = out;
          s.erase(x.x1);
          s.erase(x.x2);
          return with(with(s, x.e1), x.e2);
        } else if constexpr (std::is_same_v<T, Cmd::ExpPair>) {
          auto s = out;
          s.erase(x.x1);
          s.erase(x.x2);
          return with(with(with(with(s, x.s1), x.e1), x.s2), x.e2);
        } else if constexpr (std::is_same_v<T, Cmd::MechPair>) {
          auto s = out;
          s.erase(x.x1);
          s.erase(x.x2);
          for (const auto& a : x.args1) s = with(s, a);
          for (const auto& a : x.args2) s = with(s, a);
          return s;
        } else if constexpr (std::is_same_v<T, Cmd::ReturnPair>) {
          return with(with(out, x.e1), x.e2);
        } else {
          return out;
        }
      },
      c->node);
}

std::pair<CmdPtr, CmdPtr> split_return(const CmdPtr& body) {
  if (body->as<Cmd::Return>() || body->as<Cmd::ReturnPair>()) return {make_cmd(Cmd::Skip{}), body};
  if (auto s = body->as<Cmd::Seq>()) {
    const auto& last = s->cmds.back();
    if (last->as<Cmd::Return>() || last->as<Cmd::ReturnPair>()) {
      std::vector<CmdPtr> prefix(s->cmds.begin(), s->cmds.end() - 1);
      return {make_seq(prefix, body->span), last};
    }
  }
  throw Error("program does not end with a return statement", body->span);
}

namespace {

// Weighted memories, possibly with repeats; merged only before sampling and at the end.
using Bag = std::vector<std::pair<Memory, double>>;

void merge(Bag& b) {
  if (b.size() < 2) return;
  std::sort(b.begin(), b.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::size_t w = 0;
  for (std::size_t r = 1; r < b.size(); ++r) {
    if (b[r].first == b[w].first) b[w].second += b[r].second;
    else if (++w != r) b[w] = std::move(b[r]);
  }
  b.resize(w + 1);
}

class Interp {
 public:
  Interp(const Unit& u, const InterpConfig& cfg, const Registry& reg, const Liveness* live)
      : u_(u), cfg_(cfg), live_(live) {
    ctx_.unit = &u;
    ctx_.reg = &reg;
  }

  Bag run(const CmdPtr& c, Bag in, bool merged = true) {
    Bag out = exec(c, std::move(in));
    project(c.get(), out);
    if (merged) merge(out);
    return out;
  }

 private:
  const Unit& u_;
  const InterpConfig& cfg_;
  const Liveness* live_;
  EvalCtx ctx_;
  std::size_t steps_ = 0;
  std::map<std::pair<double, std::int64_t>, std::vector<double>> kernels_;
  std::map<std::string, Value> defaults_;

  const Value& default_for(const std::string& name) {
    auto it = defaults_.find(name);
    if (it != defaults_.end()) return it->second;
    const VarDecl* d = u_.find_var(name);
    return defaults_[name] = d ? default_value(d->type) : Value();
  }

  void project(const Cmd* c, Bag& d) {
    if (!live_ || d.empty()) return;
    const auto* keep = live_->after(c);
    if (!keep) return;
    const auto& names = d.front().first.layout()->names();
    std::vector<int> dead;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (!keep->count(names[i])) dead.push_back(static_cast<int>(i));
    for (auto& [m, p] : d)
      for (int i : dead) {
        const Value& z = default_for(names[static_cast<std::size_t>(i)]);
        if (!(m.values()[static_cast<std::size_t>(i)] == z)) m = m.set_at(i, z);
      }
  }

  int slot(const Memory& m, const std::string& var, Span s) {
    const int i = m.layout() ? m.layout()->index(var) : -1;
    if (i < 0) throw EvalError("assignment to undeclared variable '" + var + "'", s);
    return i;
  }

  const std::vector<double>& kernel(double eps) {
    std::int64_t w;
    if (cfg_.window) {
      check_window(eps, *cfg_.window, cfg_.tail_tol);
      w = *cfg_.window;
    } else {
      w = min_window(eps, cfg_.tail_tol);
    }
    auto key = std::make_pair(eps, w);
    auto it = kernels_.find(key);
    if (it == kernels_.end()) it = kernels_.emplace(key, lap_kernel(eps, w)).first;
    return it->second;
  }

  Bag exec(const CmdPtr& c, Bag in) {
    if (in.empty()) return in;
    return std::visit(
        [&](const auto& x) -> Bag {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Cmd::Skip> || std::is_same_v<T, Cmd::Return>) {
            return std::move(in);
          } else if constexpr (std::is_same_v<T, Cmd::Seq>) {
            for (const auto& s : x.cmds) {
              in = exec(s, std::move(in));
              project(s.get(), in);
            }
            return std::move(in);
          } else if constexpr (std::is_same_v<T, Cmd::Assign>) {
            const int i = slot(in.front().first, x.var, c->span);
            for (auto& [m, p] : in) {
              MemoryEnv env(m);
              Value v = eval(x.e, env, ctx_);
              m = m.set_at(i, std::move(v));
            }
            return std::move(in);
          } else if constexpr (std::is_same_v<T, Cmd::Lap>) {
            merge(in);
            const auto& k = kernel(x.eps.to_double());
            const auto w = static_cast<std::int64_t>(k.size() / 2);
            const int i = slot(in.front().first, x.var, c->span);
            Bag out;
            out.reserve(in.size() * k.size());
            for (const auto& [m, p] : in) {
              MemoryEnv env(m);
              const Value centre = eval(x.e, env, ctx_);
              if (!centre.is_int()) throw EvalError("Laplace argument is not an integer: " + centre.str(), x.e->span);
              for (std::int64_t d = -w; d <= w; ++d)
                out.emplace_back(m.set_at(i, checked_add(centre.as_int(), d)), p * k[static_cast<std::size_t>(d + w)]);
            }
            return out;
          } else if constexpr (std::is_same_v<T, Cmd::Exp>) {
            merge(in);
            const int i = slot(in.front().first, x.var, c->span);
            Bag out;
            for (const auto& [m, p] : in) {
              MemoryEnv env(m);
              ValueDist r;
              try {
                r = exp_dist(x.eps.to_double(), eval(x.score, env, ctx_), eval(x.input, env, ctx_), ctx_.exp_range());
              } catch (const EvalError& e) {
                throw EvalError(e.message(), c->span);
              }
              for (const auto& [v, q] : r) out.emplace_back(m.set_at(i, v), p * q);
            }
            return out;
          } else if constexpr (std::is_same_v<T, Cmd::Mech>) {
            throw EvalError("mechanism '" + x.name + "' has no executable semantics", c->span);
          } else if constexpr (std::is_same_v<T, Cmd::If>) {
            Bag t, e;
            for (auto& mp : in) {
              MemoryEnv env(mp.first);
              (eval_bool(x.guard, env, ctx_) ? t : e).push_back(std::move(mp));
            }
            Bag out = exec(x.then_c, std::move(t));
            Bag other = exec(x.else_c, std::move(e));
            if (out.empty()) return other;
            out.insert(out.end(), std::make_move_iterator(other.begin()), std::make_move_iterator(other.end()));
            return out;
          } else if constexpr (std::is_same_v<T, Cmd::While>) {
            Bag cur = std::move(in), done;
            while (!cur.empty()) {
              Bag go;
              for (auto& mp : cur) {
                if (++steps_ > cfg_.iteration_cap)
                  throw EvalError("iteration cap of " + std::to_string(cfg_.iteration_cap) +
                                      " loop steps exceeded; the loop may not terminate",
                                  c->span);
                MemoryEnv env(mp.first);
                (eval_bool(x.guard, env, ctx_) ? go : done).push_back(std::move(mp));
              }
              cur = exec(x.body, std::move(go));
            }
            return done;
          } else {
            throw EvalError("target-language construct in a probabilistic program", c->span);
          }
        },
        c->node);
  }
};

Bag to_bag(const MemDist& d) { return Bag(d.begin(), d.end()); }

MemDist from_bag(const Bag& b) {
  MemDist out;
  for (const auto& [m, p] : b) out.add(m, p);
  return out;
}

}  // namespace

MemDist interpret(const Unit& u, const CmdPtr& c, const MemDist& in, const InterpConfig& cfg, const Registry& reg) {
  if (cfg.project_dead) {
    std::set<std::string> all;
    for (const auto& v : u.vars) all.insert(v.name);
    Liveness live(c, all);
    return from_bag(Interp(u, cfg, reg, &live).run(c, to_bag(in)));
  }
  return from_bag(Interp(u, cfg, reg, nullptr).run(c, to_bag(in)));
}

MemDist interpret(const Unit& u, const CmdPtr& c, const Memory& m, const InterpConfig& cfg, const Registry& reg) {
  return interpret(u, c, MemDist::dirac(m), cfg, reg);
}

ValueDist output(const Unit& u, const Memory& m, InterpConfig cfg, const Registry& reg) {
  auto [prefix, ret] = split_return(u.body);
  const auto* r = ret->as<Cmd::Return>();
  if (!r) throw Error("output() needs a source program", ret->span);
  Liveness live(prefix, free_vars(r->e));
  const Bag d = Interp(u, cfg, reg, &live).run(prefix, Bag{{m, 1.0}}, false);
  EvalCtx ctx{&u, &reg, nullptr, {}};
  std::vector<std::pair<Value, double>> pts;
  pts.reserve(d.size());
  for (const auto& [mem, p] : d) {
    MemoryEnv env(mem);
    pts.emplace_back(eval(r->e, env, ctx), p);
  }
  return ValueDist::from_pairs(std::move(pts));
}

}  // namespace dpsp
