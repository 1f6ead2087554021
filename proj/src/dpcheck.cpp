#include "dpsp/dpcheck.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "dpsp/eval.hpp"

namespace dpsp {

double eps_distance(const ValueDist& a, const ValueDist& b, double eps) {
  const double scale = std::exp(eps);
  double d = 0;
  auto ib = b.begin();
  for (const auto& [x, p] : a) {
    while (ib != b.end() && ib->first < x) ++ib;
    const double q = (ib != b.end() && ib->first == x) ? ib->second : 0.0;
    d += std::max(0.0, p - scale * q);
  }
  return d;
}

Adjacency parse_adjacency(const std::string& name) {
  if (name == "one-entry-pm1") return Adjacency::OneEntryPm1;
  if (name == "add-remove-record") return Adjacency::AddRemoveRecord;
  if (name == "one-edge") return Adjacency::OneEdge;
  if (name == "custom") return Adjacency::Custom;
  throw Error("unknown adjacency kind '" + name + "' (one-entry-pm1, add-remove-record, one-edge, custom)");
}

const char* adjacency_name(Adjacency a) {
  switch (a) {
    case Adjacency::OneEntryPm1: return "one-entry-pm1";
    case Adjacency::AddRemoveRecord: return "add-remove-record";
    case Adjacency::OneEdge: return "one-edge";
    case Adjacency::Custom: return "custom";
  }
  return "?";
}

bool one_entry_pm1(const Value& a, const Value& b) {
  if (!a.is_list() || !b.is_list()) return false;
  const auto& x = a.as_list();
  const auto& y = b.as_list();
  if (x.size() != y.size()) return false;
  int diffs = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == y[i]) continue;
    if (++diffs > 1 || std::llabs(x[i] - y[i]) > 1) return false;
  }
  return true;
}

bool add_remove_record(const Value& a, const Value& b) {
  if (!a.is_list() || !b.is_list()) return false;
  const auto& x = a.as_list();
  const auto& y = b.as_list();
  if (x.size() != y.size()) return false;
  std::int64_t dist = 0;
  for (std::size_t i = 0; i < x.size(); ++i) dist += std::llabs(x[i] - y[i]);
  return dist == 1;
}

bool one_edge(const Value& a, const Value& b) {
  if (!a.is_map() || !b.is_map()) return false;
  return graph_plus_edge(a, b) || graph_plus_edge(b, a);
}

namespace {

bool related(Adjacency k, const Value& a, const Value& b) {
  switch (k) {
    case Adjacency::OneEntryPm1: return one_entry_pm1(a, b);
    case Adjacency::AddRemoveRecord: return add_remove_record(a, b);
    case Adjacency::OneEdge: return one_edge(a, b);
    case Adjacency::Custom: return true;
  }
  return false;
}

bool calls_mention(const ExprPtr& e, const std::string& name) {
  bool found = false;
  std::function<void(const ExprPtr&)> go = [&](const ExprPtr& x) {
    if (found || !x) return;
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, Expr::Call>) {
            for (const auto& a : n.args)
              if (const auto* v = a->template as<Expr::Var>(); v && split_tag(v->name).first == name) found = true;
            for (const auto& a : n.args) go(a);
          } else if constexpr (std::is_same_v<N, Expr::Unary>) {
            go(n.a);
          } else if constexpr (std::is_same_v<N, Expr::Binary>) {
            go(n.a);
            go(n.b);
          } else if constexpr (std::is_same_v<N, Expr::Quantified>) {
            go(n.body);
          } else if constexpr (std::is_same_v<N, Expr::Labeled>) {
            go(n.body);
          }
        },
        x->node);
  };
  go(e);
  return found;
}

// The database variable: of the shape the relation expects, preferably passed to a predicate.
std::string database_var(const Unit& u, const std::vector<std::string>& inputs, Adjacency kind) {
  const Kind want = kind == Adjacency::OneEdge ? Kind::Map : Kind::List;
  std::string first;
  for (const auto& n : inputs) {
    const VarDecl* d = u.find_var(n);
    if (!d || d->type.kind != want) continue;
    if (calls_mention(u.pre, n)) return n;
    if (first.empty()) first = n;
  }
  if (first.empty()) throw Error(std::string("no input variable fits adjacency ") + adjacency_name(kind));
  return first;
}

}  // namespace

std::vector<MemoryPair> adjacency_pairs(const Unit& u, Adjacency kind, std::size_t limit) {
  if (!u.pre) throw Error("program has no precondition");
  std::vector<std::string> inputs;
  for (const auto& n : free_vars(u.pre)) {
    if (is_ghost(n)) continue;
    const auto base = split_tag(n).first;
    if (std::find(inputs.begin(), inputs.end(), base) == inputs.end()) inputs.push_back(base);
  }
  const std::string db = kind == Adjacency::Custom || inputs.empty() ? "" : database_var(u, inputs, kind);

  // Candidate (tag-1, tag-2) values per input.
  std::vector<std::vector<std::pair<Value, Value>>> choices;
  for (const auto& n : inputs) {
    const VarDecl* d = u.find_var(n);
    if (!d) throw Error("precondition mentions undeclared variable '" + n + "'");
    if (d->domain.kind == DomainSpec::Kind::None) throw Error("input '" + n + "' has no finite domain", d->span);
    const auto vals = d->domain.enumerate();
    std::vector<std::pair<Value, Value>> c;
    for (const auto& a : vals)
      for (const auto& b : vals)
        if (n != db || related(kind, a, b)) c.emplace_back(a, b);
    choices.push_back(std::move(c));
  }

  EvalCtx ctx;
  ctx.unit = &u;
  std::vector<MemoryPair> out;
  std::vector<std::size_t> idx(choices.size(), 0);
  std::size_t visited = 0;
  for (;;) {
    for (const auto& c : choices)
      if (c.empty()) return out;
    std::map<std::string, Value> env, in1, in2;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto& [a, b] = choices[i][idx[i]];
      env[tagged(inputs[i], 1)] = a;
      env[tagged(inputs[i], 2)] = b;
      in1[inputs[i]] = a;
      in2[inputs[i]] = b;
    }
    if (++visited > limit) throw Error("adjacency enumeration exceeds " + std::to_string(limit) + " candidates");
    if (eval_bool(u.pre, MapEnv(env), ctx)) out.emplace_back(initial_memory(u, in1), initial_memory(u, in2));
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == choices[k].size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return out;
}

nlohmann::json to_json(const DpReport& r) {
  nlohmann::json j;
  j["pairs_checked"] = r.pairs_checked;
  j["max_distance"] = r.max_distance;
  j["witness_pair"] = r.witness ? nlohmann::json::array({to_json(r.witness->first), to_json(r.witness->second)})
                                : nlohmann::json(nullptr);
  j["eps"] = r.eps;
  j["delta"] = r.delta;
  j["tol"] = r.tol;
  j["pass"] = r.pass;
  return j;
}

DpReport dp_check(const Unit& u, const std::vector<MemoryPair>& pairs, double eps, double delta, double tol,
                  const InterpConfig& cfg) {
  DpReport rep;
  rep.eps = eps;
  rep.delta = delta;
  rep.tol = tol < 0 ? 10 * cfg.tail_tol : tol;
  std::map<Memory, ValueDist> cache;
  auto out = [&](const Memory& m) -> const ValueDist& {
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, output(u, m, cfg)).first;
    return it->second;
  };
  for (const auto& p : pairs) {
    const ValueDist& a = out(p.first);
    const ValueDist& b = out(p.second);
    const double d = std::max(eps_distance(a, b, eps), eps_distance(b, a, eps));
    ++rep.pairs_checked;
    if (!rep.witness || d > rep.max_distance) {
      rep.max_distance = d;
      rep.witness = p;
    }
  }
  rep.pass = rep.max_distance <= delta + rep.tol;
  return rep;
}

TailCheck tail_check(double eps, std::int64_t t, std::int64_t window) {
  TailCheck r;
  r.bound = 2 * std::exp(-static_cast<double>(t) * eps / 2);
  for (const auto& [v, p] : lap_dist(eps, 0, window))
    if (std::llabs(v.as_int()) > t) r.measured += p;
  r.pass = r.measured <= r.bound;
  return r;
}

std::optional<std::pair<Value, Value>> dti_spec_violation(const DomainSpec& histograms) {
  const Builtin* dti = Registry::standard().find("DistToInstability");
  for (const auto& d1 : histograms.enumerate()) {
    const auto x1 = (*dti)({d1}).as_int();
    for (const auto& h : hist_neighbors(d1.as_list())) {
      const Value d2(h);
      if (hist_median(d1.as_list()) == hist_median(h)) continue;
      if (x1 != 0 || (*dti)({d2}).as_int() != 0) return std::make_pair(d1, d2);
    }
  }
  return std::nullopt;
}

}  // namespace dpsp
