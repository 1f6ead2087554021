#include "properties.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dpsp/dist.hpp"
#include "dpsp/dpcheck.hpp"
#include "dpsp/eval.hpp"
#include "dpsp/falsify.hpp"
#include "dpsp/logic.hpp"
#include "dpsp/parser.hpp"
#include "dpsp/pretty.hpp"
#include "dpsp/target.hpp"

namespace dpsp::testing {

namespace {

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Masses are dyadic so sums and products stay exact for small supports.
ValueDist random_dyadic_dist(Rng& rng, int max_points, int key_range) {
  const int n = uniform(rng, 1, max_points);
  ValueDist::Points w;
  for (int i = 0; i < n; ++i) w[Value(uniform(rng, 0, key_range))] += uniform(rng, 1, 4);
  double z = 0;
  for (const auto& [_, m] : w) z += m;
  // Scale to a sub-distribution with total 1 or a dyadic fraction of it.
  const double scale = std::pow(2.0, -uniform(rng, 0, 1)) / z;
  ValueDist d;
  for (const auto& [k, m] : w) d.add(k, m * scale);
  return d;
}

using Kernel = std::map<Value, ValueDist>;

Kernel random_kernel(Rng& rng, int key_range) {
  Kernel k;
  for (int i = 0; i <= key_range; ++i) k[Value(i)] = random_dyadic_dist(rng, 3, key_range);
  return k;
}

std::string dist_str(const ValueDist& d) {
  std::ostringstream os;
  os << "{";
  for (const auto& [v, p] : d) os << v.str() << ":" << p << " ";
  os << "}";
  return os.str();
}

// Random integer expressions and formulas over x, y, z, i.
const char* const kVars[] = {"x", "y", "z", "i"};

ExprPtr random_term(Rng& rng, int depth) {
  if (depth <= 0 || uniform(rng, 0, 3) == 0) {
    if (uniform(rng, 0, 2) == 0) return ex::lit(Value(uniform(rng, -2, 2)));
    return ex::var(kVars[uniform(rng, 0, 3)]);
  }
  switch (uniform(rng, 0, 5)) {
    case 0: return ex::bin(BinOp::Add, random_term(rng, depth - 1), random_term(rng, depth - 1));
    case 1: return ex::bin(BinOp::Sub, random_term(rng, depth - 1), random_term(rng, depth - 1));
    case 2: return ex::bin(BinOp::Mul, random_term(rng, depth - 1), random_term(rng, depth - 1));
    case 3: return ex::bin(BinOp::Min, random_term(rng, depth - 1), random_term(rng, depth - 1));
    case 4: return ex::bin(BinOp::Max, random_term(rng, depth - 1), random_term(rng, depth - 1));
    default: return ex::un(UnOp::Abs, random_term(rng, depth - 1));
  }
}

ExprPtr random_formula(Rng& rng, int depth) {
  if (depth <= 0 || uniform(rng, 0, 3) == 0) {
    static const BinOp cmps[] = {BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge};
    return ex::bin(cmps[uniform(rng, 0, 5)], random_term(rng, 2), random_term(rng, 2));
  }
  switch (uniform(rng, 0, 4)) {
    case 0: return ex::bin(BinOp::And, random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 1: return ex::bin(BinOp::Or, random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 2: return ex::bin(BinOp::Implies, random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 3: return ex::un(UnOp::Not, random_formula(rng, depth - 1));
    default: {
      // Binds a name that the substituted term may also mention, to exercise capture avoidance.
      QDomain dom;
      dom.lo = ex::lit(Value(0));
      dom.hi = ex::lit(Value(uniform(rng, 0, 2)));
      const Quant q = uniform(rng, 0, 1) ? Quant::Forall : Quant::Exists;
      return ex::quant(q, uniform(rng, 0, 1) ? "i" : "x", dom, random_formula(rng, depth - 1));
    }
  }
}

// Random loop-free target programs over x_1, x_2, y_1, y_2 with domains {0..3}.
const char* const kTargetUnit = R"(
decl x : int in {0..3};
decl y : int in {0..3};
pre { true };
target (1, 0);
return x
)";

const char* const kTargetVars[] = {"x_1", "x_2", "y_1", "y_2"};

std::string target_term(Rng& rng, int depth) {
  if (depth <= 0 || uniform(rng, 0, 2) == 0) {
    if (uniform(rng, 0, 3) == 0) return std::to_string(uniform(rng, 0, 3));
    return kTargetVars[uniform(rng, 0, 3)];
  }
  const std::string a = target_term(rng, depth - 1), b = target_term(rng, depth - 1);
  switch (uniform(rng, 0, 3)) {
    case 0: return "(" + a + " + " + b + ")";
    case 1: return "abs(" + a + " - " + b + ")";
    case 2: return "min(" + a + ", " + b + ")";
    default: return "max(" + a + ", " + b + ")";
  }
}

std::string target_guard(Rng& rng) {
  static const char* cmps[] = {" == ", " != ", " < ", " <= "};
  std::string g = target_term(rng, 1) + cmps[uniform(rng, 0, 3)] + target_term(rng, 1);
  if (uniform(rng, 0, 3) == 0) g = "(" + g + ") && (" + target_term(rng, 0) + " <= " + target_term(rng, 0) + ")";
  return g;
}

std::string target_stmt(Rng& rng, int depth) {
  const int pick = uniform(rng, 0, depth > 0 ? 4 : 3);
  switch (pick) {
    case 0: return std::string(kTargetVars[uniform(rng, 0, 3)]) + " := " + target_term(rng, 2);
    case 1: return "assert(" + target_guard(rng) + ")";
    case 2: {
      static const char* eps[] = {"0.5", "1", "0.25"};
      return std::string(uniform(rng, 0, 1) ? "(x_1, x_2)" : "(y_1, y_2)") + " := Lap<>[" + eps[uniform(rng, 0, 2)] +
             "](" + target_term(rng, 1) + ", " + target_term(rng, 1) + ")";
    }
    case 3: return "@lapspec{accuracy(0.5)} (x_1, x_2) := Lap<>[1](" + target_term(rng, 1) + ", " +
                   target_term(rng, 1) + ")";
    default: {
      std::string t = target_stmt(rng, depth - 1), e = target_stmt(rng, depth - 1);
      return "if " + target_guard(rng) + " then { " + t + " } else { " + e + " }";
    }
  }
}

std::vector<std::string> random_target_program(Rng& rng) {
  std::vector<std::string> stmts;
  const int n = uniform(rng, 1, 4);
  for (int i = 0; i < n; ++i) stmts.push_back(target_stmt(rng, 1));
  return stmts;
}

std::string join(const std::vector<std::string>& stmts) {
  std::string s;
  for (const auto& st : stmts) s += (s.empty() ? "" : "; ") + st;
  return s;
}

std::vector<Memory> target_grid(const Unit& u) {
  std::vector<Memory> out;
  const Memory base = initial_target_memory(u, {});
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b)
      for (int c = 0; c <= 3; ++c)
        for (int d = 0; d <= 3; ++d)
          out.push_back(base.set("x_1", Value(a)).set("x_2", Value(b)).set("y_1", Value(c)).set("y_2", Value(d)));
  return out;
}

}  // namespace

PropertyResult monad_laws(std::size_t cases, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r;
  const double tol = 1e-12;
  for (std::size_t n = 0; n < cases; ++n, ++r.cases) {
    const int keys = uniform(rng, 1, 5);
    const ValueDist mu = random_dyadic_dist(rng, 5, keys);
    const Kernel f = random_kernel(rng, keys), g = random_kernel(rng, keys);
    auto F = [&](const Value& v) { return f.at(v); };
    auto G = [&](const Value& v) { return g.at(v); };
    const Value a(uniform(rng, 0, keys));

    if (!ValueDist::dirac(a).bind(F).approx_equal(F(a), tol)) r.fail("left identity at " + a.str());
    if (!mu.bind([](const Value& v) { return ValueDist::dirac(v); }).approx_equal(mu, tol))
      r.fail("right identity on " + dist_str(mu));
    const ValueDist lhs = mu.bind(F).bind(G);
    const ValueDist rhs = mu.bind([&](const Value& v) { return F(v).bind(G); });
    if (!lhs.approx_equal(rhs, tol)) r.fail("associativity: " + dist_str(lhs) + " vs " + dist_str(rhs));

    // Monotonicity of bind in the pointwise order.
    ValueDist smaller;
    for (const auto& [v, p] : mu) smaller.add(v, p * 0.5 * uniform(rng, 0, 2));
    if (!smaller.bind(F).leq(mu.bind(F), tol)) r.fail("bind not monotone on " + dist_str(smaller));
  }
  return r;
}

PropertyResult substitution_lemma(std::size_t cases, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r;
  const EvalCtx ctx;
  for (std::size_t n = 0; n < cases; ++n, ++r.cases) {
    const ExprPtr phi = random_formula(rng, 3);
    const ExprPtr e = random_term(rng, 2);
    const std::string x = kVars[uniform(rng, 0, 2)];
    std::map<std::string, Value> m;
    for (const char* v : kVars) m[v] = Value(uniform(rng, -2, 2));
    try {
      const bool lhs = eval_bool(subst(phi, x, e), MapEnv(m), ctx);
      auto m2 = m;
      m2[x] = eval(e, MapEnv(m), ctx);
      const bool rhs = eval_bool(phi, MapEnv(m2), ctx);
      if (lhs != rhs) r.fail(pretty(phi) + " [" + x + " := " + pretty(e) + "]");
    } catch (const EvalError& err) {
      r.fail(std::string("evaluation error: ") + err.what() + " in " + pretty(phi));
    }
  }
  return r;
}

PropertyResult hoare_consistency(std::size_t cases, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r;
  const Unit u = parse_unit(kTargetUnit);
  const std::vector<Memory> grid = target_grid(u);
  EvalCtx ctx;
  ctx.unit = &u;
  // A case counts only when its side obligations hold and some grid state satisfies the precondition.
  for (std::size_t attempts = 0; r.cases < cases && attempts < 20 * cases; ++attempts) {
    const std::string text = join(random_target_program(rng));
    const CmdPtr c = parse_cmd(text);
    static const char* budgets[] = {"0.5", "1", "2", "3"};
    const ExprPtr post =
        parse_expr("(" + target_guard(rng) + ") && __alpha <= " + budgets[uniform(rng, 0, 3)]);
    const WpResult w = wp(u, c, post);
    bool sides_valid = true;
    for (const auto& ob : w.side) sides_valid &= falsify(u, ob.formula).valid;
    if (!sides_valid) continue;
    bool exercised = false;
    for (const Memory& m : grid) {
      if (!eval_bool(w.pre, MemoryEnv(m), ctx)) continue;
      exercised = true;
      const TargetResult res = run_target(u, c, m);
      if (res.bottom) {
        r.fail("bottom from a wp state: " + text + " on " + m.str());
        break;
      }
      for (const Memory& out : res.memories) {
        if (!eval_bool(post, MemoryEnv(out), ctx)) {
          r.fail("postcondition " + pretty(post) + " broken by " + text + " from " + m.str());
          break;
        }
      }
    }
    r.cases += exercised;
  }
  return r;
}

PropertyResult eps_distance_monotone(std::size_t cases, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t n = 0; n < cases; ++n, ++r.cases) {
    const int keys = uniform(rng, 1, 8);
    ValueDist::Points w1, w2;
    for (int k = 0; k <= keys; ++k) {
      if (uniform(rng, 0, 3)) w1[Value(k)] = unit(rng);
      if (uniform(rng, 0, 3)) w2[Value(k)] = unit(rng);
    }
    w1[Value(0)] += 0.1;
    w2[Value(keys)] += 0.1;
    const ValueDist a = ValueDist::normalize(w1), b = ValueDist::normalize(w2);
    const double e1 = 2 * unit(rng), e2 = e1 + 2 * unit(rng);
    const double d1 = eps_distance(a, b, e1), d2 = eps_distance(a, b, e2);
    if (d1 + 1e-15 < d2) r.fail("eps " + std::to_string(e1) + " -> " + std::to_string(d1) + ", eps " +
                                std::to_string(e2) + " -> " + std::to_string(d2));
    if (d2 < 0) r.fail("negative distance");
  }
  return r;
}

PropertyResult ghost_monotonicity(std::size_t cases, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r;
  const Unit u = parse_unit(kTargetUnit);
  const std::vector<Memory> grid = target_grid(u);
  for (std::size_t n = 0; n < cases; ++n, ++r.cases) {
    const auto stmts = random_target_program(rng);
    std::vector<CmdPtr> steps;
    for (const auto& s : stmts) steps.push_back(parse_cmd(s));
    const Memory start = grid[std::uniform_int_distribution<std::size_t>(0, grid.size() - 1)(rng)];
    std::set<Memory> frontier{start};
    for (std::size_t k = 0; k < steps.size() && !frontier.empty(); ++k) {
      std::set<Memory> next;
      for (const Memory& m : frontier) {
        const TargetResult res = run_target(u, steps[k], m);
        if (res.bottom) continue;  // the path ends here
        const double a0 = m.get(kAlpha).as_real(), d0 = m.get(kDelta).as_real();
        for (const Memory& o : res.memories) {
          if (o.get(kAlpha).as_real() < a0 || o.get(kDelta).as_real() < d0)
            r.fail("ghost decreased by " + stmts[k] + " from " + m.str() + " to " + o.str());
          next.insert(o);
        }
      }
      frontier = std::move(next);
    }
  }
  return r;
}

}  // namespace dpsp::testing
