#include "dpsp/ast.hpp"

#include <algorithm>
#include <functional>

namespace dpsp {

const char* op_name(UnOp op) {
  switch (op) {
    case UnOp::Neg: return "-";
    case UnOp::Not: return "!";
    case UnOp::Abs: return "abs";
    case UnOp::Hd: return "hd";
    case UnOp::Tl: return "tl";
    case UnOp::Length: return "length";
  }
  return "?";
}

const char* op_name(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::IDiv: return "div";
    case BinOp::Mod: return "mod";
    case BinOp::Min: return "min";
    case BinOp::Max: return "max";
    case BinOp::Cons: return "::";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    case BinOp::Implies: return "==>";
    case BinOp::Iff: return "<=>";
  }
  return "?";
}

bool is_comparison(BinOp op) {
  return op == BinOp::Eq || op == BinOp::Ne || op == BinOp::Lt || op == BinOp::Le || op == BinOp::Gt ||
         op == BinOp::Ge;
}

bool is_connective(BinOp op) {
  return op == BinOp::And || op == BinOp::Or || op == BinOp::Implies || op == BinOp::Iff;
}

namespace ex {

namespace {
ExprPtr mk(Expr::Node n, Span s) { return std::make_shared<const Expr>(Expr{std::move(n), s}); }
}  // namespace

ExprPtr var(std::string name, Span s) { return mk(Expr::Var{std::move(name)}, s); }
ExprPtr lit(Value v, Span s) { return mk(Expr::Lit{std::move(v)}, s); }
ExprPtr truth(bool b) { return lit(Value(b)); }
ExprPtr un(UnOp op, ExprPtr a, Span s) { return mk(Expr::Unary{op, std::move(a)}, s); }
ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b, Span s) { return mk(Expr::Binary{op, std::move(a), std::move(b)}, s); }
ExprPtr call(std::string name, std::vector<ExprPtr> args, Span s) {
  return mk(Expr::Call{std::move(name), std::move(args)}, s);
}
ExprPtr index(ExprPtr base, ExprPtr key, Span s) { return mk(Expr::Index{std::move(base), std::move(key)}, s); }
ExprPtr score(ExprPtr s, ExprPtr input, ExprPtr r, Span sp) {
  return mk(Expr::Score{std::move(s), std::move(input), std::move(r)}, sp);
}
ExprPtr quant(Quant q, std::string v, QDomain dom, ExprPtr body, Span s) {
  return mk(Expr::Quantified{q, std::move(v), std::move(dom), std::move(body)}, s);
}
ExprPtr maxgap(ExprPtr s, ExprPtr e1, ExprPtr e2, Span sp) {
  return mk(Expr::MaxGap{std::move(s), std::move(e1), std::move(e2)}, sp);
}
ExprPtr label(std::string l, ExprPtr body, Span s) { return mk(Expr::Labeled{std::move(l), std::move(body)}, s); }

ExprPtr conj(ExprPtr a, ExprPtr b) {
  if (is_true_lit(a)) return b;
  if (is_true_lit(b)) return a;
  return bin(BinOp::And, std::move(a), std::move(b));
}

ExprPtr conj(const std::vector<ExprPtr>& parts) {
  ExprPtr out = truth();
  for (const auto& p : parts) out = conj(out, p);
  return out;
}

ExprPtr implies(ExprPtr a, ExprPtr b) {
  if (is_true_lit(a)) return b;
  return bin(BinOp::Implies, std::move(a), std::move(b));
}

ExprPtr eq(ExprPtr a, ExprPtr b) { return bin(BinOp::Eq, std::move(a), std::move(b)); }
ExprPtr add(ExprPtr a, ExprPtr b) { return bin(BinOp::Add, std::move(a), std::move(b)); }
ExprPtr mul(ExprPtr a, ExprPtr b) { return bin(BinOp::Mul, std::move(a), std::move(b)); }

}  // namespace ex

bool is_true_lit(const ExprPtr& e) {
  if (!e) return true;
  auto l = e->as<Expr::Lit>();
  return l && l->value.is_bool() && l->value.as_bool();
}

namespace {

bool same_dom(const QDomain& a, const QDomain& b) {
  return a.kind == b.kind && a.name == b.name && same(a.lo, b.lo) && same(a.hi, b.hi);
}

bool same_all(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

bool same(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, Expr::Var>) return x.name == y.name;
        else if constexpr (std::is_same_v<T, Expr::Lit>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, Expr::Unary>) return x.op == y.op && same(x.a, y.a);
        else if constexpr (std::is_same_v<T, Expr::Binary>) return x.op == y.op && same(x.a, y.a) && same(x.b, y.b);
        else if constexpr (std::is_same_v<T, Expr::Call>) return x.name == y.name && same_all(x.args, y.args);
        else if constexpr (std::is_same_v<T, Expr::Index>) return same(x.base, y.base) && same(x.key, y.key);
        else if constexpr (std::is_same_v<T, Expr::Score>)
          return same(x.score, y.score) && same(x.input, y.input) && same(x.r, y.r);
        else if constexpr (std::is_same_v<T, Expr::Quantified>)
          return x.q == y.q && x.var == y.var && same_dom(x.dom, y.dom) && same(x.body, y.body);
        else if constexpr (std::is_same_v<T, Expr::MaxGap>)
          return same(x.score, y.score) && same(x.e1, y.e1) && same(x.e2, y.e2);
        else return x.label == y.label && same(x.body, y.body);
      },
      a->node);
}

namespace {

void collect_free(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  if (!e) return;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Var>) {
          if (!bound.count(x.name)) out.insert(x.name);
        } else if constexpr (std::is_same_v<T, Expr::Lit>) {
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          collect_free(x.a, bound, out);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          collect_free(x.a, bound, out);
          collect_free(x.b, bound, out);
        } else if constexpr (std::is_same_v<T, Expr::Call>) {
          for (const auto& a : x.args) collect_free(a, bound, out);
        } else if constexpr (std::is_same_v<T, Expr::Index>) {
          collect_free(x.base, bound, out);
          collect_free(x.key, bound, out);
        } else if constexpr (std::is_same_v<T, Expr::Score>) {
          collect_free(x.score, bound, out);
          collect_free(x.input, bound, out);
          collect_free(x.r, bound, out);
        } else if constexpr (std::is_same_v<T, Expr::Quantified>) {
          collect_free(x.dom.lo, bound, out);
          collect_free(x.dom.hi, bound, out);
          const bool was = bound.count(x.var) > 0;
          bound.insert(x.var);
          collect_free(x.body, bound, out);
          if (!was) bound.erase(x.var);
        } else if constexpr (std::is_same_v<T, Expr::MaxGap>) {
          collect_free(x.score, bound, out);
          collect_free(x.e1, bound, out);
          collect_free(x.e2, bound, out);
        } else {
          collect_free(x.body, bound, out);
        }
      },
      e->node);
}

void collect_calls(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Unary>) {
          collect_calls(x.a, out);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          collect_calls(x.a, out);
          collect_calls(x.b, out);
        } else if constexpr (std::is_same_v<T, Expr::Call>) {
          out.insert(x.name);
          for (const auto& a : x.args) collect_calls(a, out);
        } else if constexpr (std::is_same_v<T, Expr::Index>) {
          collect_calls(x.base, out);
          collect_calls(x.key, out);
        } else if constexpr (std::is_same_v<T, Expr::Score>) {
          collect_calls(x.score, out);
          collect_calls(x.input, out);
          collect_calls(x.r, out);
        } else if constexpr (std::is_same_v<T, Expr::Quantified>) {
          collect_calls(x.dom.lo, out);
          collect_calls(x.dom.hi, out);
          collect_calls(x.body, out);
        } else if constexpr (std::is_same_v<T, Expr::MaxGap>) {
          collect_calls(x.score, out);
          collect_calls(x.e1, out);
          collect_calls(x.e2, out);
        } else if constexpr (std::is_same_v<T, Expr::Labeled>) {
          collect_calls(x.body, out);
        }
      },
      e->node);
}

}  // namespace

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> bound, out;
  collect_free(e, bound, out);
  return out;
}

std::set<std::string> called_names(const ExprPtr& e) {
  std::set<std::string> out;
  collect_calls(e, out);
  return out;
}

bool Cmd::is_target_only() const {
  return std::holds_alternative<Assert>(node) || std::holds_alternative<LapPair>(node) ||
         std::holds_alternative<ExpPair>(node) || std::holds_alternative<MechPair>(node) ||
         std::holds_alternative<ReturnPair>(node);
}

bool Cmd::is_source_only() const {
  return std::holds_alternative<Lap>(node) || std::holds_alternative<Exp>(node) ||
         std::holds_alternative<Mech>(node) || std::holds_alternative<Return>(node);
}

CmdPtr make_cmd(Cmd::Node node, Span span) { return std::make_shared<const Cmd>(Cmd{std::move(node), span}); }

CmdPtr make_seq(std::vector<CmdPtr> cmds, Span span) {
  std::vector<CmdPtr> flat;
  for (auto& c : cmds) {
    if (!c) continue;
    if (auto s = c->as<Cmd::Seq>()) {
      flat.insert(flat.end(), s->cmds.begin(), s->cmds.end());
    } else {
      flat.push_back(std::move(c));
    }
  }
  if (flat.empty()) return make_cmd(Cmd::Skip{}, span);
  if (flat.size() == 1) return flat.front();
  return make_cmd(Cmd::Seq{std::move(flat)}, span);
}

namespace {

bool same_annot(const std::optional<LoopAnnot>& a, const std::optional<LoopAnnot>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return same(a->invariant, b->invariant) && same(a->variant, b->variant);
}

}  // namespace

bool same(const CmdPtr& a, const CmdPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, Cmd::Skip>) {
          return true;
        } else if constexpr (std::is_same_v<T, Cmd::Seq>) {
          if (x.cmds.size() != y.cmds.size()) return false;
          for (std::size_t i = 0; i < x.cmds.size(); ++i) {
            if (!same(x.cmds[i], y.cmds[i])) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Cmd::Assign>) {
          return x.var == y.var && same(x.e, y.e);
        } else if constexpr (std::is_same_v<T, Cmd::Lap>) {
          return x.var == y.var && x.eps == y.eps && same(x.e, y.e) && x.spec == y.spec;
        } else if constexpr (std::is_same_v<T, Cmd::Exp>) {
          return x.var == y.var && x.eps == y.eps && same(x.score, y.score) && same(x.input, y.input);
        } else if constexpr (std::is_same_v<T, Cmd::Mech>) {
          return x.var == y.var && x.name == y.name && x.eps == y.eps && same_all(x.args, y.args);
        } else if constexpr (std::is_same_v<T, Cmd::If>) {
          return same(x.guard, y.guard) && same(x.then_c, y.then_c) && same(x.else_c, y.else_c);
        } else if constexpr (std::is_same_v<T, Cmd::While>) {
          return same(x.guard, y.guard) && same(x.body, y.body) && same_annot(x.annot, y.annot);
        } else if constexpr (std::is_same_v<T, Cmd::Return>) {
          return same(x.e, y.e);
        } else if constexpr (std::is_same_v<T, Cmd::Assert>) {
          return same(x.phi, y.phi);
        } else if constexpr (std::is_same_v<T, Cmd::LapPair>) {
          return x.x1 == y.x1 && x.x2 == y.x2 && x.eps == y.eps && same(x.e1, y.e1) && same(x.e2, y.e2) &&
                 x.spec == y.spec;
        } else if constexpr (std::is_same_v<T, Cmd::ExpPair>) {
          return x.x1 == y.x1 && x.x2 == y.x2 && x.eps == y.eps && same(x.s1, y.s1) && same(x.e1, y.e1) &&
                 same(x.s2, y.s2) && same(x.e2, y.e2);
        } else if constexpr (std::is_same_v<T, Cmd::MechPair>) {
          return x.x1 == y.x1 && x.x2 == y.x2 && x.name == y.name && x.eps == y.eps &&
                 same_all(x.args1, y.args1) && same_all(x.args2, y.args2);
        } else {
          return same(x.e1, y.e1) && same(x.e2, y.e2);
        }
      },
      a->node);
}

void walk(const CmdPtr& c, const std::function<void(const Cmd&)>& f) {
  if (!c) return;
  f(*c);
  if (auto s = c->as<Cmd::Seq>()) {
    for (const auto& x : s->cmds) walk(x, f);
  } else if (auto i = c->as<Cmd::If>()) {
    walk(i->then_c, f);
    walk(i->else_c, f);
  } else if (auto w = c->as<Cmd::While>()) {
    walk(w->body, f);
  }
}

std::set<std::string> assigned_vars(const CmdPtr& c) {
  std::set<std::string> out;
  walk(c, [&](const Cmd& x) {
    if (auto a = x.as<Cmd::Assign>()) out.insert(a->var);
    else if (auto l = x.as<Cmd::Lap>()) out.insert(l->var);
    else if (auto e = x.as<Cmd::Exp>()) out.insert(e->var);
    else if (auto m = x.as<Cmd::Mech>()) out.insert(m->var);
    else if (auto lp = x.as<Cmd::LapPair>()) out.insert({lp->x1, lp->x2});
    else if (auto ep = x.as<Cmd::ExpPair>()) out.insert({ep->x1, ep->x2});
    else if (auto mp = x.as<Cmd::MechPair>()) out.insert({mp->x1, mp->x2});
  });
  return out;
}

namespace {

void enumerate_lists(std::int64_t len, std::int64_t lo, std::int64_t hi, IntList& cur, std::vector<Value>& out) {
  if (static_cast<std::int64_t>(cur.size()) == len) {
    out.emplace_back(cur);
    return;
  }
  for (auto v = lo; v <= hi; ++v) {
    cur.push_back(v);
    enumerate_lists(len, lo, hi, cur, out);
    cur.pop_back();
  }
}

void enumerate_hist(std::int64_t bins, std::int64_t remaining, IntList& cur, std::vector<IntList>& out) {
  if (static_cast<std::int64_t>(cur.size()) == bins) {
    out.push_back(cur);
    return;
  }
  for (std::int64_t c = 0; c <= remaining; ++c) {
    cur.push_back(c);
    enumerate_hist(bins, remaining - c, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Value> DomainSpec::enumerate() const {
  std::vector<Value> out;
  switch (kind) {
    case Kind::None: break;
    case Kind::Interval:
      for (auto v = lo; v <= hi; ++v) out.emplace_back(v);
      break;
    case Kind::Set: out = values; break;
    case Kind::Lists:
      for (auto len = min_len; len <= max_len; ++len) {
        IntList cur;
        enumerate_lists(len, lo, hi, cur, out);
      }
      break;
    case Kind::Histograms: {
      std::vector<IntList> all;
      IntList cur;
      enumerate_hist(size, hi, cur, all);
      for (auto& h : all) {
        std::int64_t total = 0;
        for (auto c : h) total += c;
        if (total >= lo) out.emplace_back(std::move(h));
      }
      break;
    }
    case Kind::Graphs: {
      // Every graph whose node set is a subset of {0..size-1}.
      const int n = static_cast<int>(size);
      for (int nodes = 0; nodes < (1 << n); ++nodes) {
        std::vector<std::pair<int, int>> slots;
        for (int a = 0; a < n; ++a)
          for (int b = a + 1; b < n; ++b)
            if ((nodes >> a & 1) && (nodes >> b & 1)) slots.emplace_back(a, b);
        for (int edges = 0; edges < (1 << slots.size()); ++edges) {
          std::map<int, IntList> adj;
          for (int a = 0; a < n; ++a)
            if (nodes >> a & 1) adj[a];
          for (std::size_t k = 0; k < slots.size(); ++k) {
            if (edges >> k & 1) {
              adj[slots[k].first].push_back(slots[k].second);
              adj[slots[k].second].push_back(slots[k].first);
            }
          }
          MapEntries m;
          for (auto& [node, nb] : adj) {
            std::sort(nb.begin(), nb.end());
            m.emplace(Value(static_cast<std::int64_t>(node)), Value(nb));
          }
          out.emplace_back(std::move(m));
        }
      }
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string DomainSpec::str() const {
  auto n = [](std::int64_t v) { return std::to_string(v); };
  switch (kind) {
    case Kind::None: return "";
    case Kind::Interval: return "{" + n(lo) + ".." + n(hi) + "}";
    case Kind::Set: {
      std::string s = "{";
      for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + values[i].str();
      return s + "}";
    }
    case Kind::Lists: return "lists(" + n(min_len) + ".." + n(max_len) + ", {" + n(lo) + ".." + n(hi) + "})";
    case Kind::Histograms: return "histograms(" + n(size) + ", " + n(lo) + ".." + n(hi) + ")";
    case Kind::Graphs: return "graphs(" + n(size) + ")";
  }
  return "";
}

std::pair<std::string, int> split_tag(const std::string& name) {
  if (name.size() > 2 && name[name.size() - 2] == '_') {
    const char t = name.back();
    if (t == '1' || t == '2') return {name.substr(0, name.size() - 2), t - '0'};
  }
  return {name, 0};
}

std::string tagged(const std::string& name, int tag) { return name + "_" + std::to_string(tag); }

bool is_ghost(const std::string& name) { return name == kAlpha || name == kDelta; }

const VarDecl* Unit::find_var(const std::string& name) const {
  for (const auto& v : vars) {
    if (v.name == name) return &v;
  }
  const auto base = split_tag(name).first;
  if (base == name) return nullptr;
  for (const auto& v : vars) {
    if (v.name == base) return &v;
  }
  return nullptr;
}

const PredDecl* Unit::find_pred(const std::string& name) const {
  for (const auto& p : preds) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const RangeDecl* Unit::find_range(const std::string& name) const {
  for (const auto& r : ranges) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const RangeDecl& Unit::exp_range() const {
  if (ranges.size() != 1) throw Error("exponential mechanism needs exactly one declared range");
  return ranges.front();
}

bool Unit::is_target_program() const {
  bool target = false;
  walk(body, [&](const Cmd& c) { target = target || c.is_target_only(); });
  return target;
}

bool same(const Unit& a, const Unit& b) {
  if (a.vars.size() != b.vars.size() || a.ranges.size() != b.ranges.size() || a.preds.size() != b.preds.size())
    return false;
  for (std::size_t i = 0; i < a.vars.size(); ++i) {
    if (a.vars[i].name != b.vars[i].name || !(a.vars[i].type == b.vars[i].type) ||
        !(a.vars[i].domain == b.vars[i].domain))
      return false;
  }
  for (std::size_t i = 0; i < a.ranges.size(); ++i) {
    if (a.ranges[i].name != b.ranges[i].name || a.ranges[i].values != b.ranges[i].values) return false;
  }
  for (std::size_t i = 0; i < a.preds.size(); ++i) {
    if (a.preds[i].name != b.preds[i].name || a.preds[i].params != b.preds[i].params ||
        !same(a.preds[i].body, b.preds[i].body))
      return false;
  }
  if (a.target.has_value() != b.target.has_value()) return false;
  if (a.target && (!(a.target->eps == b.target->eps) || !(a.target->delta == b.target->delta))) return false;
  return same(a.pre, b.pre) && same(a.body, b.body);
}

}  // namespace dpsp
