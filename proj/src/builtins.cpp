#include "dpsp/builtins.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace dpsp {

Value Builtin::operator()(const std::vector<Value>& args) const {
  if (args.size() != params.size())
    throw EvalError(name + " expects " + std::to_string(params.size()) + " arguments");
  return fn(args);
}

Registry::Registry(const Registry& other) {
  std::lock_guard lock(other.mu_);
  table_ = other.table_;
}

void Registry::add(Builtin b) {
  std::lock_guard lock(mu_);
  if (table_.count(b.name)) throw Error("builtin '" + b.name + "' is already registered");
  auto name = b.name;
  table_.emplace(std::move(name), std::move(b));
}

const Builtin* Registry::find(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = table_.find(name);
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<std::string> Registry::names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [k, _] : table_) out.push_back(k);
  return out;
}

Registry& Registry::standard() {
  static Registry* reg = [] {
    auto* r = new Registry;
    register_standard_builtins(*r);
    return r;
  }();
  return *reg;
}

double accuracy_radius(double eps, double delta) {
  if (!(eps > 0) || !(delta > 0)) throw EvalError("acc needs positive eps and delta");
  return 2.0 * std::log(2.0 / delta) / eps;
}

std::int64_t hist_median(const IntList& hist) {
  std::vector<std::int64_t> elems;
  for (std::size_t b = 0; b < hist.size(); ++b)
    for (std::int64_t k = 0; k < hist[b]; ++k) elems.push_back(static_cast<std::int64_t>(b));
  if (elems.empty()) return 0;
  const auto n = elems.size();
  if (n % 2 == 1) return elems[n / 2];
  const auto s = elems[n / 2 - 1] + elems[n / 2];
  return s >= 0 ? s / 2 : -((-s + 1) / 2);
}

std::vector<IntList> hist_neighbors(const IntList& hist) {
  std::vector<IntList> out;
  for (std::size_t b = 0; b < hist.size(); ++b) {
    IntList up = hist;
    ++up[b];
    out.push_back(std::move(up));
    if (hist[b] > 0) {
      IntList down = hist;
      --down[b];
      out.push_back(std::move(down));
    }
  }
  return out;
}

std::int64_t dist_to_instability(const std::function<Value(const Value&)>& q,
                                 const std::function<std::vector<Value>(const Value&)>& neighbors, const Value& d,
                                 std::int64_t bound) {
  const Value answer = q(d);
  std::set<Value> seen{d};
  std::vector<Value> frontier{d};
  for (std::int64_t dist = 1; dist <= bound + 1; ++dist) {
    std::vector<Value> next;
    for (const auto& x : frontier) {
      for (auto& y : neighbors(x)) {
        if (!seen.insert(y).second) continue;
        if (!(q(y) == answer)) return dist - 1;
        next.push_back(std::move(y));
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return bound;
}

std::int64_t graph_edge_count(const Value& g) {
  std::int64_t deg = 0;
  for (const auto& [_, nb] : g.as_map()) deg += static_cast<std::int64_t>(nb.as_list().size());
  return deg / 2;
}

Value graph_remove_node(const Value& g, std::int64_t v) {
  MapEntries out;
  for (const auto& [k, nb] : g.as_map()) {
    if (k.as_int() == v) continue;
    IntList kept;
    for (auto x : nb.as_list())
      if (x != v) kept.push_back(x);
    out.emplace(k, Value(std::move(kept)));
  }
  return Value(std::move(out));
}

namespace {

std::set<std::pair<std::int64_t, std::int64_t>> edge_set(const Value& g) {
  std::set<std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& [k, nb] : g.as_map())
    for (auto x : nb.as_list()) out.emplace(std::min(k.as_int(), x), std::max(k.as_int(), x));
  return out;
}

std::set<std::int64_t> node_set(const Value& g) {
  std::set<std::int64_t> out;
  for (const auto& [k, _] : g.as_map()) out.insert(k.as_int());
  return out;
}

// Endpoints of the single edge in g1 missing from g2, if g1 = g2 + edge.
std::optional<std::pair<std::int64_t, std::int64_t>> extra_edge(const Value& g1, const Value& g2) {
  if (node_set(g1) != node_set(g2)) return std::nullopt;
  auto e1 = edge_set(g1), e2 = edge_set(g2);
  if (e1.size() != e2.size() + 1) return std::nullopt;
  std::vector<std::pair<std::int64_t, std::int64_t>> diff;
  std::set_difference(e1.begin(), e1.end(), e2.begin(), e2.end(), std::back_inserter(diff));
  if (diff.size() != 1) return std::nullopt;
  return diff.front();
}

double count_real(std::int64_t q, const Value& d) {
  double s = 0;
  for (const auto& [k, w] : d.as_map())
    if (k.as_int() <= q) s += w.as_real();
  return s;
}

std::int64_t count_hist(std::int64_t q, const IntList& h) {
  std::int64_t s = 0;
  for (std::size_t b = 0; b < h.size() && static_cast<std::int64_t>(b) <= q; ++b) s += h[b];
  return s;
}

constexpr int kMwemQueries = 2;
constexpr std::int64_t kDtiBound = 3;

}  // namespace

bool graph_plus_edge(const Value& g1, const Value& g2) { return extra_edge(g2, g1).has_value(); }

void register_standard_builtins(Registry& r) {
  const auto I = Type::integer(), R = Type::real(), B = Type::boolean(), L = Type::list();
  const auto G = Type::map(I, L);
  const auto W = Type::map(I, R);

  r.add({"nth", {L, I}, I, [](const auto& a) {
           const auto& l = a[0].as_list();
           const auto i = a[1].as_int();
           return Value(i >= 0 && i < static_cast<std::int64_t>(l.size()) ? l[static_cast<std::size_t>(i)] : 0);
         }});
  r.add({"sum", {L}, I, [](const auto& a) {
           std::int64_t s = 0;
           for (auto x : a[0].as_list()) s = checked_add(s, x);
           return Value(s);
         }});
  r.add({"acc", {R, R}, R, [](const auto& a) { return Value(accuracy_radius(a[0].as_real(), a[1].as_real())); }});
  r.add({"sqrt", {R}, R, [](const auto& a) { return Value(std::sqrt(std::max(0.0, a[0].as_real()))); }});
  r.add({"ln", {R}, R, [](const auto& a) {
           const double x = a[0].as_real();
           if (!(x > 0)) throw EvalError("ln of a non-positive number");
           return Value(std::log(x));
         }});

  // Histogram databases: list of per-bin counts.
  r.add({"median", {L}, I, [](const auto& a) { return Value(hist_median(a[0].as_list())); }});
  r.add({"DistToInstability", {L}, I, [](const auto& a) {
           auto q = [](const Value& d) { return Value(hist_median(d.as_list())); };
           auto nb = [](const Value& d) {
             std::vector<Value> out;
             for (auto& h : hist_neighbors(d.as_list())) out.emplace_back(std::move(h));
             return out;
           };
           return Value(dist_to_instability(q, nb, a[0], kDtiBound));
         }});
  r.add({"count", {I, L}, I, [](const auto& a) { return Value(count_hist(a[0].as_int(), a[1].as_list())); }});
  r.add({"count_real", {I, W}, R, [](const auto& a) { return Value(count_real(a[0].as_int(), a[1])); }});
  r.add({"mwem_score", {W, I}, Type::map(L, W), [](const auto& a) {
           // Score of query r against every 3-bin histogram with total <= n.
           const auto n = a[1].as_int();
           MapEntries table;
           for (std::int64_t x = 0; x <= n; ++x)
             for (std::int64_t y = 0; x + y <= n; ++y)
               for (std::int64_t z = 0; x + y + z <= n; ++z) {
                 IntList h{x, y, z};
                 MapEntries row;
                 for (std::int64_t q = 0; q < kMwemQueries; ++q)
                   row.emplace(Value(q), Value(std::fabs(count_real(q, a[0]) - static_cast<double>(count_hist(q, h)))));
                 table.emplace(Value(std::move(h)), Value(std::move(row)));
               }
           return Value(std::move(table));
         }});
  r.add({"update", {W, I, I}, W, [](const auto& a) {
           // One multiplicative-weights step toward the measured answer of query q.
           const auto& d = a[0];
           double total = 0;
           for (const auto& [_, w] : d.as_map()) total += w.as_real();
           if (!(total > 0)) return d;
           const auto q = a[2].as_int();
           const double measured = std::clamp(static_cast<double>(a[1].as_int()), 0.0, total);
           const double err = measured - count_real(q, d);
           MapEntries next;
           double z = 0;
           for (const auto& [k, w] : d.as_map()) {
             const double f = k.as_int() <= q ? std::exp(err / (2.0 * total)) : 1.0;
             z += w.as_real() * f;
             next.emplace(k, Value(w.as_real() * f));
           }
           MapEntries scaled;
           for (const auto& [k, w] : next) scaled.emplace(k, Value(w.as_real() * total / z));
           return Value(std::move(scaled));
         }});

  // Graphs: adjacency lists keyed by node.
  r.add({"edges", {G}, I, [](const auto& a) { return Value(graph_edge_count(a[0])); }});
  r.add({"nodes", {G}, I, [](const auto& a) { return Value(static_cast<std::int64_t>(a[0].as_map().size())); }});
  r.add({"remove_node", {G, I}, G, [](const auto& a) { return graph_remove_node(a[0], a[1].as_int()); }});
  r.add({"plus_edge", {G, G}, B, [](const auto& a) { return Value(graph_plus_edge(a[0], a[1])); }});
  r.add({"graph_adjacent", {G, G}, B, [](const auto& a) {
           return Value(a[0] == a[1] || graph_plus_edge(a[0], a[1]) || graph_plus_edge(a[1], a[0]));
         }});
  r.add({"on_extra_edge", {G, G, I}, B, [](const auto& a) {
           auto e = extra_edge(a[0], a[1]);
           const auto v = a[2].as_int();
           return Value(e.has_value() && (e->first == v || e->second == v));
         }});
}

}  // namespace dpsp
