#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dpsp/value.hpp"

namespace dpsp {

/// Deterministic function callable from expressions. An int argument is accepted where real is declared.
struct Builtin {
  std::string name;
  std::vector<Type> params;
  Type result;
  std::function<Value(const std::vector<Value>&)> fn;

  Value operator()(const std::vector<Value>& args) const;
};

class Registry {
 public:
  Registry() = default;
  Registry(const Registry& other);

  /// Throws on a duplicate name.
  void add(Builtin b);
  const Builtin* find(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Process-wide registry preloaded with the standard and example builtins.
  static Registry& standard();

 private:
  mutable std::mutex mu_;
  std::map<std::string, Builtin> table_;
};

void register_standard_builtins(Registry& r);

/// acc(eps, delta): accuracy radius T with 2*exp(-T*eps/2) = delta.
double accuracy_radius(double eps, double delta);

// Toy-domain helpers shared with dpcheck and tests.
std::int64_t hist_median(const IntList& hist);
/// Histograms one record away (a bin count +1 or -1), staying non-negative.
std::vector<IntList> hist_neighbors(const IntList& hist);
/// Distance to instability of q at d, by breadth-first search up to `bound` steps; capped at bound.
std::int64_t dist_to_instability(const std::function<Value(const Value&)>& q,
                                 const std::function<std::vector<Value>(const Value&)>& neighbors, const Value& d,
                                 std::int64_t bound);
/// Graph adjacency (map<int, list>) helpers.
std::int64_t graph_edge_count(const Value& g);
Value graph_remove_node(const Value& g, std::int64_t v);
/// True when g2 equals g1 plus one extra edge over the same node set.
bool graph_plus_edge(const Value& g1, const Value& g2);

}  // namespace dpsp
