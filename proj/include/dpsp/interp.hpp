#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpsp/ast.hpp"
#include "dpsp/dist.hpp"
#include "dpsp/eval.hpp"

namespace dpsp {

struct InterpConfig {
  /// Truncation tolerance: the Laplace window must push the analytic tail below it.
  double tail_tol = 1e-9;
  /// Fixed Laplace window (half-width); checked against tail_tol.
  std::optional<std::int64_t> window;
  /// Loop-guard evaluations allowed across one run, counted per support point.
  std::size_t iteration_cap = 1'000'000;
  /// Reset variables that are dead after each statement so equivalent memories merge.
  bool project_dead = false;
};

/// Smallest half-width W with 2*exp(-W*eps/2) < tau.
std::int64_t min_window(double eps, double tau);
/// Analytic tail bound 2*exp(-T*eps/2) for the discrete Laplace.
double lap_tail_bound(double eps, double t);

/// Discrete Laplace truncated to center +- window, mass proportional to exp(-eps*|r-center|/2).
ValueDist lap_dist(double eps, std::int64_t center, std::int64_t window);
/// Same, but rejects a window whose tail bound is not below tau.
ValueDist lap_dist(double eps, std::int64_t center, std::int64_t window, double tau);
/// Exponential mechanism over range, mass proportional to exp(eps*score(input, r)/2).
ValueDist exp_dist(double eps, const Value& score, const Value& input, const std::vector<Value>& range);

/// Zero value of a type (0, 0.0, false, [], empty map).
Value default_value(const Type& t);
/// Memory over the declared non-ghost variables; unspecified ones get their default.
Memory initial_memory(const Unit& u, const std::map<std::string, Value>& inputs);

/// Live-variable sets after every statement of a command, keyed by node.
class Liveness {
 public:
  Liveness(const CmdPtr& c, std::set<std::string> live_out);
  const std::set<std::string>* after(const Cmd* c) const;
  const std::set<std::string>& entry() const { return entry_; }

 private:
  std::set<std::string> visit(const CmdPtr& c, const std::set<std::string>& out);
  std::unordered_map<const Cmd*, std::set<std::string>> after_;
  std::set<std::string> entry_;
};

/// Exact output distribution over memories.
MemDist interpret(const Unit& u, const CmdPtr& c, const MemDist& in, const InterpConfig& cfg = {},
                  const Registry& reg = Registry::standard());
MemDist interpret(const Unit& u, const CmdPtr& c, const Memory& m, const InterpConfig& cfg = {},
                  const Registry& reg = Registry::standard());

/// Distribution of the returned value of the whole program. Dead variables are projected away.
ValueDist output(const Unit& u, const Memory& m, InterpConfig cfg = {}, const Registry& reg = Registry::standard());

/// Splits a program body into the commands before its tail return and the returned expression(s).
std::pair<CmdPtr, CmdPtr> split_return(const CmdPtr& body);

}  // namespace dpsp
