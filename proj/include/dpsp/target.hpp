#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dpsp/ast.hpp"
#include "dpsp/axioms.hpp"
#include "dpsp/eval.hpp"

namespace dpsp {

struct TargetConfig {
  /// Most memories the enumeration may produce before giving up.
  std::size_t budget = 1'000'000;
  /// Domain overrides for nondeterministic choices, keyed by base or tagged name.
  const std::map<std::string, std::vector<Value>>* domains = nullptr;
  const AxiomSet* axioms = nullptr;
};

/// Either a failed assertion (bottom) or the set of final memories.
struct TargetResult {
  bool bottom = false;
  Span bottom_span;
  std::string reason;
  std::set<Memory> memories;
  bool used_axioms = false;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::size_t produced, Span s = {})
      : Error(what, s), produced_(produced) {}
  std::size_t produced() const { return produced_; }

 private:
  std::size_t produced_;
};

/// Memory holding x_1, x_2 for every declared variable plus the ghosts and return slots.
Memory initial_target_memory(const Unit& u, const std::map<std::string, Value>& inputs);

TargetResult run_target(const Unit& u, const CmdPtr& c, const Memory& m, const TargetConfig& cfg = {},
                        const Registry& reg = Registry::standard());

}  // namespace dpsp
