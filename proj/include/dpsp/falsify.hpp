#pragma once

#include <map>
#include <string>
#include <vector>

#include "dpsp/ast.hpp"
#include "dpsp/builtins.hpp"
#include "dpsp/logic.hpp"

namespace dpsp {

using Domains = std::map<std::string, std::vector<Value>>;

struct FalsifyConfig {
  /// Most partial assignments the search may visit.
  std::size_t budget = 20'000'000;
  /// Overrides, keyed by base or tagged name; consulted before declarations.
  const Domains* domains = nullptr;
  const Registry* reg = &Registry::standard();
};

struct FalsifyResult {
  bool valid = true;
  std::map<std::string, Value> counterexample;
  std::string blame;
  Span blame_span;
  std::size_t checked = 0;
};

class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// Grids for the ghost variables, derived from the mechanism parameters and the privacy target.
Domains ghost_domains(const Unit& u);

/// Searches the finite domains of the free variables of f for an assignment making f false.
FalsifyResult falsify(const Unit& u, const ExprPtr& f, const FalsifyConfig& cfg = {});

/// Runs falsify on each obligation and records status, counterexample and blame.
void falsify_all(const Unit& u, std::vector<Obligation>& obs, const FalsifyConfig& cfg = {});

}  // namespace dpsp
