#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dpsp/ast.hpp"
#include "dpsp/dist.hpp"
#include "dpsp/interp.hpp"

namespace dpsp {

/// Sum over the support of max(0, a(x) - exp(eps) * b(x)); equals the max over output sets.
double eps_distance(const ValueDist& a, const ValueDist& b, double eps);

enum class Adjacency { OneEntryPm1, AddRemoveRecord, OneEdge, Custom };
Adjacency parse_adjacency(const std::string& name);
const char* adjacency_name(Adjacency a);

/// Base relations on database values.
bool one_entry_pm1(const Value& a, const Value& b);
bool add_remove_record(const Value& a, const Value& b);
bool one_edge(const Value& a, const Value& b);

using MemoryPair = std::pair<Memory, Memory>;

/// Input pairs over the free variables of the precondition, restricted by `kind` on the
/// database variable and always filtered by the precondition itself.
std::vector<MemoryPair> adjacency_pairs(const Unit& u, Adjacency kind, std::size_t limit = 1'000'000);

struct DpReport {
  std::size_t pairs_checked = 0;
  double max_distance = 0;
  std::optional<MemoryPair> witness;
  double eps = 0, delta = 0, tol = 0;
  bool pass = true;
};

nlohmann::json to_json(const DpReport& r);

/// Checks eps_distance <= delta + tol in both directions on every pair. A negative tol
/// selects the default of ten times the interpreter's tail tolerance.
DpReport dp_check(const Unit& u, const std::vector<MemoryPair>& pairs, double eps, double delta, double tol = -1,
                  const InterpConfig& cfg = {});

struct TailCheck {
  double measured = 0;
  double bound = 0;
  bool pass = false;
};

/// Mass of lap_dist(eps, 0, window) outside [-t, t] against 2*exp(-t*eps/2).
TailCheck tail_check(double eps, std::int64_t t, std::int64_t window);

/// For every adjacent pair of histograms in the domain: equal medians, or distance 0 on both.
/// Returns the first violating pair, if any.
std::optional<std::pair<Value, Value>> dti_spec_violation(const DomainSpec& histograms);

}  // namespace dpsp
