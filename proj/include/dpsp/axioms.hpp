#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dpsp/ast.hpp"

namespace dpsp {

/// One case of a user-supplied relational spec for a custom mechanism.
/// Formulas may mention p_1/p_2 for each parameter p, the shared output `v`, and `eps`.
struct AxiomCase {
  std::string name;
  ExprPtr requires_;
  ExprPtr ensures;
  ExprPtr cost;
};

struct MechAxiom {
  std::string mechanism;
  std::vector<std::string> params;
  std::vector<AxiomCase> cases;
};

/// Specs for custom mechanisms. Using any of them makes a verdict unsound.
class AxiomSet {
 public:
  static AxiomSet from_json(const nlohmann::json& j);
  static AxiomSet load(const std::string& path);
  void add(MechAxiom m);
  const MechAxiom* find(const std::string& name) const;
  bool empty() const { return mechs_.empty(); }

 private:
  std::map<std::string, MechAxiom> mechs_;
};

inline constexpr const char* kAxiomOutput = "v";
inline constexpr const char* kAxiomEps = "eps";

}  // namespace dpsp
