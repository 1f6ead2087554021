#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dpsp/ast.hpp"
#include "dpsp/axioms.hpp"

namespace dpsp {

/// Simultaneous, capture-avoiding substitution of expressions for free variables.
ExprPtr subst(const ExprPtr& e, const std::map<std::string, ExprPtr>& s);
ExprPtr subst(const ExprPtr& e, const std::string& x, const ExprPtr& by);

struct HoareTriple {
  ExprPtr pre;
  CmdPtr cmd;
  ExprPtr post;
};

enum class ObStatus { Unverified, Falsified, GroundVerified, Exported };
const char* status_name(ObStatus s);

/// A formula that must be valid for the triple to hold, with the rule instance that produced it.
struct Obligation {
  std::string id;
  std::string rule;
  Span span;
  ExprPtr formula;
  ObStatus status = ObStatus::Unverified;
  std::map<std::string, Value> counterexample;
  std::string blame;
  Span blame_span;
  std::size_t assignments_checked = 0;
};

nlohmann::json to_json(const Obligation& ob);

class VcError : public Error {
 public:
  using Error::Error;
};

struct WpResult {
  ExprPtr pre;
  std::vector<Obligation> side;
  bool used_axioms = false;
};

/// Backward weakest precondition of a target command.
WpResult wp(const Unit& u, const CmdPtr& c, const ExprPtr& post, const AxiomSet* axioms = nullptr);

/// {pre and __alpha = 0 and __delta = 0} product {__out_1 = __out_2 and __alpha <= eps and __delta <= delta}.
HoareTriple privacy_goal(const Unit& u, const CmdPtr& product);

struct VcSet {
  std::vector<Obligation> obligations;
  bool used_axioms = false;
};

/// Entry implication pre => wp(cmd, post) followed by all side obligations, numbered in order.
VcSet vcgen(const Unit& u, const HoareTriple& t, const AxiomSet* axioms = nullptr);

/// Labels used in goal formulas.
inline constexpr const char* kLabelOutputs = "outputs equal";
inline constexpr const char* kLabelAlpha = "epsilon budget";
inline constexpr const char* kLabelDelta = "delta budget";

}  // namespace dpsp
