#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpsp/ast.hpp"
#include "dpsp/falsify.hpp"
#include "dpsp/logic.hpp"

namespace dpsp {

/// pre ⊢ c1 ~(eps, delta) c2 ⊣ post, with formulas over tagged variables.
struct Judgment {
  ExprPtr pre;
  CmdPtr c1, c2;
  ExprPtr post;
  ExprPtr eps, delta;
};

struct Derivation {
  std::string rule;
  nlohmann::json params = nlohmann::json::object();
  Judgment judgment;
  std::vector<Derivation> children;
};

class DerivationError : public Error {
 public:
  DerivationError(std::string kind, const std::string& what, Span s = {}) : Error(what, s), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

/// Judgments give either "cmd" (renamed to both sides) or "c1" and "c2".
Derivation derivation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Derivation& d);

/// A derivation file names the program whose declarations it uses.
struct DerivationFile {
  Unit unit;
  Derivation root;
};
DerivationFile load_derivation(const std::string& path);

struct DerivationIssue {
  std::string kind;  // arity-mismatch, cost-mismatch, rule-violation, side-condition, unsupported-rule
  std::string path;
  std::string message;
};

struct DerivationCheck {
  bool ok = true;
  std::vector<DerivationIssue> issues;
  /// Side conditions of the rule instances, already run through the falsifier.
  std::vector<Obligation> obligations;
};

nlohmann::json to_json(const DerivationCheck& c);

DerivationCheck check_derivation(const Unit& u, const Derivation& d, const FalsifyConfig& cfg = {});

/// Tags every program variable of a source command.
CmdPtr rename_cmd(const CmdPtr& c, int tag);

struct CompiledTriple {
  /// Declarations of the program with the annotated self-product as body.
  Unit unit;
  /// The untagged command, loops annotated from the derivation's while instances.
  CmdPtr source;
  HoareTriple triple;
  VcSet vcs;
};

/// {pre and __alpha = 0 and __delta = 0} product {post and __alpha <= eps and __delta <= delta}.
/// Throws DerivationError for rules outside the core set or a derivation that does not check.
CompiledTriple compile_to_hoare(const Unit& u, const Derivation& d, const FalsifyConfig& cfg = {});

}  // namespace dpsp
