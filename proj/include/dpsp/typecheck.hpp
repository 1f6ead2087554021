#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpsp/ast.hpp"
#include "dpsp/builtins.hpp"

namespace dpsp {

struct Diagnostic {
  std::string message;
  Span span;
  std::string str() const { return (span.valid() ? span.str() + ": " : "") + message; }
};

class TypeErrors : public Error {
 public:
  explicit TypeErrors(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

struct TypedUnit {
  const Unit* unit = nullptr;
  std::unordered_map<const Expr*, Type> types;
  std::optional<Type> return_type;
  const Type* type_of(const ExprPtr& e) const;
};

/// Lenient assignability: int flows into real, maps check pointwise.
bool assignable(const Type& to, const Type& from);
/// Type of a literal value.
Type type_of_value(const Value& v);

using TypeScope = std::function<std::optional<Type>(const std::string&)>;

/// Types an expression in isolation; throws TypeErrors on the first problem.
Type infer_type(const ExprPtr& e, const TypeScope& scope, const Unit* unit,
                const Registry& reg = Registry::standard());

/// Scope over tagged copies, ghosts and return variables of a unit.
TypeScope relational_scope(const Unit& u, std::optional<Type> return_type);

/// Checks a source or target program; throws TypeErrors listing every problem found.
TypedUnit typecheck(const Unit& u, const Registry& reg = Registry::standard());

}  // namespace dpsp
