#pragma once

#include <string>
#include <vector>

#include "dpsp/builtins.hpp"
#include "dpsp/logic.hpp"

namespace dpsp {

struct SmtOptions {
  /// Replace bounded quantifiers by finite conjunctions/disjunctions over their domains.
  bool expand_quantifiers = false;
  const Registry* reg = &Registry::standard();
};

class SmtError : public Error {
 public:
  using Error::Error;
};

/// One (assert (not phi)) + (check-sat) per obligation, each in its own push/pop scope.
/// Lists become (Seq Int), maps become arrays, builtins are uninterpreted functions
/// (acc is folded to a constant) and user predicates are define-funs.
std::string emit_smtlib(const Unit& u, const std::vector<Obligation>& obs, const SmtOptions& opt = {});

/// Parsed shape of a script; reparse throws SmtError on malformed input.
struct SmtScript {
  std::size_t commands = 0;
  std::size_t asserts = 0;
  std::size_t check_sats = 0;
  std::vector<std::string> declared;
};

/// Checks balanced s-expressions, known command heads, and that every symbol
/// in an assertion is declared, defined, bound, or a theory symbol.
SmtScript reparse_smtlib(const std::string& text);

}  // namespace dpsp
