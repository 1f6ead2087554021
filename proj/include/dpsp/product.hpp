#pragma once

#include <vector>

#include "dpsp/ast.hpp"
#include "dpsp/typecheck.hpp"

namespace dpsp {

/// Tags every free program variable of e; quantifier-bound names are left alone.
ExprPtr rename(const ExprPtr& e, int tag);

/// Synchronized self-product: duplicated deterministic code, paired mechanism calls, branch asserts.
CmdPtr self_product(const CmdPtr& c);
/// The whole program as a target unit (same declarations, product body).
Unit product_unit(const Unit& u);

class TaintError : public Error {
 public:
  using Error::Error;
};

/// Rejects loops whose guard reads a noise-influenced variable. Noisy if-guards only warn.
std::vector<Diagnostic> taint_check(const CmdPtr& c);

}  // namespace dpsp
