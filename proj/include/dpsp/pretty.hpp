#pragma once

#include <string>

#include "dpsp/ast.hpp"

namespace dpsp {

/// Canonical concrete syntax; parse(pretty(x)) reproduces x structurally.
std::string pretty(const ExprPtr& e);
std::string pretty(const CmdPtr& c, int indent = 0);
std::string pretty(const Unit& u);
std::string pretty(const QDomain& d);

}  // namespace dpsp
