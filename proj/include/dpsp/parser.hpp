#pragma once

#include <string>

#include "dpsp/ast.hpp"

namespace dpsp {

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Parses a whole .pwhile file (header declarations followed by the body).
Unit parse_unit(const std::string& text);
ExprPtr parse_expr(const std::string& text);
/// bare_loops admits while loops without annotations (relational judgments carry their own).
CmdPtr parse_cmd(const std::string& text, bool bare_loops = false);
Type parse_type(const std::string& text);
/// Domain syntax of declarations: {lo..hi}, {v1, v2}, lists(..), histograms(..), graphs(n).
DomainSpec parse_domain(const std::string& text);
Value parse_value(const std::string& text);

}  // namespace dpsp
