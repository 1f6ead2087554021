#pragma once

#include <string>
#include <vector>

#include "dpsp/ast.hpp"

namespace dpsp::testing {

/// Flat statement outline of a target command: assignment targets, asserts,
/// mechanism pairs with their outputs, and block structure.
std::vector<std::string> skeleton(const CmdPtr& c);

/// Outlines transcribed by hand from the published smartsum and MWEM products and the
/// introductory example. The ghost initialization line is left out (it belongs to the goal's
/// precondition here), and smartsum's loop body ends with the re-synchronizing assert that
/// the product construction emits for every loop.
std::vector<std::string> expected_smartsum_skeleton();
std::vector<std::string> expected_mwem_skeleton();
std::vector<std::string> expected_intro_skeleton();

}  // namespace dpsp::testing
