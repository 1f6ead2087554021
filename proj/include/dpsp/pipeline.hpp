#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dpsp/axioms.hpp"
#include "dpsp/falsify.hpp"
#include "dpsp/logic.hpp"
#include "dpsp/typecheck.hpp"

namespace dpsp {

std::string read_file(const std::string& path);

/// Parses a program file and replaces the domains named in `overrides`.
Unit load_unit(const std::string& path, const std::map<std::string, DomainSpec>& overrides = {});
void override_domains(Unit& u, const std::map<std::string, DomainSpec>& overrides);

struct VerifyOptions {
  std::size_t budget = 20'000'000;
  const AxiomSet* axioms = nullptr;
  bool expand_quantifiers = false;
  /// Overrides of the privacy target.
  std::optional<double> eps, delta;
};

struct VerifyReport {
  bool verified = false;
  bool unsound_extension = false;
  double eps = 0, delta = 0;
  std::vector<Diagnostic> warnings;
  std::vector<Obligation> obligations;
  /// First falsified obligation, if any.
  std::optional<std::size_t> failed;
  /// Replay of an entry counterexample on the product: a failed assert ends in bottom.
  bool replay_bottom = false;
  Span replay_span;
  std::string smtlib;
};

/// Typecheck, product, taint check, vcgen, falsification and SMT-LIB emission.
VerifyReport verify(const Unit& u, const VerifyOptions& opt = {});

/// "DP(eps, delta) VERIFIED (modulo exported obligations)" or "FALSIFIED at <span>".
std::string verdict_line(const VerifyReport& r);
nlohmann::json to_json(const VerifyReport& r);

}  // namespace dpsp
