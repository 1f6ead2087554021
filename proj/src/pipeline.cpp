#include "dpsp/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpsp/parser.hpp"
#include "dpsp/product.hpp"
#include "dpsp/smtlib.hpp"
#include "dpsp/target.hpp"

namespace dpsp {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void override_domains(Unit& u, const std::map<std::string, DomainSpec>& overrides) {
  for (const auto& [name, d] : overrides) {
    bool found = false;
    for (auto& v : u.vars)
      if (v.name == name) {
        v.domain = d;
        found = true;
      }
    if (!found) throw Error("--domain names undeclared variable '" + name + "'");
  }
}

Unit load_unit(const std::string& path, const std::map<std::string, DomainSpec>& overrides) {
  Unit u = parse_unit(read_file(path));
  override_domains(u, overrides);
  return u;
}

namespace {

std::string num(double x) {
  std::string s = format_real(x);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  return s;
}

}  // namespace

VerifyReport verify(const Unit& src, const VerifyOptions& opt) {
  VerifyReport r;
  Unit u = src;
  if (!u.target) u.target = PrivacyTarget{};
  auto rational = [](double x) { return Rational::of(std::llround(x * 1e9), 1'000'000'000); };
  if (opt.eps) u.target->eps = rational(*opt.eps);
  if (opt.delta) u.target->delta = rational(*opt.delta);
  r.eps = u.target->eps.to_double();
  r.delta = u.target->delta.to_double();

  typecheck(u);
  r.warnings = taint_check(u.body);
  const Unit prod = product_unit(u);
  const HoareTriple goal = privacy_goal(prod, prod.body);
  VcSet vcs = vcgen(prod, goal, opt.axioms);
  r.unsound_extension = vcs.used_axioms;

  FalsifyConfig fc;
  fc.budget = opt.budget;
  falsify_all(prod, vcs.obligations, fc);
  r.obligations = std::move(vcs.obligations);
  for (std::size_t i = 0; i < r.obligations.size(); ++i)
    if (r.obligations[i].status == ObStatus::Falsified) {
      r.failed = i;
      break;
    }

  SmtOptions so;
  so.expand_quantifiers = opt.expand_quantifiers;
  r.smtlib = emit_smtlib(prod, r.obligations, so);
  for (auto& ob : r.obligations)
    if (ob.status == ObStatus::Unverified) ob.status = ObStatus::Exported;

  if (r.failed && *r.failed == 0) {
    // The entry obligation speaks about initial memories, so its counterexample can be replayed.
    std::map<std::string, Value> inputs;
    const Memory probe = initial_target_memory(prod, {});
    for (const auto& [k, v] : r.obligations[0].counterexample)
      if (probe.has(k) && !is_ghost(k)) inputs[k] = v;
    TargetConfig tc;
    tc.axioms = opt.axioms;
    tc.budget = opt.budget;
    try {
      const TargetResult tr = run_target(prod, prod.body, initial_target_memory(prod, inputs), tc);
      r.replay_bottom = tr.bottom;
      r.replay_span = tr.bottom_span;
    } catch (const Error&) {
      // Replay is diagnostic only.
    }
  }
  r.verified = !r.failed;
  return r;
}

std::string verdict_line(const VerifyReport& r) {
  if (r.verified) return "DP(" + num(r.eps) + ", " + num(r.delta) + ") VERIFIED (modulo exported obligations)";
  const Obligation& ob = r.obligations.at(*r.failed);
  const Span s = ob.blame_span.valid() ? ob.blame_span : ob.span;
  return "FALSIFIED at " + (s.valid() ? s.str() : std::string("<entry>"));
}

nlohmann::json to_json(const VerifyReport& r) {
  nlohmann::json j;
  j["verdict"] = verdict_line(r);
  j["verified"] = r.verified;
  j["eps"] = r.eps;
  j["delta"] = r.delta;
  j["unsound_extension"] = r.unsound_extension;
  j["warnings"] = nlohmann::json::array();
  for (const auto& w : r.warnings) j["warnings"].push_back(w.str());
  j["obligations"] = nlohmann::json::array();
  for (const auto& o : r.obligations) j["obligations"].push_back(to_json(o));
  if (r.failed && *r.failed == 0) {
    j["replay"] = {{"bottom", r.replay_bottom}, {"span", r.replay_span.valid() ? r.replay_span.str() : ""}};
  }
  return j;
}

}  // namespace dpsp
