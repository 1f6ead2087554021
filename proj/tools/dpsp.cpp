#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpsp/aprhl.hpp"
#include "dpsp/dpcheck.hpp"
#include "dpsp/interp.hpp"
#include "dpsp/parser.hpp"
#include "dpsp/pipeline.hpp"
#include "dpsp/pretty.hpp"
#include "dpsp/product.hpp"
#include "dpsp/smtlib.hpp"
#include "dpsp/target.hpp"

using namespace dpsp;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string file;
  std::vector<std::string> domains;
  std::vector<std::string> inputs;
  std::optional<double> eps, delta, tol;
  double tail_tol = 1e-9;
  std::size_t budget = 20'000'000;
  std::string smtlib;
  bool json = false;
  bool expand = false;
  std::string axioms;
  std::string adjacency = "custom";
  std::size_t samples = 0;
  std::uint64_t seed = 1;
};

std::pair<std::string, std::string> split_binding(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError(std::string(flag) + " expects name=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::map<std::string, DomainSpec> domain_overrides(const Flags& f) {
  std::map<std::string, DomainSpec> out;
  for (const auto& d : f.domains) {
    auto [name, spec] = split_binding(d, "--domain");
    out[name] = parse_domain(spec);
  }
  return out;
}

std::map<std::string, Value> input_values(const Flags& f) {
  std::map<std::string, Value> out;
  for (const auto& i : f.inputs) {
    auto [name, text] = split_binding(i, "--input");
    out[name] = parse_value(text);
  }
  return out;
}

Unit load(const Flags& f) {
  std::string text;
  try {
    text = read_file(f.file);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  Unit u = parse_unit(text);
  override_domains(u, domain_overrides(f));
  return u;
}

std::optional<AxiomSet> load_axioms(const Flags& f) {
  if (f.axioms.empty()) return std::nullopt;
  return AxiomSet::load(f.axioms);
}

void write_smtlib(const Flags& f, const std::string& script) {
  if (f.smtlib.empty()) return;
  std::ofstream out(f.smtlib);
  if (!out) throw UsageError("cannot write " + f.smtlib);
  out << script;
}

void print_obligation(const Obligation& o, bool with_formula) {
  std::cout << o.id << " [" << status_name(o.status) << "] " << o.rule;
  if (o.span.valid()) std::cout << " (" << o.span.str() << ")";
  std::cout << "\n";
  if (with_formula) std::cout << "    " << pretty(o.formula) << "\n";
  if (o.status == ObStatus::Falsified) {
    std::cout << "    counterexample:";
    for (const auto& [k, v] : o.counterexample) std::cout << " " << k << "=" << v.str();
    std::cout << "\n";
    if (!o.blame.empty()) std::cout << "    fails: " << o.blame << "\n";
  }
}

int cmd_parse(const Flags& f) {
  const Unit u = load(f);
  if (f.json) std::cout << json{{"ok", true}, {"program", pretty(u)}}.dump(2) << "\n";
  else std::cout << pretty(u);
  return kPass;
}

int cmd_typecheck(const Flags& f) {
  const Unit u = load(f);
  try {
    typecheck(u);
  } catch (const TypeErrors& e) {
    if (f.json) {
      json errs = json::array();
      for (const auto& d : e.diagnostics()) errs.push_back(d.str());
      std::cout << json{{"ok", false}, {"errors", errs}}.dump(2) << "\n";
    } else {
      for (const auto& d : e.diagnostics()) std::cerr << f.file << ":" << d.str() << "\n";
    }
    return kFail;
  }
  if (f.json) std::cout << json{{"ok", true}}.dump(2) << "\n";
  else std::cout << "ok\n";
  return kPass;
}

int cmd_product(const Flags& f) {
  const Unit u = load(f);
  typecheck(u);
  for (const auto& w : taint_check(u.body)) std::cerr << f.file << ":" << w.str() << " (warning)\n";
  const Unit p = product_unit(u);
  if (f.json) std::cout << json{{"product", pretty(p.body)}}.dump(2) << "\n";
  else std::cout << pretty(p.body) << "\n";
  return kPass;
}

VcSet product_vcs(const Unit& u, const AxiomSet* ax, Unit& prod) {
  typecheck(u);
  taint_check(u.body);
  prod = product_unit(u);
  return vcgen(prod, privacy_goal(prod, prod.body), ax);
}

int cmd_vcgen(const Flags& f) {
  Unit u = load(f);
  if (!u.target) throw Error("program declares no privacy target");
  const auto ax = load_axioms(f);
  Unit prod;
  VcSet vcs = product_vcs(u, ax ? &*ax : nullptr, prod);
  SmtOptions so;
  so.expand_quantifiers = f.expand;
  write_smtlib(f, emit_smtlib(prod, vcs.obligations, so));
  if (f.json) {
    json arr = json::array();
    for (const auto& o : vcs.obligations) arr.push_back(to_json(o));
    std::cout << json{{"obligations", arr}, {"unsound_extension", vcs.used_axioms}}.dump(2) << "\n";
  } else {
    for (const auto& o : vcs.obligations) print_obligation(o, true);
  }
  return kPass;
}

int cmd_falsify(const Flags& f) {
  Unit u = load(f);
  if (!u.target) throw Error("program declares no privacy target");
  const auto ax = load_axioms(f);
  Unit prod;
  VcSet vcs = product_vcs(u, ax ? &*ax : nullptr, prod);
  FalsifyConfig fc;
  fc.budget = f.budget;
  falsify_all(prod, vcs.obligations, fc);
  bool bad = false;
  for (const auto& o : vcs.obligations) bad |= o.status == ObStatus::Falsified;
  if (f.json) {
    json arr = json::array();
    for (const auto& o : vcs.obligations) arr.push_back(to_json(o));
    std::cout << json{{"obligations", arr}, {"falsified", bad}}.dump(2) << "\n";
  } else {
    for (const auto& o : vcs.obligations) print_obligation(o, false);
  }
  return bad ? kFail : kPass;
}

int cmd_verify(const Flags& f) {
  Unit u = load(f);
  const auto ax = load_axioms(f);
  VerifyOptions opt;
  opt.budget = f.budget;
  opt.axioms = ax ? &*ax : nullptr;
  opt.expand_quantifiers = f.expand;
  opt.eps = f.eps;
  opt.delta = f.delta;
  const VerifyReport r = verify(u, opt);
  write_smtlib(f, r.smtlib);
  if (f.json) {
    std::cout << to_json(r).dump(2) << "\n";
  } else {
    for (const auto& w : r.warnings) std::cerr << f.file << ":" << w.str() << " (warning)\n";
    for (const auto& o : r.obligations) print_obligation(o, false);
    if (r.failed && *r.failed == 0 && r.replay_bottom)
      std::cout << "replay of the counterexample on the product: BOTTOM at " << r.replay_span.str() << "\n";
    std::cout << verdict_line(r) << "\n";
    if (r.unsound_extension) std::cout << "UNSOUND-EXTENSION (custom mechanism axioms were assumed)\n";
  }
  return r.verified ? kPass : kFail;
}

int cmd_dpcheck(const Flags& f) {
  Unit u = load(f);
  typecheck(u);
  const double eps = f.eps ? *f.eps : (u.target ? u.target->eps.to_double() : throw UsageError("--eps required"));
  const double delta = f.delta ? *f.delta : (u.target ? u.target->delta.to_double() : 0.0);
  InterpConfig cfg;
  cfg.tail_tol = f.tail_tol;
  const auto pairs = adjacency_pairs(u, parse_adjacency(f.adjacency));
  if (pairs.empty()) std::cerr << "warning: no adjacent pairs enumerated\n";
  const DpReport r = dp_check(u, pairs, eps, delta, f.tol ? *f.tol : -1, cfg);
  if (f.json) {
    std::cout << to_json(r).dump(2) << "\n";
  } else {
    std::cout << "pairs checked: " << r.pairs_checked << "\n";
    std::cout << "max distance: " << format_real(r.max_distance) << " (eps " << format_real(eps) << ", delta "
              << format_real(delta) << ", tol " << format_real(r.tol) << ")\n";
    if (r.witness) std::cout << "witness: " << r.witness->first.str() << " / " << r.witness->second.str() << "\n";
    std::cout << (r.pass ? "PASS" : "FAIL") << "\n";
  }
  return r.pass ? kPass : kFail;
}

int cmd_run(const Flags& f) {
  Unit u = load(f);
  typecheck(u);
  InterpConfig cfg;
  cfg.tail_tol = f.tail_tol;
  const ValueDist d = output(u, initial_memory(u, input_values(f)), cfg);
  std::vector<Value> drawn;
  if (f.samples > 0) {
    std::mt19937_64 rng(f.seed);
    std::vector<Value> support;
    std::vector<double> weights;
    for (const auto& [v, p] : d) {
      support.push_back(v);
      weights.push_back(p);
    }
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    for (std::size_t i = 0; i < f.samples; ++i) drawn.push_back(support[pick(rng)]);
  }
  if (f.json) {
    json j{{"distribution", to_json(d)}, {"mass", d.total()}};
    if (!drawn.empty()) {
      json s = json::array();
      for (const auto& v : drawn) s.push_back(to_json(v));
      j["samples"] = s;
    }
    std::cout << j.dump(2) << "\n";
    return kPass;
  }
  std::cout << "support size: " << d.size() << ", total mass: " << format_real(d.total()) << "\n";
  std::vector<std::pair<double, Value>> top;
  for (const auto& [v, p] : d) top.emplace_back(p, v);
  std::stable_sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i < top.size() && i < 20; ++i)
    std::cout << top[i].second.str() << "\t" << format_real(top[i].first) << "\n";
  if (top.size() > 20) std::cout << "... (" << top.size() - 20 << " more; use --json for all)\n";
  for (const auto& v : drawn) std::cout << "sample " << v.str() << "\n";
  return kPass;
}

int cmd_run_target(const Flags& f) {
  Unit u = load(f);
  const auto ax = load_axioms(f);
  typecheck(u);
  Unit t = u.is_target_program() ? u : product_unit(u);
  TargetConfig tc;
  tc.budget = f.budget;
  tc.axioms = ax ? &*ax : nullptr;
  const TargetResult r = run_target(t, t.body, initial_target_memory(t, input_values(f)), tc);
  if (f.json) {
    json mems = json::array();
    for (const auto& m : r.memories) mems.push_back(to_json(m));
    json j{{"bottom", r.bottom}, {"memories", mems}, {"unsound_extension", r.used_axioms}};
    if (r.bottom) j["bottom_span"] = r.bottom_span.str(), j["reason"] = r.reason;
    std::cout << j.dump(2) << "\n";
  } else if (r.bottom) {
    std::cout << "BOTTOM at " << r.bottom_span.str() << ": " << r.reason << "\n";
  } else {
    std::cout << r.memories.size() << " final memories\n";
    std::size_t shown = 0;
    for (const auto& m : r.memories) {
      if (++shown > 20) {
        std::cout << "...\n";
        break;
      }
      std::cout << m.str() << "\n";
    }
  }
  return r.bottom ? kFail : kPass;
}

int cmd_aprhl(const Flags& f, const std::string& mode) {
  DerivationFile df;
  try {
    df = load_derivation(f.file);
  } catch (const DerivationError&) {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  override_domains(df.unit, domain_overrides(f));
  FalsifyConfig fc;
  fc.budget = f.budget;
  if (mode == "check") {
    const DerivationCheck c = check_derivation(df.unit, df.root, fc);
    if (f.json) {
      std::cout << to_json(c).dump(2) << "\n";
    } else {
      for (const auto& o : c.obligations) print_obligation(o, false);
      for (const auto& i : c.issues) std::cout << i.kind << " at " << i.path << ": " << i.message << "\n";
      std::cout << (c.ok ? "derivation OK" : "derivation REJECTED") << "\n";
    }
    return c.ok ? kPass : kFail;
  }
  CompiledTriple ct;
  try {
    ct = compile_to_hoare(df.unit, df.root, fc);
  } catch (const DerivationError& e) {
    if (f.json) std::cout << json{{"ok", false}, {"error", e.kind()}, {"message", e.message()}}.dump(2) << "\n";
    else std::cout << e.kind() << ": " << e.message() << "\n";
    return kFail;
  }
  falsify_all(ct.unit, ct.vcs.obligations, fc);
  write_smtlib(f, emit_smtlib(ct.unit, ct.vcs.obligations));
  bool bad = false;
  for (const auto& o : ct.vcs.obligations) bad |= o.status == ObStatus::Falsified;
  if (f.json) {
    json arr = json::array();
    for (const auto& o : ct.vcs.obligations) arr.push_back(to_json(o));
    std::cout << json{{"ok", !bad},
                      {"pre", pretty(ct.triple.pre)},
                      {"product", pretty(ct.triple.cmd)},
                      {"post", pretty(ct.triple.post)},
                      {"obligations", arr}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "{ " << pretty(ct.triple.pre) << " }\n" << pretty(ct.triple.cmd) << "\n{ " << pretty(ct.triple.post)
              << " }\n";
    for (const auto& o : ct.vcs.obligations) print_obligation(o, false);
    std::cout << (bad ? "compiled triple FALSIFIED" : "compiled triple passes the falsifier") << "\n";
  }
  return bad ? kFail : kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpsp: differential privacy by self-products"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML file with default flag values")->envname("DPSP_CONFIG");

  Flags f;
  app.add_option("--domain", f.domains, "Override a domain, name=spec (repeatable)")->allow_extra_args(false);
  app.add_option("--eps", f.eps, "Privacy epsilon (defaults to the program target)");
  app.add_option("--delta", f.delta, "Privacy delta (defaults to the program target)");
  app.add_option("--tol", f.tol, "dpcheck tolerance (default 10x the tail tolerance)");
  app.add_option("--tail-tol", f.tail_tol, "Laplace truncation tail bound")->capture_default_str();
  app.add_option("--budget", f.budget, "Search budget for the falsifier and the target interpreter")
      ->capture_default_str();
  app.add_option("--smtlib", f.smtlib, "Write the SMT-LIB script to this path");
  app.add_flag("--json", f.json, "JSON output");
  app.add_flag("--expand-quantifiers", f.expand, "Expand bounded quantifiers in SMT-LIB output");
  app.add_option("--axioms", f.axioms, "Custom mechanism specifications (JSON)");
  app.add_option("--adjacency", f.adjacency, "one-entry-pm1, add-remove-record, one-edge or custom")
      ->capture_default_str();
  app.add_option("--input", f.inputs, "Input binding name=value (repeatable)")->allow_extra_args(false);
  app.add_option("--samples", f.samples, "Draw samples from the output distribution");
  app.add_option("--seed", f.seed, "Sampling seed")->capture_default_str();

  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"parse", "typecheck", "product", "vcgen", "falsify", "verify", "dpcheck", "run", "run-target"}) {
    auto* s = app.add_subcommand(name);
    s->add_option("file", f.file, "Program file")->required();
    subs[name] = s;
  }
  auto* aprhl = app.add_subcommand("aprhl", "Check or compile an apRHL derivation");
  aprhl->require_subcommand(1);
  for (const char* name : {"check", "compile"}) {
    auto* s = aprhl->add_subcommand(name);
    s->add_option("file", f.file, "Derivation file (JSON)")->required();
    subs[std::string("aprhl-") + name] = s;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (subs["parse"]->parsed()) return cmd_parse(f);
    if (subs["typecheck"]->parsed()) return cmd_typecheck(f);
    if (subs["product"]->parsed()) return cmd_product(f);
    if (subs["vcgen"]->parsed()) return cmd_vcgen(f);
    if (subs["falsify"]->parsed()) return cmd_falsify(f);
    if (subs["verify"]->parsed()) return cmd_verify(f);
    if (subs["dpcheck"]->parsed()) return cmd_dpcheck(f);
    if (subs["run"]->parsed()) return cmd_run(f);
    if (subs["run-target"]->parsed()) return cmd_run_target(f);
    if (subs["aprhl-check"]->parsed()) return cmd_aprhl(f, "check");
    if (subs["aprhl-compile"]->parsed()) return cmd_aprhl(f, "compile");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const TypeErrors& e) {
    for (const auto& d : e.diagnostics()) std::cerr << f.file << ":" << d.str() << "\n";
    return kFail;
  } catch (const DerivationError& e) {
    std::cerr << f.file << ": " << e.kind() << ": " << e.message() << "\n";
    return kFail;
  } catch (const Error& e) {
    std::cerr << f.file << ":" << (e.span().valid() ? e.span().str() + ":" : "") << " error: " << e.message() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
