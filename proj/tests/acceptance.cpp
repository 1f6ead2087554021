// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "dpsp/aprhl.hpp"
#include "dpsp/dpcheck.hpp"
#include "dpsp/interp.hpp"
#include "dpsp/pipeline.hpp"
#include "dpsp/pretty.hpp"
#include "dpsp/product.hpp"
#include "properties.hpp"
#include "skeleton.hpp"
#include "support.hpp"

using namespace dpsp;
using namespace dpsp::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(4) << x;
  return os.str();
}

bool verified_clean(const VerifyReport& r) {
  if (!r.verified) return false;
  for (const auto& o : r.obligations)
    if (o.status == ObStatus::Falsified) return false;
  return true;
}

Outcome products() {
  Outcome o;
  const std::pair<const char*, std::vector<std::string> (*)()> cases[] = {
      {"smartsum", expected_smartsum_skeleton}, {"mwem", expected_mwem_skeleton}, {"intro", expected_intro_skeleton}};
  for (const auto& [name, expected] : cases) {
    const Unit p = product_unit(load_corpus(std::string(name) + ".pwhile"));
    o.require(skeleton(p.body) == expected(), std::string(name) + " outline differs");
    const std::string golden = read_file(corpus_path(std::string("golden/") + name + ".product"));
    o.require(pretty(p.body) + "\n" == golden, std::string(name) + " golden differs");
  }
  if (o.pass) o.detail = "smartsum, MWEM and intro products match their outlines and goldens";
  return o;
}

Outcome smartsum_verify() {
  Outcome o;
  const VerifyReport r = verify(load_corpus("smartsum.pwhile"));
  o.require(verified_clean(r), "not verified");
  o.require(r.eps == 2.0 && r.delta == 0.0, "bound is not (2, 0)");
  o.detail = o.pass ? std::to_string(r.obligations.size()) + " obligations, bound 2" : o.detail;
  return o;
}

Outcome smartsum_dpcheck() {
  Outcome o;
  const Unit u = load_corpus("smartsum.pwhile");
  const DpReport r = dp_check(u, adjacency_pairs(u, Adjacency::OneEntryPm1), 2.0, 0.0);
  o.require(r.tol <= 1e-8, "tol above 1e-8");
  o.require(r.pass && r.max_distance <= r.tol, "max distance " + fmt(r.max_distance) + " > tol");
  if (o.pass) o.detail = std::to_string(r.pairs_checked) + " pairs, max " + fmt(r.max_distance) + ", tol " + fmt(r.tol);
  return o;
}

Outcome mwem() {
  Outcome o;
  const Unit u = load_corpus("mwem.pwhile");
  const VerifyReport v = verify(u);
  o.require(verified_clean(v), "not verified");
  o.require(std::fabs(v.eps - 0.4) < 1e-12 && v.delta == 0.0, "bound is not 0.4");
  const DpReport r = dp_check(u, adjacency_pairs(u, Adjacency::Custom), 0.4, 0.0);
  o.require(r.pass, "max distance " + fmt(r.max_distance) + " > tol");
  if (o.pass) o.detail = std::to_string(r.pairs_checked) + " pairs, max " + fmt(r.max_distance);
  return o;
}

Outcome ptr() {
  Outcome o;
  const Unit u = load_corpus("ptr.pwhile");
  const VerifyReport v = verify(u);
  o.require(verified_clean(v), "not verified");
  o.require(v.eps == 1.0 && std::fabs(v.delta - 0.1) < 1e-12, "bound is not (1, 0.1)");
  bool accuracy_used = false;
  walk(u.body, [&](const Cmd& c) {
    if (const auto* l = c.as<Cmd::Lap>()) accuracy_used |= l->spec.accuracy;
  });
  o.require(accuracy_used, "no accuracy spec at the Laplace call");
  const DpReport r = dp_check(u, adjacency_pairs(u, Adjacency::Custom), 1.0, 0.1);
  o.require(r.pass, "max distance " + fmt(r.max_distance) + " > delta + tol");
  o.require(!dti_spec_violation(u.find_var("d")->domain).has_value(), "distance to instability spec violated");
  if (o.pass) o.detail = std::to_string(r.pairs_checked) + " pairs, max " + fmt(r.max_distance) + " <= 0.1 + tol";
  return o;
}

double subset_max(const std::vector<double>& a, const std::vector<double>& b, double eps) {
  double best = 0;
  const double k = std::exp(eps);
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    double pa = 0, pb = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask & (1u << i)) pa += a[i], pb += b[i];
    best = std::max(best, pa - k * pb);
  }
  return best;
}

Outcome greedy_oracle() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0, 1);
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    const int points = std::uniform_int_distribution<int>(1, 12)(rng);
    ValueDist::Points w1, w2;
    for (int i = 0; i < points; ++i) {
      if (unit(rng) < 0.85) w1[Value(i)] = unit(rng);
      if (unit(rng) < 0.85) w2[Value(i)] = unit(rng);
    }
    w1[Value(0)] += 1e-3;
    w2[Value(points - 1)] += 1e-3;
    const ValueDist a = ValueDist::normalize(w1), b = ValueDist::normalize(w2);
    std::vector<double> va, vb;
    for (int i = 0; i < points; ++i) va.push_back(a.mass(Value(i))), vb.push_back(b.mass(Value(i)));
    for (double eps : {0.0, 0.1, 1.0}) worst = std::max(worst, std::fabs(eps_distance(a, b, eps) - subset_max(va, vb, eps)));
  }
  o.require(worst <= 1e-12, "greedy and subset maximum differ by " + fmt(worst));
  if (o.pass) o.detail = "3000 comparisons, worst gap " + fmt(worst);
  return o;
}

Outcome mechanisms() {
  Outcome o;
  // (a) pointwise Laplace ratios.
  for (double eps : {0.5, 1.0}) {
    const auto w = min_window(eps, 1e-9);
    for (int k = 0; k <= 3; ++k) {
      const ValueDist a = lap_dist(eps, 0, w), b = lap_dist(eps, k, w);
      for (const auto& [r, p] : a) {
        const double q = b.mass(r);
        if (q > 0 && p / q > std::exp(k * eps) + 1e-9) o.require(false, "Laplace ratio above bound at " + r.str());
        if (q > 0 && q / p > std::exp(k * eps) + 1e-9) o.require(false, "Laplace ratio above bound at " + r.str());
      }
    }
  }
  // (b) tail bound.
  for (double eps : {0.5, 1.0, 2.0})
    for (int t : {5, 10, 20}) {
      const TailCheck tc = tail_check(eps, t, min_window(eps, 1e-9));
      o.require(tc.pass, "tail check eps " + fmt(eps) + " T " + std::to_string(t));
    }
  // (c) exponential mechanism ratios on random score tables over a 4-element range.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> sc(-3, 3);
  const std::vector<Value> range{Value(0), Value(1), Value(2), Value(3)};
  for (int n = 0; n < 500; ++n) {
    MapEntries rows;
    for (int input = 0; input < 2; ++input) {
      MapEntries row;
      for (const auto& r : range) row[r] = Value(sc(rng));
      rows[Value(input)] = Value(row);
    }
    const Value score(rows);
    const double eps = std::uniform_real_distribution<double>(0.05, 2)(rng);
    const ValueDist a = exp_dist(eps, score, Value(0), range), b = exp_dist(eps, score, Value(1), range);
    double gap = 0;
    for (const auto& r : range)
      gap = std::max(gap, std::fabs(score_at(score, Value(0), r).as_real() - score_at(score, Value(1), r).as_real()));
    for (const auto& r : range)
      if (a.mass(r) / b.mass(r) > std::exp(eps * gap) + 1e-9) o.require(false, "exponential ratio above bound");
  }
  if (o.pass) o.detail = "Laplace k<=3, tails, 500 exponential tables";
  return o;
}

Outcome aprhl() {
  Outcome o;
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_path("derivations"))) {
    if (entry.path().extension() != ".json") continue;
    const std::string name = entry.path().stem().string();
    const DerivationFile f = load_derivation(entry.path().string());
    if (name == "gwhile") {
      std::string kind;
      try {
        compile_to_hoare(f.unit, f.root);
      } catch (const DerivationError& e) {
        kind = e.kind();
      }
      o.require(kind == "unsupported-rule", "generalized loop rule was not rejected");
      o.require(!check_derivation(f.unit, f.root).ok, "generalized loop rule passed the checker");
      continue;
    }
    ++n;
    o.require(check_derivation(f.unit, f.root).ok, name + " does not check");
    CompiledTriple t = compile_to_hoare(f.unit, f.root);
    falsify_all(t.unit, t.vcs.obligations);
    for (const auto& ob : t.vcs.obligations)
      o.require(ob.status != ObStatus::Falsified, name + " compiled " + ob.id + " falsified");
  }
  o.require(n >= 10, "expected intro, loop3 and one derivation per core rule");
  if (o.pass) o.detail = std::to_string(n) + " derivations checked and compiled; generalized rule rejected";
  return o;
}

Outcome negatives() {
  Outcome o;
  const VerifyReport under = verify(load_corpus("negative/smartsum_undercount.pwhile"));
  o.require(!under.verified && under.failed, "undercount verified");
  if (under.failed) {
    const Obligation& ob = under.obligations[*under.failed];
    // The label marks the __alpha conjunct of the goal.
    o.require(ob.blame.find(kLabelAlpha) != std::string::npos, "undercount not blamed on the __alpha budget");
  }
  const VerifyReport desync = verify(load_corpus("negative/desync.pwhile"));
  o.require(!desync.verified && desync.replay_bottom, "desync has no assert-bottom counterexample");
  if (desync.failed)
    o.require(desync.obligations[*desync.failed].blame.find("assert") != std::string::npos, "desync blame is not an assert");
  const Unit broken = load_corpus("negative/smartsum_broken.pwhile");
  const DpReport r = dp_check(broken, adjacency_pairs(broken, Adjacency::OneEntryPm1), 2.0, 0.0);
  o.require(!r.pass && r.max_distance > r.tol, "broken smartsum passes dpcheck");
  if (o.pass) o.detail = "undercount and desync rejected; broken smartsum distance " + fmt(r.max_distance);
  return o;
}

Outcome properties() {
  Outcome o;
  const std::pair<const char*, PropertyResult (*)(std::size_t, std::uint64_t)> suites[] = {
      {"monad laws", monad_laws},
      {"substitution lemma", substitution_lemma},
      {"Hoare consistency", hoare_consistency},
      {"distance monotonicity", eps_distance_monotone},
      {"ghost monotonicity", ghost_monotonicity}};
  std::uint64_t seed = 1000;
  for (const auto& [name, run] : suites) {
    const PropertyResult r = run(500, ++seed);
    o.require(r.cases >= 500 && r.ok(), std::string(name) + ": " + r.first_failure);
  }
  if (o.pass) o.detail = "5 suites x 500 cases";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{{1, 1, products},         {2, 30, smartsum_verify}, {3, 60, smartsum_dpcheck},
                                   {4, 60, mwem},            {5, 60, ptr},             {6, 30, greedy_oracle},
                                   {7, 10, mechanisms},      {8, 30, aprhl},           {9, 60, negatives},
                                   {10, 60, properties}};
  int failed = 0;
  for (const auto& c : all) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.limit_s, "took " + fmt(secs) + " s, limit " + fmt(c.limit_s) + " s");
    failed += !o.pass;
    std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << " (" << std::fixed
              << std::setprecision(2) << secs << " s) " << o.detail << std::endl;
    std::cout.unsetf(std::ios::fixed);
  }
  return failed == 0 ? 0 : 1;
}
