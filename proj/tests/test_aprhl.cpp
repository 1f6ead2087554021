#include <filesystem>

#include <gtest/gtest.h>

#include "dpsp/aprhl.hpp"
#include "dpsp/pretty.hpp"
#include "support.hpp"

using namespace dpsp;
using namespace dpsp::testing;
using nlohmann::json;

namespace {

json judgment(const std::string& pre, const std::string& cmd, const std::string& post, const std::string& eps,
              const std::string& delta = "0") {
  return {{"pre", pre}, {"cmd", cmd}, {"post", post}, {"eps", eps}, {"delta", delta}};
}

json node(const std::string& rule, json j, json children = json::array()) {
  return {{"rule", rule}, {"judgment", std::move(j)}, {"children", std::move(children)}};
}

const char* const kFrame = "abs(a_1 - a_2) <= 1";
const char* const kFramed = "abs(a_1 - a_2) <= 1 && x_1 == x_2";

// Framed Laplace step weakened to the constant cost 0.5.
json weak_lap(const std::string& cmd, const std::string& pre) {
  return node("weak", judgment(pre, cmd, kFramed, "0.5"),
              {node("lap", judgment(kFrame, cmd, kFramed, "abs(a_1 - a_2) * 0.5"))});
}

Unit toy() { return load_corpus("derivations/toy.pwhile"); }

bool has_issue(const DerivationCheck& c, const std::string& kind) {
  for (const auto& i : c.issues)
    if (i.kind == kind) return true;
  return false;
}

}  // namespace

TEST(Derivation, LapRuleInstance) {
  const Derivation d = derivation_from_json(node("lap", judgment("true", "x := Lap[0.5](a)", "x_1 == x_2",
                                                                 "abs(a_1 - a_2) * 0.5")));
  EXPECT_TRUE(check_derivation(toy(), d).ok);
}

TEST(Derivation, LapRuleWrongCost) {
  const Derivation d =
      derivation_from_json(node("lap", judgment("true", "x := Lap[0.5](a)", "x_1 == x_2", "abs(a_1 - a_2) * 0.25")));
  EXPECT_FALSE(check_derivation(toy(), d).ok);
}

TEST(Derivation, SeqCostsAdd) {
  const std::string c = "x := Lap[0.5](a)";
  const json ok = node("seq", judgment(kFrame, c + "; " + c, kFramed, "1"), {weak_lap(c, kFrame), weak_lap(c, kFramed)});
  json bad = ok;
  bad["judgment"]["eps"] = "0.5";
  EXPECT_TRUE(check_derivation(toy(), derivation_from_json(ok)).ok);
  const DerivationCheck r = check_derivation(toy(), derivation_from_json(bad));
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(has_issue(r, "cost-mismatch"));
}

TEST(Derivation, WeakCannotDecreaseDelta) {
  const json inner = node("weak", judgment("a_1 == a_2", "x := a + 1", "x_1 == x_2", "0", "0.1"),
                          {node("assn", judgment("a_1 + 1 == a_2 + 1", "x := a + 1", "x_1 == x_2", "0"))});
  EXPECT_TRUE(check_derivation(toy(), derivation_from_json(inner)).ok);
  const json outer = node("weak", judgment("a_1 == a_2", "x := a + 1", "x_1 == x_2", "0", "0"), {inner});
  const DerivationCheck r = check_derivation(toy(), derivation_from_json(outer));
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(has_issue(r, "rule-violation"));
}

TEST(Derivation, ArityMismatch) {
  const json d = node("seq", judgment("true", "x := 1; x := 2", "true", "0"),
                      {node("assn", judgment("true", "x := 1", "true", "0"))});
  EXPECT_TRUE(has_issue(check_derivation(toy(), derivation_from_json(d)), "arity-mismatch"));
}

TEST(Derivation, GeneralizedLoopRuleUnsupported) {
  const DerivationFile f = load_derivation(corpus_path("derivations/gwhile.json"));
  const DerivationCheck c = check_derivation(f.unit, f.root);
  EXPECT_FALSE(c.ok);
  EXPECT_TRUE(has_issue(c, "unsupported-rule"));
  try {
    compile_to_hoare(f.unit, f.root);
    FAIL();
  } catch (const DerivationError& e) {
    EXPECT_EQ(e.kind(), "unsupported-rule");
  }
}

TEST(Derivation, JsonRoundTrip) {
  const DerivationFile f = load_derivation(corpus_path("derivations/loop3.json"));
  const Derivation again = derivation_from_json(to_json(f.root));
  EXPECT_EQ(to_json(again), to_json(f.root));
}

TEST(Compile, IntroIsTheGoalTriple) {
  const DerivationFile f = load_derivation(corpus_path("derivations/intro.json"));
  const CompiledTriple t = compile_to_hoare(f.unit, f.root);
  EXPECT_EQ(pretty(t.triple.pre), "abs(a_1 - a_2) <= 1 && __alpha == 0.0 && __delta == 0.0");
  EXPECT_EQ(pretty(t.triple.post), "x_1 == x_2 && __alpha <= 0.5 && __delta <= 0.0");
  EXPECT_EQ(pretty(t.triple.cmd), "t_1 := a_1 * 2;\nt_2 := a_2 * 2;\n(x_1, x_2) := Lap<>[0.25](t_1, t_2)");
}

TEST(Compile, ThreeIterationLoopBoundsAlpha) {
  const DerivationFile f = load_derivation(corpus_path("derivations/loop3.json"));
  CompiledTriple t = compile_to_hoare(f.unit, f.root);
  EXPECT_NE(pretty(t.triple.post).find("__alpha <= 1.5"), std::string::npos) << pretty(t.triple.post);
  falsify_all(t.unit, t.vcs.obligations);
  for (const auto& o : t.vcs.obligations) EXPECT_NE(o.status, ObStatus::Falsified) << o.id << " " << o.rule;
}

TEST(Compile, AllBundledDerivations) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_path("derivations"))) {
    if (entry.path().extension() != ".json" || entry.path().stem() == "gwhile") continue;
    ++seen;
    const DerivationFile f = load_derivation(entry.path().string());
    const DerivationCheck c = check_derivation(f.unit, f.root);
    EXPECT_TRUE(c.ok) << entry.path() << (c.issues.empty() ? "" : ": " + c.issues[0].message);
    CompiledTriple t = compile_to_hoare(f.unit, f.root);
    falsify_all(t.unit, t.vcs.obligations);
    for (const auto& o : t.vcs.obligations)
      EXPECT_NE(o.status, ObStatus::Falsified) << entry.path() << " " << o.id << " " << o.blame;
  }
  EXPECT_GE(seen, 9u);
}
