#include <gtest/gtest.h>

#include "dpsp/parser.hpp"
#include "dpsp/product.hpp"
#include "dpsp/target.hpp"
#include "support.hpp"

using namespace dpsp;
using namespace dpsp::testing;

namespace {

const char* const kUnit = R"(
decl x : int in {0..7};
decl a : int in {0..7};
range R = [0, 1, 2];
decl s : map<int, map<int, real>> in {{0: {0: 0.0, 1: 1.0, 2: 2.0}}, {0: {0: 1.0, 1: 1.0, 2: 1.0}}};
pre { true };
target (1, 0);
return x
)";

}  // namespace

TEST(Target, AssertFalseIsBottom) {
  const Unit u = parse_unit(kUnit);
  const TargetResult r = run_target(u, parse_cmd("assert(false)"), initial_target_memory(u, {}));
  EXPECT_TRUE(r.bottom);
  EXPECT_TRUE(r.memories.empty());
}

TEST(Target, LaplacePairEnumeratesOutputs) {
  const Unit u = parse_unit(kUnit);
  const TargetResult r = run_target(u, parse_cmd("(x_1, x_2) := Lap<>[0.1](5, 3)"), initial_target_memory(u, {}));
  ASSERT_FALSE(r.bottom);
  EXPECT_EQ(r.memories.size(), 8u);
  for (const auto& m : r.memories) {
    EXPECT_EQ(m.get("x_1"), m.get("x_2"));
    EXPECT_NEAR(m.get(kAlpha).as_real(), 0.2, 1e-12);
  }
}

TEST(Target, AccuracyLaplaceChargesDelta) {
  const Unit u = parse_unit(kUnit);
  const TargetResult r =
      run_target(u, parse_cmd("@lapspec{accuracy(0.5)} (x_1, x_2) := Lap<>[1](3, 3)"), initial_target_memory(u, {}));
  ASSERT_FALSE(r.bottom);
  for (const auto& m : r.memories) {
    EXPECT_NEAR(m.get(kDelta).as_real(), 0.5, 1e-12);
    EXPECT_LE(std::abs(m.get("x_1").as_int() - 3), accuracy_radius(1, 0.5));
  }
  EXPECT_LT(r.memories.size(), 8u);
}

TEST(Target, ExpWithDifferentScoresIsBottom) {
  const Unit u = parse_unit(kUnit);
  const Memory m = initial_target_memory(u, {})
                       .set("s_1", parse_value("{0: {0: 0.0, 1: 1.0, 2: 2.0}}"))
                       .set("s_2", parse_value("{0: {0: 1.0, 1: 1.0, 2: 1.0}}"));
  EXPECT_TRUE(run_target(u, parse_cmd("(x_1, x_2) := Exp<>[1](s_1, 0, s_2, 0)"), m).bottom);
  const Memory same = m.set("s_2", m.get("s_1"));
  const TargetResult ok = run_target(u, parse_cmd("(x_1, x_2) := Exp<>[1](s_1, 0, s_2, 0)"), same);
  ASSERT_FALSE(ok.bottom);
  EXPECT_EQ(ok.memories.size(), 3u);
}

TEST(Target, BottomAbsorbs) {
  const Unit u = parse_unit(kUnit);
  const Memory m = initial_target_memory(u, {});
  EXPECT_TRUE(run_target(u, parse_cmd("x_1 := 1; assert(x_1 == 2); x_1 := 3"), m).bottom);
  EXPECT_TRUE(run_target(u, parse_cmd("(x_1, x_2) := Lap<>[1](0, 0); assert(x_1 < 7)"), m).bottom);
  EXPECT_FALSE(run_target(u, parse_cmd("(x_1, x_2) := Lap<>[1](0, 0); assert(x_1 <= 7)"), m).bottom);
}

TEST(Target, BudgetExceeded) {
  const Unit u = parse_unit(kUnit);
  TargetConfig cfg;
  cfg.budget = 20;
  EXPECT_THROW(run_target(u, parse_cmd("(x_1, x_2) := Lap<>[1](0, 0); (a_1, a_2) := Lap<>[1](0, 0)"),
                          initial_target_memory(u, {}), cfg),
               BudgetExceeded);
}

TEST(Target, DesyncProductReachesBottom) {
  const Unit u = product_unit(load_corpus("negative/desync.pwhile"));
  const Memory m = initial_target_memory(u, {{"a_1", Value(1)}, {"a_2", Value(2)}});
  const TargetResult r = run_target(u, u.body, m);
  EXPECT_TRUE(r.bottom);
  EXPECT_TRUE(r.bottom_span.valid());
}

TEST(Target, CustomMechanismNeedsAxioms) {
  const Unit u = product_unit(load_corpus("vertexcover.pwhile"));
  const Value g = u.find_var("g")->domain.enumerate().back();
  const Memory m = initial_target_memory(u, {{"g_1", g}, {"g_2", g}});
  EXPECT_THROW(run_target(u, u.body, m), Error);
  const AxiomSet ax = AxiomSet::load(corpus_path("axioms/choose.json"));
  TargetConfig cfg;
  cfg.axioms = &ax;
  const TargetResult r = run_target(u, u.body, m, cfg);
  EXPECT_TRUE(r.used_axioms);
}
