#include <cmath>

#include <gtest/gtest.h>

#include "dpsp/interp.hpp"
#include "dpsp/parser.hpp"
#include "support.hpp"

using namespace dpsp;
using namespace dpsp::testing;

TEST(Laplace, Symmetric) {
  const ValueDist d = lap_dist(1.0, 0, 30);
  for (int k = 0; k <= 30; ++k) EXPECT_EQ(d.mass(Value(k)), d.mass(Value(-k))) << k;
  EXPECT_NEAR(d.total(), 1.0, 1e-12);
}

TEST(Laplace, AdjacentWeightRatio) {
  const ValueDist d = lap_dist(1.0, 0, 30);
  EXPECT_NEAR(d.mass(Value(0)) / d.mass(Value(1)), std::exp(0.5), 1e-12);
}

TEST(Laplace, TruncatedTail) {
  const ValueDist d = lap_dist(1.0, 0, 40);
  double outside = 0;
  for (const auto& [v, p] : d)
    if (std::llabs(v.as_int()) > 10) outside += p;
  EXPECT_GT(outside, 0);
  EXPECT_LE(outside, 2 * std::exp(-5.0));
}

TEST(Laplace, SupportIsTheWindow) {
  const ValueDist d = lap_dist(0.5, 3, 7);
  EXPECT_EQ(d.size(), 15u);
  EXPECT_GT(d.mass(Value(-4)), 0);
  EXPECT_GT(d.mass(Value(10)), 0);
  EXPECT_EQ(d.mass(Value(11)), 0);
}

TEST(Laplace, WindowTooSmallNamesMinimum) {
  const auto need = min_window(1.0, 1e-9);
  EXPECT_LT(lap_tail_bound(1.0, static_cast<double>(need)), 1e-9);
  EXPECT_GE(lap_tail_bound(1.0, static_cast<double>(need - 1)), 1e-9);
  try {
    lap_dist(1.0, 0, 10, 1e-9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(need)), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(lap_dist(1.0, 0, need, 1e-9));
}

TEST(Exponential, ConstantScoreIsUniform) {
  const Value score = parse_value("{0: {0: 1.0, 1: 1.0, 2: 1.0}}");
  const ValueDist d = exp_dist(0.7, score, Value(0), {Value(0), Value(1), Value(2)});
  for (int r = 0; r < 3; ++r) EXPECT_NEAR(d.mass(Value(r)), 1.0 / 3, 1e-12);
}

TEST(Exponential, ScoreGapGivesRatioE) {
  const double eps = 0.25;
  const Value score = parse_value("{0: {0: 0.0, 1: " + std::to_string(2 / eps) + "}}");
  const ValueDist d = exp_dist(eps, score, Value(0), {Value(0), Value(1)});
  EXPECT_NEAR(d.mass(Value(1)) / d.mass(Value(0)), std::exp(1.0), 1e-12);
}

TEST(Exponential, SingletonRangeIsDirac) {
  const Value score = parse_value("{0: {5: 3.0}}");
  const ValueDist d = exp_dist(1.0, score, Value(0), {Value(5)});
  EXPECT_TRUE(d.approx_equal(ValueDist::dirac(Value(5)), 1e-15));
}

TEST(Exponential, Errors) {
  const Value score = parse_value("{0: {0: 1.0}}");
  EXPECT_THROW(exp_dist(1.0, score, Value(0), {}), EvalError);
  EXPECT_THROW(exp_dist(1.0, score, Value(0), {Value(0), Value(1)}), EvalError);
}

namespace {

const char* const kLapProgram = R"(
decl x : int in {-50..50};
pre { true };
target (1, 0);
x := Lap[1](0);
return x
)";

const char* const kCountingLoop = R"(
decl l : list in lists(2..2, {0..1});
decl x : int;
decl s : int;
pre { true };
target (2, 0);
s := 0;
@invariant{true}
@variant{length(l_1)}
while 0 < length(l) do {
  x := Lap[1](hd(l));
  s := s + x;
  l := tl(l)
};
return s
)";

}  // namespace

TEST(Interpret, SkipIsDirac) {
  const Unit u = parse_unit(kLapProgram);
  const Memory m = initial_memory(u, {{"x", Value(4)}});
  EXPECT_TRUE(interpret(u, parse_cmd("skip"), m).approx_equal(MemDist::dirac(m), 0));
}

TEST(Interpret, LaplaceProgramOutput) {
  const Unit u = parse_unit(kLapProgram);
  InterpConfig cfg;
  const ValueDist d = output(u, initial_memory(u, {}), cfg);
  const ValueDist expect = lap_dist(1.0, 0, min_window(1.0, cfg.tail_tol));
  EXPECT_TRUE(d.approx_equal(expect, 1e-15));
}

TEST(Interpret, CountingLoopMatchesHandExpansion) {
  const Unit u = parse_unit(kCountingLoop);
  InterpConfig cfg;
  cfg.window = 45;
  for (const IntList db : {IntList{0, 1}, IntList{1, 1}}) {
    const ValueDist got = output(u, initial_memory(u, {{"l", Value(db)}}), cfg);
    // s = x0 + x1 with x0 ~ Lap(db[0]) then x1 ~ Lap(db[1]), expanded as a double sum.
    const ValueDist first = lap_dist(1.0, db[0], 45), second = lap_dist(1.0, db[1], 45);
    std::map<std::int64_t, double> want;
    for (const auto& [a, p] : first)
      for (const auto& [b, q] : second) want[a.as_int() + b.as_int()] += p * q;
    ASSERT_EQ(got.size(), want.size());
    for (const auto& [s, p] : want) EXPECT_NEAR(got.mass(Value(s)), p, 1e-15) << s;
  }
}

TEST(Interpret, LoopFreeMassIsOne) {
  for (const char* f : {"intro.pwhile", "ptr.pwhile"}) {
    const Unit u = load_corpus(f);
    const ValueDist d = output(u, initial_memory(u, {}), {});
    EXPECT_NEAR(d.total(), 1.0, 1e-9) << f;
  }
}

TEST(Interpret, UnrollingEquivalence) {
  const Unit u = parse_unit(kCountingLoop);
  InterpConfig cfg;
  cfg.window = 45;
  const auto [prefix, ret] = split_return(u.body);
  const std::string g = "0 < length(l)";
  // Three syntactic unrollings cover every list of length <= 2.
  const CmdPtr unrolled = parse_cmd("s := 0; if " + g + " then { x := Lap[1](hd(l)); s := s + x; l := tl(l); if " + g +
                                    " then { x := Lap[1](hd(l)); s := s + x; l := tl(l); if " + g +
                                    " then { x := Lap[1](hd(l)); s := s + x; l := tl(l) } else { skip } } else { skip } "
                                    "} else { skip }");
  for (const IntList db : {IntList{0, 1}, IntList{1, 0}}) {
    const Memory m = initial_memory(u, {{"l", Value(db)}});
    const MemDist a = interpret(u, prefix, m, cfg);
    const MemDist b = interpret(u, unrolled, m, cfg);
    EXPECT_TRUE(a.approx_equal(b, 1e-15));
  }
}

TEST(Interpret, IterationCap) {
  const Unit u = parse_unit(kCountingLoop);
  InterpConfig cfg;
  cfg.window = 45;
  cfg.iteration_cap = 10;
  EXPECT_THROW(output(u, initial_memory(u, {{"l", Value(IntList{0, 1})}}), cfg), Error);
}

TEST(Interpret, Deterministic) {
  const Unit u = load_corpus("intro.pwhile");
  const Memory m = initial_memory(u, {{"a", Value(2)}});
  const ValueDist a = output(u, m), b = output(u, m);
  ASSERT_EQ(a.size(), b.size());
  auto it = b.begin();
  for (const auto& [v, p] : a) {
    EXPECT_EQ(v, it->first);
    EXPECT_EQ(p, it->second);
    ++it;
  }
}
